"""Pure-Python reference implementation of the hot kernels.

Signatures mirror ``_kernels.pyx``.  Inputs are assumed validated by the
callers (regular ``Q``, square complex arrays).
"""
import math

import numpy as np


def manin_split(X):
    n = X.shape[0]
    XG = np.zeros((n, n), dtype=np.complex128)
    XB = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        d = X[j, j]
        XG[j, j] = 1j * d.imag
        XB[j, j] = d.real
        for k in range(j + 1, n):
            low = X[k, j]
            XG[k, j] = low
            XG[j, k] = -low.conjugate()
            XB[j, k] = X[j, k] + low.conjugate()
    return XG, XB


def r_apply(qd, X):
    n = X.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        for k in range(n):
            if j != k:
                q = qd[j] * qd[k].conjugate()
                out[j, k] = 0.5 * (q + 1.0) / (q - 1.0) * X[j, k]
    return out


def zeta_solve(qd, lam):
    n = lam.shape[0]
    bp = np.eye(n, dtype=np.complex128)
    for d in range(1, n):
        for j in range(n - d):
            k = j + d
            s = 0j
            for m in range(j, k):
                s += bp[j, m] * lam[m, k]
            bp[j, k] = s / (qd[j].conjugate() * qd[k] - 1.0)
    return bp


def zeta_solve_batch(qds, lams):
    out = np.empty_like(lams, dtype=np.complex128)
    for i in range(lams.shape[0]):
        out[i] = zeta_solve(qds[i], lams[i])
    return out


def rs_bplus(qd, x):
    n = qd.shape[0]
    qb = np.conj(qd)
    a = math.exp(-0.5 * x)
    c = math.exp(0.5 * x)
    bp = np.eye(n, dtype=np.complex128)
    for k in range(n):
        for l in range(k + 1, n):
            prod = qd[k] * qb[l]
            for m in range(1, l - k + 1):
                prod *= (a * qb[k] - c * qb[k + m - 1]) / (qb[k] - qb[k + m])
            bp[k, l] = prod
    return bp


def rs_bplus_batch(qds, x):
    m, n = qds.shape
    out = np.empty((m, n, n), dtype=np.complex128)
    for i in range(m):
        out[i] = rs_bplus(qds[i], x)
    return out


def rs_log_table(q, x):
    n = q.shape[0]
    s = math.sinh(0.5 * x) ** 2
    out = np.zeros((n, n))
    for k in range(n):
        for m in range(n):
            if m != k:
                out[k, m] = math.log1p(s / math.sin(q[k] - q[m]) ** 2)
    return out


def rs_theta(q, p, x):
    n = q.shape[0]
    tab = rs_log_table(q, x)
    th = np.empty(n)
    for k in range(n):
        acc = 2.0 * p[k]
        for m in range(n):
            if m < k:
                acc -= 0.5 * tab[k, m]
            elif m > k:
                acc += 0.5 * tab[k, m]
        th[k] = acc
    return th


def rs_momenta(q, theta, x):
    n = q.shape[0]
    tab = rs_log_table(q, x)
    p = np.empty(n)
    for k in range(n):
        acc = theta[k]
        for m in range(n):
            if m < k:
                acc += 0.5 * tab[k, m]
            elif m > k:
                acc -= 0.5 * tab[k, m]
        p[k] = 0.5 * acc
    return p


def rs_hamiltonians(q, theta, x):
    n = q.shape[0]
    tab = rs_log_table(q, x)
    hp = 0.0
    hm = 0.0
    for k in range(n):
        w = 0.0
        for m in range(n):
            if m != k:
                w += 0.5 * tab[k, m]
        hp += math.exp(theta[k] + w)
        hm += math.exp(-theta[k] + w)
    return hp, hm


def sutherland_potential(q, X):
    n = q.shape[0]
    acc = 0.0
    for j in range(n):
        for k in range(j + 1, n):
            s = math.sin(0.5 * (q[j] - q[k]))
            acc += abs(X[j, k]) ** 2 / (s * s)
    return acc / 16.0
