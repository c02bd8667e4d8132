# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.  Same signatures and semantics as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, sin, sinh, fabs

cnp.import_array()

ctypedef double complex cplx


cdef inline cplx _conj(cplx z) nogil:
    return z.real - 1j * z.imag


def manin_split(cplx[:, :] X):
    cdef Py_ssize_t n = X.shape[0], j, k
    XG_arr = np.zeros((n, n), dtype=np.complex128)
    XB_arr = np.zeros((n, n), dtype=np.complex128)
    cdef cplx[:, :] XG = XG_arr
    cdef cplx[:, :] XB = XB_arr
    cdef cplx d, low
    with nogil:
        for j in range(n):
            d = X[j, j]
            XG[j, j] = 1j * d.imag
            XB[j, j] = d.real
            for k in range(j + 1, n):
                low = X[k, j]
                XG[k, j] = low
                XG[j, k] = -_conj(low)
                XB[j, k] = X[j, k] + _conj(low)
    return XG_arr, XB_arr


def r_apply(cplx[:] qd, cplx[:, :] X):
    cdef Py_ssize_t n = X.shape[0], j, k
    out_arr = np.zeros((n, n), dtype=np.complex128)
    cdef cplx[:, :] out = out_arr
    cdef cplx q
    with nogil:
        for j in range(n):
            for k in range(n):
                if j != k:
                    q = qd[j] * _conj(qd[k])
                    out[j, k] = 0.5 * (q + 1.0) / (q - 1.0) * X[j, k]
    return out_arr


cdef void _zeta(cplx[:] qd, cplx[:, :] lam, cplx[:, :] bp) noexcept nogil:
    cdef Py_ssize_t n = lam.shape[0], d, j, k, m
    cdef cplx s
    for j in range(n):
        for k in range(n):
            bp[j, k] = 1.0 if j == k else 0.0
    for d in range(1, n):
        for j in range(n - d):
            k = j + d
            s = 0.0
            for m in range(j, k):
                s = s + bp[j, m] * lam[m, k]
            bp[j, k] = s / (_conj(qd[j]) * qd[k] - 1.0)


def zeta_solve(cplx[:] qd, cplx[:, :] lam):
    cdef Py_ssize_t n = lam.shape[0]
    out_arr = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, :] out = out_arr
    with nogil:
        _zeta(qd, lam, out)
    return out_arr


def zeta_solve_batch(cplx[:, :] qds, cplx[:, :, :] lams):
    cdef Py_ssize_t m = lams.shape[0], n = lams.shape[1], i
    out_arr = np.empty((m, n, n), dtype=np.complex128)
    cdef cplx[:, :, :] out = out_arr
    with nogil:
        for i in range(m):
            _zeta(qds[i], lams[i], out[i])
    return out_arr


cdef void _rs_bplus(cplx[:] qd, double x, cplx[:, :] bp) noexcept nogil:
    cdef Py_ssize_t n = qd.shape[0], k, l, m
    cdef double a = exp(-0.5 * x), c = exp(0.5 * x)
    cdef cplx prod
    for k in range(n):
        for l in range(n):
            bp[k, l] = 1.0 if k == l else 0.0
    for k in range(n):
        for l in range(k + 1, n):
            prod = qd[k] * _conj(qd[l])
            for m in range(1, l - k + 1):
                prod = prod * (a * _conj(qd[k]) - c * _conj(qd[k + m - 1])) / (_conj(qd[k]) - _conj(qd[k + m]))
            bp[k, l] = prod


def rs_bplus(cplx[:] qd, double x):
    cdef Py_ssize_t n = qd.shape[0]
    out_arr = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, :] out = out_arr
    with nogil:
        _rs_bplus(qd, x, out)
    return out_arr


def rs_bplus_batch(cplx[:, :] qds, double x):
    cdef Py_ssize_t m = qds.shape[0], n = qds.shape[1], i
    out_arr = np.empty((m, n, n), dtype=np.complex128)
    cdef cplx[:, :, :] out = out_arr
    with nogil:
        for i in range(m):
            _rs_bplus(qds[i], x, out[i])
    return out_arr


cdef void _log_table(double[:] q, double x, double[:, :] tab) noexcept nogil:
    cdef Py_ssize_t n = q.shape[0], k, m
    cdef double s = sinh(0.5 * x) ** 2, d
    for k in range(n):
        for m in range(n):
            if m == k:
                tab[k, m] = 0.0
            else:
                d = sin(q[k] - q[m])
                tab[k, m] = log1p(s / (d * d))


def rs_log_table(double[:] q, double x):
    cdef Py_ssize_t n = q.shape[0]
    out_arr = np.empty((n, n))
    cdef double[:, :] out = out_arr
    with nogil:
        _log_table(q, x, out)
    return out_arr


def rs_theta(double[:] q, double[:] p, double x):
    cdef Py_ssize_t n = q.shape[0], k, m
    tab_arr = np.empty((n, n))
    cdef double[:, :] tab = tab_arr
    th_arr = np.empty(n)
    cdef double[:] th = th_arr
    cdef double acc
    with nogil:
        _log_table(q, x, tab)
        for k in range(n):
            acc = 2.0 * p[k]
            for m in range(n):
                if m < k:
                    acc = acc - 0.5 * tab[k, m]
                elif m > k:
                    acc = acc + 0.5 * tab[k, m]
            th[k] = acc
    return th_arr


def rs_momenta(double[:] q, double[:] theta, double x):
    cdef Py_ssize_t n = q.shape[0], k, m
    tab_arr = np.empty((n, n))
    cdef double[:, :] tab = tab_arr
    p_arr = np.empty(n)
    cdef double[:] p = p_arr
    cdef double acc
    with nogil:
        _log_table(q, x, tab)
        for k in range(n):
            acc = theta[k]
            for m in range(n):
                if m < k:
                    acc = acc + 0.5 * tab[k, m]
                elif m > k:
                    acc = acc - 0.5 * tab[k, m]
            p[k] = 0.5 * acc
    return p_arr


def rs_hamiltonians(double[:] q, double[:] theta, double x):
    cdef Py_ssize_t n = q.shape[0], k, m
    tab_arr = np.empty((n, n))
    cdef double[:, :] tab = tab_arr
    cdef double hp = 0.0, hm = 0.0, w
    with nogil:
        _log_table(q, x, tab)
        for k in range(n):
            w = 0.0
            for m in range(n):
                if m != k:
                    w = w + 0.5 * tab[k, m]
            hp = hp + exp(theta[k] + w)
            hm = hm + exp(-theta[k] + w)
    return hp, hm


def sutherland_potential(double[:] q, cplx[:, :] X):
    cdef Py_ssize_t n = q.shape[0], j, k
    cdef double acc = 0.0, s, a
    with nogil:
        for j in range(n):
            for k in range(j + 1, n):
                s = sin(0.5 * (q[j] - q[k]))
                a = X[j, k].real * X[j, k].real + X[j, k].imag * X[j, k].imag
                acc = acc + a / (s * s)
    return acc / 16.0
