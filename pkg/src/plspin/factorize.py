"""Iwasawa factorizations of SL(n,C) and the group actions built from them.

Every ``K`` in SL(n,C) factorizes uniquely as

    K = g_L b_R^{-1} = b_L g_R^{-1},    g_L, g_R in SU(n),  b_L, b_R in B,

where ``B`` is upper triangular with positive diagonal.  We write
``Xi_L, Xi_R`` for the unitary factors and ``Lambda_L, Lambda_R`` for the
Borel factors.  The map ``nu(b) = b b^dagger`` identifies ``B`` with the
positive definite Hermitian matrices of determinant one.
"""
from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np

from . import lie_core as lc
from .errors import ConditioningWarning, DomainError, InvalidArgumentError

COND_WARN = 1e12
DEFAULT_GAP = 1e-6


class IwasawaFactors(NamedTuple):
    g_L: np.ndarray
    b_R: np.ndarray
    b_L: np.ndarray
    g_R: np.ndarray
    condition: float


class Regularity(NamedTuple):
    regular: bool
    margin: float


# --------------------------------------------------------------------------
# validation helpers
# --------------------------------------------------------------------------

def check_unitary(g, tol: float = 1e-10) -> np.ndarray:
    A = lc.as_matrix(g)
    n = A.shape[0]
    if np.linalg.norm(lc.dagger(A) @ A - np.eye(n)) > tol * n:
        raise InvalidArgumentError("matrix is not unitary")
    if abs(np.linalg.det(A) - 1.0) > tol * n:
        raise InvalidArgumentError("unitary matrix does not have determinant 1")
    return A


def check_borel(b, tol: float = 1e-10) -> np.ndarray:
    A = lc.as_matrix(b)
    d = np.diag(A)
    if np.linalg.norm(np.tril(A, -1)) > lc.scaled_tol(A, tol):
        raise InvalidArgumentError("Borel element must be upper triangular")
    if np.any(np.abs(d.imag) > tol) or np.any(d.real <= 0):
        raise InvalidArgumentError("Borel element needs a positive real diagonal")
    if abs(np.prod(d.real) - 1.0) > tol * A.shape[0]:
        raise InvalidArgumentError("Borel element does not have determinant 1")
    return A


def check_positive_hermitian(L, tol: float = 1e-10) -> np.ndarray:
    A = lc.as_matrix(L)
    if np.linalg.norm(A - lc.dagger(A)) > lc.scaled_tol(A, tol):
        raise InvalidArgumentError("matrix is not Hermitian")
    w = np.linalg.eigvalsh(0.5 * (A + lc.dagger(A)))
    if w[0] <= 0:
        raise DomainError("matrix is not positive definite")
    if abs(np.prod(w) - 1.0) > tol * A.shape[0] * max(1.0, w[-1] / w[0]):
        raise InvalidArgumentError("positive matrix does not have determinant 1")
    return A


def check_sl(K, tol: float = 1e-10) -> np.ndarray:
    A = lc.as_matrix(K)
    if abs(np.linalg.det(A) - 1.0) > tol * max(1.0, np.linalg.norm(A)) ** A.shape[0]:
        raise InvalidArgumentError("matrix does not have determinant 1")
    return A


# --------------------------------------------------------------------------
# factorizations
# --------------------------------------------------------------------------

def qr_positive(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """QR factorization with a positive real diagonal in ``R``."""
    q, r = np.linalg.qr(A)
    d = np.diag(r)
    ph = d / np.abs(d)
    q = q * ph
    r = np.conj(ph)[:, None] * r
    r[np.diag_indices_from(r)] = np.abs(d)
    return q, r


def _upper_inverse(r: np.ndarray) -> np.ndarray:
    import scipy.linalg as sla

    return sla.solve_triangular(r, np.eye(r.shape[0], dtype=np.complex128))


def iwasawa(K) -> IwasawaFactors:
    """Both Iwasawa factorizations ``K = g_L b_R^-1 = b_L g_R^-1``.

    Uses QR of ``K`` (giving ``g_L`` and ``b_R^-1``) and QR of ``K^-1``
    (giving ``g_R`` and ``b_L^-1``).  A ``ConditioningWarning`` is emitted if
    the condition number of ``K`` exceeds ``1e12``.
    """
    A = check_sl(K)
    cond = float(np.linalg.cond(A))
    if cond > COND_WARN:
        warnings.warn(f"Iwasawa factorization of ill-conditioned matrix (cond={cond:.3g})",
                      ConditioningWarning, stacklevel=2)
    g_L, r1 = qr_positive(A)
    g_R, r2 = qr_positive(np.linalg.inv(A))
    return IwasawaFactors(g_L, _upper_inverse(r1), _upper_inverse(r2), g_R, cond)


def xi_left(K) -> np.ndarray:
    return qr_positive(lc.as_matrix(K))[0]


def lambda_right(K) -> np.ndarray:
    return _upper_inverse(qr_positive(lc.as_matrix(K))[1])


def xi_right(K) -> np.ndarray:
    return qr_positive(np.linalg.inv(lc.as_matrix(K)))[0]


def lambda_left(K) -> np.ndarray:
    return _upper_inverse(qr_positive(np.linalg.inv(lc.as_matrix(K)))[1])


def nu(b) -> np.ndarray:
    """``nu(b) = b b^dagger``."""
    A = lc.as_matrix(b)
    return A @ lc.dagger(A)


def nu_inverse(L) -> np.ndarray:
    """Unique ``b`` in ``B`` with ``b b^dagger = L`` (reversed Cholesky)."""
    A = lc.as_matrix(L)
    A = 0.5 * (A + lc.dagger(A))
    J = A[::-1, ::-1]
    try:
        C = np.linalg.cholesky(J)
    except np.linalg.LinAlgError as exc:
        raise DomainError("matrix is not positive definite") from exc
    return np.ascontiguousarray(C[::-1, ::-1])


def dress(eta, b) -> np.ndarray:
    """Dressing action ``Dress_eta(b) = Lambda_L(eta b)``."""
    return lambda_left(lc.as_matrix(eta) @ lc.as_matrix(b))


def dress_infinitesimal(X: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Velocity ``d/dt Dress_{exp(tX)}(b)`` at ``t = 0`` for ``X`` in su(n)."""
    return b @ lc.pi_B(np.linalg.solve(b, X @ b))


def quasi_adjoint(eta, K) -> np.ndarray:
    """Quasi-adjoint action ``eta K Xi_R(eta Lambda_L(K))``."""
    E = lc.as_matrix(eta)
    A = lc.as_matrix(K)
    return E @ A @ xi_right(E @ lambda_left(A))


def moment_map(K) -> np.ndarray:
    """``Lambda(K) = Lambda_L(K) Lambda_R(K)``."""
    f = iwasawa(K)
    return f.b_L @ f.b_R


def split_borel(b) -> tuple[np.ndarray, np.ndarray]:
    """``b = exp(p) b_plus`` with ``p`` real diagonal and ``b_plus`` unipotent."""
    A = lc.as_matrix(b)
    d = np.diag(A).real
    p = np.diag(np.log(d)).astype(np.complex128)
    bplus = A / d[:, None]
    bplus[np.diag_indices_from(bplus)] = 1.0
    return p, bplus


def join_borel(p, bplus) -> np.ndarray:
    """Inverse of :func:`split_borel`."""
    return np.exp(np.diag(p).real)[:, None] * lc.as_matrix(bplus)


# --------------------------------------------------------------------------
# the three model spaces
# --------------------------------------------------------------------------

def m1(K) -> tuple[np.ndarray, np.ndarray]:
    """``K -> (g_R, b_R)``."""
    f = iwasawa(K)
    return f.g_R, f.b_R


def m2(point) -> tuple[np.ndarray, np.ndarray]:
    """``(g, b) -> (g, b b^dagger)``."""
    g, b = point
    return lc.as_matrix(g), nu(b)


def m(K) -> tuple[np.ndarray, np.ndarray]:
    return m2(m1(K))


def m1_inverse(point) -> np.ndarray:
    """Recover ``K`` from ``(g_R, b_R)`` using ``g_R^-1 b_R = b_L^-1 g_L``."""
    g, b = point
    g_L = np.linalg.inv(xi_right(lc.dagger(g) @ b))
    return g_L @ np.linalg.inv(b)


def m_inverse(point) -> np.ndarray:
    g, L = point
    return m1_inverse((g, nu_inverse(L)))


# --------------------------------------------------------------------------
# actions on the master phase space and on P_- x P
# --------------------------------------------------------------------------

def beta_left(g, b) -> np.ndarray:
    """``(Dress_{g^-1}(b))^-1``."""
    return np.linalg.inv(dress(lc.dagger(lc.as_matrix(g)), b))


def eta_tilde(eta, point) -> np.ndarray:
    """Unitary that realizes the Poisson action as a plain conjugation."""
    g, L = point
    return np.linalg.inv(xi_right(lc.as_matrix(eta) @ beta_left(g, nu_inverse(L))))


def conjugation_action(eta, point) -> tuple[np.ndarray, np.ndarray]:
    """Simultaneous conjugation ``(eta g eta^-1, eta L eta^-1)``."""
    E = lc.as_matrix(eta)
    Ei = lc.dagger(E)
    return tuple(E @ lc.as_matrix(x) @ Ei for x in point)


def poisson_action_bM(eta, point) -> tuple[np.ndarray, np.ndarray]:
    """The Poisson action on ``G x P`` induced from the quasi-adjoint action."""
    return conjugation_action(eta_tilde(eta, point), point)


def hat_action(eta, pair) -> tuple[np.ndarray, np.ndarray]:
    """Poisson action on ``P_- x P`` generated by ``(L1, L2) -> b1 b2``."""
    L1, L2 = (lc.as_matrix(x) for x in pair)
    b1 = np.linalg.inv(nu_inverse(L1))
    u = xi_right(lc.as_matrix(eta) @ b1)
    ui = lc.dagger(u)
    return ui @ L1 @ u, ui @ L2 @ u


def hat_moment(pair) -> np.ndarray:
    """``(nu(b1^-1), nu(b2)) -> b1 b2``."""
    L1, L2 = pair
    return np.linalg.inv(nu_inverse(L1)) @ nu_inverse(L2)


def dress_pair(eta, pair) -> tuple[np.ndarray, np.ndarray]:
    """Action on ``B x B``: ``(Dress_eta b1, Dress_{Xi_R(eta b1)^-1} b2)``."""
    b1, b2 = pair
    E = lc.as_matrix(eta)
    return dress(E, b1), dress(lc.dagger(xi_right(E @ b1)), b2)


# --------------------------------------------------------------------------
# regularity
# --------------------------------------------------------------------------

def _chordal_min_gap(z: np.ndarray) -> float:
    d = np.abs(z[:, None] - z[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def regularity(x, kind: str | None = None, delta: float = DEFAULT_GAP) -> Regularity:
    """Pairwise eigenvalue separation test.

    ``kind`` is one of ``"torus"`` (diagonal unitary, chordal distance of the
    diagonal entries), ``"unitary"`` (eigenvalues on the unit circle),
    ``"hermitian"`` (real eigenvalue gaps) or ``"borel"`` (applied to
    ``nu(b)``).  When omitted it is inferred from the matrix structure.
    """
    A = lc.as_matrix(x)
    if kind is None:
        if np.allclose(A, np.diag(np.diag(A))) and np.allclose(np.abs(np.diag(A)), 1.0):
            kind = "torus"
        elif np.allclose(A, lc.dagger(A)):
            kind = "hermitian"
        elif np.allclose(lc.dagger(A) @ A, np.eye(A.shape[0])):
            kind = "unitary"
        elif np.allclose(np.tril(A, -1), 0):
            kind = "borel"
        else:
            raise InvalidArgumentError("cannot infer the kind of matrix for a regularity test")
    if kind == "torus":
        margin = _chordal_min_gap(np.diag(A))
    elif kind == "unitary":
        margin = _chordal_min_gap(np.linalg.eigvals(A))
    elif kind == "hermitian":
        w = np.linalg.eigvalsh(0.5 * (A + lc.dagger(A)))
        margin = float(np.min(np.diff(w)))
    elif kind == "borel":
        return regularity(nu(A), "hermitian", delta)
    else:
        raise InvalidArgumentError(f"unknown regularity kind {kind!r}")
    return Regularity(bool(margin > delta), margin)
