"""The Manin triple sl(n,C) = su(n) + b(n) with the imaginary-trace pairing.

Conventions
-----------
* ``G``      : su(n), traceless skew-Hermitian matrices.
* ``B``      : traceless upper triangular matrices with real diagonal.
* ``G0``/``B0`` : the diagonal parts of ``G`` (imaginary) and ``B`` (real).
* ``Gperp``  : off-diagonal part of ``G``.
* ``Bplus``  : strictly upper triangular complex matrices.
* ``full``   : the whole real Lie algebra sl(n,C).

The pairing is ``<X, Y> = Im tr(XY)``.  Both ``G`` and ``B`` are isotropic and
the pairing puts ``G`` in duality with ``B``, ``G0`` with ``B0`` and
``Gperp`` with ``Bplus``.  The Killing form of sl(n,C) equals ``2n`` times
the trace form.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from . import kernels
from .errors import DegenerateBasisError, InvalidArgumentError

DEFAULT_TOL = 1e-10

SPACES = ("full", "G", "B", "G0", "B0", "Gperp", "Bplus")

#: pairing-dual summand of every subspace
DUAL_SPACE = {
    "full": "full",
    "G": "B",
    "B": "G",
    "G0": "B0",
    "B0": "G0",
    "Gperp": "Bplus",
    "Bplus": "Gperp",
}


def killing_to_trace_ratio(n: int) -> int:
    """Killing form of sl(n,C) divided by the trace form."""
    return 2 * n


def as_matrix(X, n: int | None = None) -> np.ndarray:
    """Return ``X`` as a square complex128 array, validating the shape."""
    A = np.asarray(X, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {A.shape}")
    if n is not None and A.shape[0] != n:
        raise InvalidArgumentError(f"expected dimension {n}, got {A.shape[0]}")
    return A


def scaled_tol(X: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    return tol * max(1.0, float(np.linalg.norm(X)))


def check_traceless(X, tol: float = DEFAULT_TOL) -> np.ndarray:
    A = as_matrix(X)
    if abs(np.trace(A)) > scaled_tol(A, tol):
        raise InvalidArgumentError("matrix is not traceless")
    return A


def traceless(X: np.ndarray) -> np.ndarray:
    """Remove the trace part (projection from gl(n) to sl(n))."""
    n = X.shape[-1]
    return X - (np.trace(X, axis1=-2, axis2=-1)[..., None, None] / n) * np.eye(n)


def dagger(X: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(X, -1, -2))


# --------------------------------------------------------------------------
# decompositions
# --------------------------------------------------------------------------

def project_triangular(X):
    """Split ``X`` into strictly lower, diagonal and strictly upper parts."""
    A = check_traceless(X)
    lower = np.tril(A, -1)
    upper = np.triu(A, 1)
    diag = np.diag(np.diag(A))
    return lower, diag, upper


def _split(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # works on stacks (..., n, n); no validation
    lower = np.tril(A, -1)
    d = np.diagonal(A, axis1=-2, axis2=-1)
    eye = np.eye(A.shape[-1])
    XG = lower - dagger(lower) + 1j * d.imag[..., :, None] * eye
    XB = np.triu(A, 1) + dagger(lower) + d.real[..., :, None] * eye
    return XG, XB


def project_manin(X):
    """Decompose ``X`` into its ``su(n)`` and ``b(n)`` components.

    Parameters
    ----------
    X : (n, n) array_like
        Traceless complex matrix.

    Returns
    -------
    X_G, X_B : ndarray
        ``X_G`` is skew-Hermitian, ``X_B`` upper triangular with real diagonal,
        and ``X_G + X_B == X``.
    """
    A = check_traceless(X)
    return kernels.manin_split(np.ascontiguousarray(A))


def pi_G(X: np.ndarray) -> np.ndarray:
    return _split(np.asarray(X, dtype=np.complex128))[0]


def pi_B(X: np.ndarray) -> np.ndarray:
    return _split(np.asarray(X, dtype=np.complex128))[1]


def pi_G0(X: np.ndarray) -> np.ndarray:
    d = np.diagonal(X, axis1=-2, axis2=-1)
    return 1j * d.imag[..., :, None] * np.eye(X.shape[-1])


def pi_B0(X: np.ndarray) -> np.ndarray:
    d = np.diagonal(X, axis1=-2, axis2=-1)
    return d.real[..., :, None] * np.eye(X.shape[-1]) + 0j


def pi_Gperp(X: np.ndarray) -> np.ndarray:
    lower = np.tril(X, -1)
    return lower - dagger(lower)


def pi_Bplus(X: np.ndarray) -> np.ndarray:
    lower = np.tril(X, -1)
    return np.triu(X, 1) + dagger(lower)


_PROJECTORS = {
    "full": lambda X: np.asarray(X, dtype=np.complex128),
    "G": pi_G,
    "B": pi_B,
    "G0": pi_G0,
    "B0": pi_B0,
    "Gperp": pi_Gperp,
    "Bplus": pi_Bplus,
}


def project(X: np.ndarray, space: str) -> np.ndarray:
    """Project a traceless matrix onto ``space`` along the complementary summand.

    The complement of ``G0`` is ``Gperp + B``, that of ``Bplus`` is ``G + B0``
    and so on, following ``sl(n,C) = G0 + Gperp + B0 + Bplus``.
    """
    return _PROJECTORS[space](X)


def in_space(X, space: str, tol: float = DEFAULT_TOL) -> bool:
    A = np.asarray(X, dtype=np.complex128)
    if abs(np.trace(A)) > scaled_tol(A, tol):
        return False
    return bool(np.linalg.norm(project(A, space) - A) <= scaled_tol(A, tol))


# --------------------------------------------------------------------------
# pairing
# --------------------------------------------------------------------------

def pairing(X, Y) -> float:
    """``Im tr(XY)``."""
    A = np.asarray(X)
    B = np.asarray(Y)
    if A.shape != B.shape:
        raise InvalidArgumentError(f"dimension mismatch {A.shape} vs {B.shape}")
    return float(np.einsum("ij,ji->", A, B).imag)


def pairing_many(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Batched pairing over leading axes."""
    return np.einsum("...ij,...ji->...", X, Y).imag


@dataclass(frozen=True)
class PairingContext:
    """Fixes the dimension for the pairing ``Im tr(XY)`` on sl(n,C)."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgumentError("n must be at least 2")

    def __call__(self, X, Y) -> float:
        A = as_matrix(X, self.n)
        B = as_matrix(Y, self.n)
        return pairing(A, B)

    def gram(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        return np.einsum("aij,bji->ab", left, right).imag


# --------------------------------------------------------------------------
# bases
# --------------------------------------------------------------------------

def _unit(n, j, k):
    E = np.zeros((n, n), dtype=np.complex128)
    E[j, k] = 1.0
    return E


def _build_basis(n: int, space: str) -> np.ndarray:
    out = []
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    if space in ("G", "Gperp", "full"):
        for j, k in pairs:
            out.append(_unit(n, j, k) - _unit(n, k, j))
            out.append(1j * (_unit(n, j, k) + _unit(n, k, j)))
    if space in ("G", "G0", "full"):
        for j in range(n - 1):
            out.append(1j * (_unit(n, j, j) - _unit(n, j + 1, j + 1)))
    if space in ("B", "Bplus", "full"):
        for j, k in pairs:
            out.append(_unit(n, j, k))
            out.append(1j * _unit(n, j, k))
    if space in ("B", "B0", "full"):
        for j in range(n - 1):
            out.append(_unit(n, j, j) - _unit(n, j + 1, j + 1))
    return np.array(out)


@lru_cache(maxsize=None)
def _cached_basis(n: int, space: str) -> np.ndarray:
    if space not in SPACES:
        raise InvalidArgumentError(f"unknown subspace tag {space!r}")
    b = _build_basis(n, space)
    b.setflags(write=False)
    return b


def space_basis(n: int, space: str) -> np.ndarray:
    """A real basis of ``space`` as an array of shape ``(dim, n, n)``."""
    return _cached_basis(n, space)


def dual_basis(basis, complement_basis, cond_max: float = 1e12) -> np.ndarray:
    """Dual basis of ``basis`` inside the span of ``complement_basis``.

    Solves the Gram system ``G_ac = <e_a, t_c>`` and returns
    ``f_b = sum_c t_c (G^-1)_cb`` so that ``<e_a, f_b> = delta_ab``.
    """
    E = np.asarray(basis, dtype=np.complex128)
    T = np.asarray(complement_basis, dtype=np.complex128)
    if E.ndim == 2:
        E = E[None]
    if T.ndim == 2:
        T = T[None]
    if E.shape[0] != T.shape[0]:
        raise DegenerateBasisError("basis and complement have different dimensions")
    gram = np.einsum("aij,cji->ac", E, T).imag
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > cond_max:
        raise DegenerateBasisError("singular Gram matrix")
    coeff = np.linalg.inv(gram)
    return np.einsum("cij,cb->bij", T, coeff)


@lru_cache(maxsize=None)
def _cached_dual(n: int, space: str) -> np.ndarray:
    d = dual_basis(space_basis(n, space), space_basis(n, DUAL_SPACE[space]))
    d.setflags(write=False)
    return d


def space_dual_basis(n: int, space: str) -> np.ndarray:
    """Dual basis of ``space_basis(n, space)``, living in ``DUAL_SPACE[space]``."""
    return _cached_dual(n, space)


def coordinates(X: np.ndarray, space: str) -> np.ndarray:
    """Real coordinates of ``X`` in ``space_basis`` (via the dual basis)."""
    n = X.shape[-1]
    return pairing_many(space_dual_basis(n, space), X[None])


# --------------------------------------------------------------------------
# root data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RootSystem:
    """Root data of type A_{n-1} in the trace-form normalization."""

    n: int

    @property
    def positive_roots(self) -> list[tuple[int, int]]:
        return [(j, k) for j in range(self.n) for k in range(j + 1, self.n)]

    @property
    def simple_roots(self) -> list[tuple[int, int]]:
        return [(j, j + 1) for j in range(self.n - 1)]

    def root_vector(self, alpha: tuple[int, int]) -> np.ndarray:
        return _unit(self.n, *alpha)

    def negative_root_vector(self, alpha: tuple[int, int]) -> np.ndarray:
        return self.root_vector(alpha).T.copy()

    def squared_length(self, alpha: tuple[int, int]) -> float:
        return 2.0

    def evaluate(self, alpha: tuple[int, int], q: np.ndarray) -> float:
        """``alpha(q) = q_j - q_k`` for a diagonal ``q`` (matrix or vector)."""
        v = np.diagonal(q) if np.ndim(q) == 2 else np.asarray(q)
        return float(np.real(v[alpha[0]] - v[alpha[1]]))


# --------------------------------------------------------------------------
# exponential and logarithm
# --------------------------------------------------------------------------

def exp_nilpotent(N: np.ndarray) -> np.ndarray:
    """Exact exponential of a strictly upper triangular matrix."""
    n = N.shape[-1]
    out = np.eye(n, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    for k in range(1, n):
        term = term @ N / k
        out = out + term
    return out


def log_unipotent(U: np.ndarray) -> np.ndarray:
    """Exact logarithm of a unipotent upper triangular matrix."""
    n = U.shape[-1]
    N = U - np.eye(n)
    out = np.zeros_like(N, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    for k in range(1, n):
        term = term @ N
        out = out + ((-1) ** (k + 1) / k) * term
    return out


def exp_algebra(X, subspace_tag: str | None = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Exponential adapted to the subspace containing ``X``.

    Tags: ``"B0"`` (real diagonal), ``"B+"``/``"Bplus"`` (strictly upper,
    finite series), ``"iG"`` (Hermitian, spectral), ``"G"`` (skew-Hermitian,
    spectral), ``None`` (generic ``expm``).
    """
    A = as_matrix(X)
    tag = "Bplus" if subspace_tag == "B+" else subspace_tag
    if tag is None or tag == "full":
        return sla.expm(A)
    if tag == "B0":
        if not in_space(A, "B0", tol):
            raise InvalidArgumentError("element is not real diagonal traceless")
        return np.diag(np.exp(np.diag(A).real)).astype(np.complex128)
    if tag == "Bplus":
        if np.linalg.norm(np.tril(A)) > scaled_tol(A, tol):
            raise InvalidArgumentError("element is not strictly upper triangular")
        return exp_nilpotent(np.triu(A, 1))
    if tag == "iG":
        if np.linalg.norm(A - dagger(A)) > scaled_tol(A, tol):
            raise InvalidArgumentError("element is not Hermitian")
        w, V = np.linalg.eigh(0.5 * (A + dagger(A)))
        return (V * np.exp(w)) @ dagger(V)
    if tag == "G":
        if np.linalg.norm(A + dagger(A)) > scaled_tol(A, tol):
            raise InvalidArgumentError("element is not skew-Hermitian")
        w, V = np.linalg.eigh(-0.5j * (A - dagger(A)))
        return (V * np.exp(1j * w)) @ dagger(V)
    if tag == "B":
        if not in_space(A, "B", tol):
            raise InvalidArgumentError("element is not in b(n)")
        return sla.expm(A)
    raise InvalidArgumentError(f"unknown subspace tag {subspace_tag!r}")
