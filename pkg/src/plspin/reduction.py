"""Reduction of the master system to the gauge slice of regular diagonal ``Q``.

Contents: the dynamical r-matrix ``R(Q)``, the reduced Poisson bracket on
the slice ``(Q, L)`` and on its Borel form ``(Q, b)``, the reduced vector
field of an invariant Hamiltonian and the quadrature producing its integral
curves, the decoupled variables ``(Q, p, lambda)`` with the exact inverse of
``zeta``, the decoupled bracket, and the residual Weyl group action.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import factorize as fz
from . import kernels
from . import lie_core as lc
from . import poisson_engine as pe
from .errors import ConditioningWarning, InvalidArgumentError, SingularityError
from .master_system import InvariantObservable

DEFAULT_GAP = fz.DEFAULT_GAP


# --------------------------------------------------------------------------
# regular torus elements and the dynamical r-matrix
# --------------------------------------------------------------------------

def torus_entries(Q, delta: float = DEFAULT_GAP, tol: float = 1e-10) -> np.ndarray:
    """Diagonal of a regular diagonal unitary ``Q``.

    Raises :class:`SingularityError` when two entries are closer than
    ``delta`` on the unit circle.
    """
    A = lc.as_matrix(Q)
    d = np.diag(A).copy()
    if np.abs(A - np.diag(d)).max() > tol or np.abs(np.abs(d) - 1).max() > tol:
        raise InvalidArgumentError("Q must be a diagonal unitary matrix")
    reg = fz.regularity(A, "torus", delta)
    if not reg.regular:
        raise SingularityError(f"Q is not regular (eigenvalue gap {reg.margin:.3e} < {delta:.1e})")
    return d


@dataclass(frozen=True)
class DynamicalR:
    """``R(Q) = 1/2 (Ad_Q + id)(Ad_Q - id)^-1`` on the off-diagonal part.

    ``coefficients[j, k] = (q + 1) / (2 (q - 1))`` with ``q = Q_j conj(Q_k)``;
    the diagonal of the table is zero.
    """

    Q: np.ndarray
    qd: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)

    @classmethod
    def at(cls, Q, delta: float = DEFAULT_GAP) -> "DynamicalR":
        qd = torus_entries(Q, delta)
        q = qd[:, None] * np.conj(qd)[None, :]
        n = qd.size
        off = ~np.eye(n, dtype=bool)
        c = np.zeros((n, n), dtype=np.complex128)
        c[off] = 0.5 * (q[off] + 1) / (q[off] - 1)
        return cls(np.diag(qd), qd, c)

    def __call__(self, X) -> np.ndarray:
        return self.coefficients * np.asarray(X)


def r_apply(R: DynamicalR | np.ndarray, X) -> np.ndarray:
    """Apply ``R(Q)`` to ``X``; ``R`` may be a :class:`DynamicalR` or ``Q``."""
    if not isinstance(R, DynamicalR):
        R = DynamicalR.at(R)
    A = lc.as_matrix(X, R.qd.size)
    return kernels.r_apply(R.qd, np.ascontiguousarray(A))


# --------------------------------------------------------------------------
# reduced brackets
# --------------------------------------------------------------------------

def _slice_form(gF, gH, pt):
    R = DynamicalR.at(pt[0])
    D1F, D1H = gF[0, "left"], gH[0, "left"]
    D2F, D2H = gF[1, "sym"], gH[1, "sym"]
    return (pe.pair(D1F, D2H) - pe.pair(D1H, D2F)
            + pe.pair(R(lc.pi_G(D2H)), lc.pi_B(D2F))
            - pe.pair(lc.pi_B(D2H), R(lc.pi_G(D2F))))


def _slice_tangent(gH, pt):
    R = DynamicalR.at(pt[0])
    D2H = gH[1, "sym"]
    return {(0, "left"): lc.pi_G0(D2H), (1, "sym"): R(D2H) - gH[0, "left"]}


def _fslice_form(gF, gH, pt):
    Q, b = pt
    R = DynamicalR.at(Q)
    bi = np.linalg.inv(b)
    return (pe.pair(gF[0, "left"], gH[1, "left"]) - pe.pair(gH[0, "left"], gF[1, "left"])
            + pe.pair(R(b @ gH[1, "right"] @ bi), b @ gF[1, "right"] @ bi))


def _fslice_tangent(gH, pt):
    Q, b = pt
    R = DynamicalR.at(Q)
    bi = np.linalg.inv(b)
    return {(0, "left"): lc.pi_G0(gH[1, "left"]),
            (1, "left"): -gH[0, "left"],
            (1, "right"): lc.pi_B(bi @ R(b @ gH[1, "right"] @ bi) @ b)}


def _decoupled_form(gF, gH, pt):
    lam = pt[2]
    return (pe.pair(gF[0, "left"], gH[1, "add"]) - pe.pair(gH[0, "left"], gF[1, "add"])
            + pe.pair(lam @ gF[2, "right"] @ np.linalg.inv(lam), gH[2, "left"]))


def _decoupled_tangent(gH, pt):
    lam = pt[2]
    return {(0, "left"): gH[1, "add"],
            (1, "add"): -gH[0, "left"],
            (2, "right"): lc.pi_Bplus(np.linalg.solve(lam, gH[2, "left"] @ lam))}


pe.register_bracket(pe.BracketSpec("slice", "slice", _slice_form, _slice_tangent))
pe.register_bracket(pe.BracketSpec("fslice", "fslice", _fslice_form, _fslice_tangent))
pe.register_bracket(pe.BracketSpec("decoupled", "decoupled", _decoupled_form, _decoupled_tangent))


def reduced_bracket_slice(F: pe.Observable, H: pe.Observable, point, strategy=None) -> float:
    """Reduced bracket of invariant functions restricted to the slice ``(Q, L)``.

    ``<D1F, D2H> - <D1H, D2F> + <R(Q)(D2H)_G, (D2F)_B> - <(D2H)_B, R(Q)(D2F)_G>``
    with ``D1`` in B0 taken along ``e^{tY0} Q`` and ``D2`` the derivative on
    the positive matrices.
    """
    return pe.poisson_bracket("slice", F, H, point, strategy)


def reduced_bracket_borel(f: pe.Observable, h: pe.Observable, point, strategy=None) -> float:
    """The same bracket written on ``(Q, b)`` with ``L = b b^dagger``."""
    return pe.poisson_bracket("fslice", f, h, point, strategy)


def decoupled_bracket(F: pe.Observable, H: pe.Observable, point, strategy=None) -> float:
    """Bracket of torus-invariant functions of ``(Q, p, lambda)``.

    ``<D_Q F, d_p H> - <D_Q H, d_p F> + <lambda D'_lambda F lambda^-1, D_lambda H>``
    """
    return pe.poisson_bracket("decoupled", F, H, point, strategy)


def slice_to_borel_observable(F: pe.Observable) -> pe.Observable:
    """``(Q, b) -> F(Q, b b^dagger)``."""
    if F.manifold != "slice":
        raise InvalidArgumentError("expected a slice observable")
    return pe.Observable("fslice", lambda p: F.func((p[0], fz.nu(p[1]))), h=F.h,
                         name=f"m2*[{F.name}]")


def decoupled_to_borel_observable(F: pe.Observable) -> pe.Observable:
    """``(Q, b) -> F(zeta(Q, b))``."""
    if F.manifold != "decoupled":
        raise InvalidArgumentError("expected a decoupled observable")
    return pe.Observable("fslice", lambda p: F.func(zeta_forward(p)), h=F.h,
                         name=f"zeta*[{F.name}]")


def invariant_extension(F: pe.Observable, delta: float = DEFAULT_GAP) -> pe.Observable:
    """Extend a Weyl-invariant slice observable to a conjugation-invariant one on ``G x P``.

    At ``(g, L)`` with ``g = U Q U^dagger`` the value is ``F(Q, U^dagger L U)``.
    Well defined whenever ``F`` is invariant under the normalizer of the torus.
    """
    if F.manifold != "slice":
        raise InvalidArgumentError("expected a slice observable")

    def value(p):
        g, L = p
        T, U = sla.schur(lc.as_matrix(g), output="complex")
        Q = np.diag(np.diag(T))
        if not fz.regularity(Q, "torus", delta).regular:
            raise SingularityError("g is not regular")
        return F.func((Q, lc.dagger(U) @ L @ U))

    return pe.Observable("bM", value, h=F.h, name=f"ext[{F.name}]")


# --------------------------------------------------------------------------
# reduced dynamics
# --------------------------------------------------------------------------

def reduced_vf(phi: InvariantObservable, point, delta: float = DEFAULT_GAP) -> tuple[np.ndarray, np.ndarray]:
    """``(Dphi(L)_0 Q, [R(Q) Dphi(L), L])``."""
    Q, L = (lc.as_matrix(x) for x in point)
    R = DynamicalR.at(Q, delta)
    D = phi.derivative(L)
    RD = R(D)
    return lc.pi_G0(D) @ Q, RD @ L - L @ RD


@dataclass
class Trajectory:
    """Slice trajectory; ``breakpoint`` is the first time regularity failed."""

    t: np.ndarray
    Q: np.ndarray
    L: np.ndarray
    eta1: np.ndarray
    breakpoint: float | None = None

    @property
    def complete(self) -> bool:
        return self.breakpoint is None


def _match_columns(U_prev: np.ndarray, U_new: np.ndarray, w_new: np.ndarray):
    """Reorder and rephase eigenvectors by maximal overlap (parallel transport)."""
    overlap = lc.dagger(U_prev) @ U_new
    order = np.argmax(np.abs(overlap), axis=1)
    if len(set(order.tolist())) != order.size:
        return None
    U = U_new[:, order]
    w = w_new[order]
    ov = overlap[np.arange(order.size), order]
    U = U * (np.conj(ov) / np.abs(ov))
    return U, w, float(np.abs(ov).min())


def _chain(U: np.ndarray, nodes: list):
    """Continue ``U`` through a list of Schur factorizations; ``None`` if a match fails."""
    path = []
    w = None
    for T, Uk in nodes:
        res = _match_columns(U, Uk, np.diag(T))
        if res is None:
            return None
        U, w, _ = res
        path.append(U)
    return U, w, path


def _diag_generator(U: np.ndarray, D0: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ik,kj->j", np.conj(U), D0, U).imag


def quadrature_integrate(phi: InvariantObservable, point, t_grid, eta0: bool = False,
                         max_step: float = 1e-2, min_step: float = 1e-9, delta: float = DEFAULT_GAP,
                         overlap_floor: float = 0.8, eta0_substeps: int = 16) -> Trajectory:
    """Integral curve of :func:`reduced_vf` by diagonalizing the unreduced flow.

    For each time ``M(t) = exp(t Dphi(L0)) Q0`` is unitarily diagonalized
    as ``eta1 M eta1^-1 = Q(t)``.  Eigenvectors are continued from the
    previous step by maximal overlap and rephased so the overlaps are real
    positive, which makes ``eta1`` smooth with ``eta1(0) = I``.  Then
    ``L1(t) = eta1 L0 eta1^-1``.  With ``eta0`` the diagonal correction
    ``exp(-int (eta1' eta1^-1 + 1/2 Dphi(L1))_0)`` conjugates ``L1``; the
    ``Dphi`` part uses the composite Simpson rule on ``eta0_substeps`` nodes
    per internal step.  The ``eta1`` part vanishes for continuous parallel
    transport; the eigenvectors are rephased through the same nodes and the
    leftover phase error is removed by comparison with the transport through
    every second node.

    The step between grid points is at most ``max_step`` and is halved when
    an overlap falls below ``overlap_floor``.  If ``Q(t)`` loses regularity
    the trajectory stops and ``breakpoint`` records the time.
    """
    Q0, L0 = (lc.as_matrix(x) for x in point)
    torus_entries(Q0, delta)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] != 0 or np.any(np.diff(t_grid) <= 0):
        raise InvalidArgumentError("t_grid must start at 0 and increase strictly")
    D0 = phi.derivative(L0)
    ev, V = np.linalg.eigh(1j * D0)  # D0 is skew-Hermitian
    Vh = lc.dagger(V)

    def M(t):
        return (V * np.exp(-1j * t * ev)) @ Vh @ Q0

    n = Q0.shape[0]
    U = np.eye(n, dtype=np.complex128)
    w = np.diag(Q0).copy()
    t_cur = 0.0
    gen_prev = _diag_generator(U, D0)
    log_eta0 = np.zeros(n)
    Qs, Ls, etas = [], [], []
    breakpoint = None

    def record():
        eta1 = lc.dagger(U)
        L1 = eta1 @ L0 @ U
        if eta0:
            e = np.exp(1j * log_eta0)
            L1 = (e[:, None] * L1) * np.conj(e)[None, :]
        Qs.append(np.diag(w))
        Ls.append(L1)
        etas.append(eta1)

    record()
    for t_next in t_grid[1:]:
        while t_cur < t_next and breakpoint is None:
            h = min(max_step, t_next - t_cur)
            while True:
                T, Un = sla.schur(M(t_cur + h), output="complex")
                res = _match_columns(U, Un, np.diag(T))
                if res is not None and res[2] >= overlap_floor:
                    break
                h *= 0.5
                if h < min_step:
                    breakpoint = t_cur
                    break
            if breakpoint is not None:
                break
            Un, wn, _ = res
            if not fz.regularity(np.diag(wn), "torus", delta).regular:
                breakpoint = t_cur + h
                break
            if eta0:
                # Dphi(L1)_0 = diag(eta1 Dphi(L0) eta1^-1), independent of eigenvector phases.
                # Discrete rephasing leaves a phase error of order (h/m)^2 against continuous
                # parallel transport; chaining through every node and through every second
                # node gives two such errors in ratio 1:4, and their difference removes it.
                m = eta0_substeps + (eta0_substeps % 2)
                nodes = [sla.schur(M(t_cur + h * k / m), output="complex") for k in range(1, m + 1)]
                fine = _chain(U, nodes)
                coarse = _chain(U, nodes[1::2])
                if fine is not None and coarse is not None \
                        and np.array_equal(np.sort_complex(fine[1]), np.sort_complex(wn)):
                    Uf, wf, gens_U = fine
                    Uc, wc, _ = coarse
                    if np.array_equal(wc, wf):
                        D = np.angle(np.einsum("ij,ij->j", np.conj(Uc), Uf))
                        Uf = Uf * np.exp(1j * D / 3)
                    Un, wn = Uf, wf
                    g = np.array([gen_prev] + [_diag_generator(V, D0) for V in gens_U])
                    # composite Simpson rule over the m + 1 nodes
                    wts = np.ones(m + 1)
                    wts[1:-1:2], wts[2:-1:2] = 4.0, 2.0
                    log_eta0 -= 0.5 * (h / (3 * m)) * (wts @ g)
                else:
                    g_new = _diag_generator(Un, D0)
                    log_eta0 -= 0.25 * h * (gen_prev + g_new)
                gen_prev = _diag_generator(Un, D0)
            U, w, t_cur = Un, wn, t_cur + h
        if breakpoint is not None:
            break
        record()
    k = len(Qs)
    if breakpoint is not None:
        warnings.warn(f"trajectory lost regularity at t={breakpoint:.6g}", ConditioningWarning, stacklevel=2)
    return Trajectory(t_grid[:k].copy(), np.array(Qs), np.array(Ls), np.array(etas), breakpoint)


def spectral_drift(traj: Trajectory, kmax: int | None = None) -> float:
    """Largest change of ``tr L^k`` along a trajectory, ``k = 1..kmax``."""
    n = traj.L.shape[-1]
    kmax = kmax or n - 1
    ref = [np.trace(np.linalg.matrix_power(traj.L[0], k)).real for k in range(1, kmax + 1)]
    worst = 0.0
    for L in traj.L:
        for k in range(1, kmax + 1):
            worst = max(worst, abs(np.trace(np.linalg.matrix_power(L, k)).real - ref[k - 1]))
    return worst


# --------------------------------------------------------------------------
# decoupled variables
# --------------------------------------------------------------------------

def zeta_forward(point, delta: float = DEFAULT_GAP) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(Q, e^p b_+) -> (Q, p, b_+^-1 Q^-1 b_+ Q)``."""
    Q, b = (lc.as_matrix(x) for x in point)
    qd = torus_entries(Q, delta)
    p, bplus = fz.split_borel(b)
    lam = np.linalg.solve(bplus, np.conj(qd)[:, None] * bplus * qd[None, :])
    lam = np.triu(lam)
    lam[np.diag_indices_from(lam)] = 1.0
    return Q, p, lam


def zeta_inverse(point, delta: float = DEFAULT_GAP) -> tuple[np.ndarray, np.ndarray]:
    """Exact inverse of :func:`zeta_forward`.

    ``b_+ lambda = Q^-1 b_+ Q`` is linear in the entries of the unipotent
    ``b_+`` and is solved diagonal by diagonal:
    ``(b_+)_jk (conj(Q_j) Q_k - 1) = sum_{j <= m < k} (b_+)_jm lambda_mk``.
    """
    Q, p, lam = (lc.as_matrix(x) for x in point)
    qd = torus_entries(Q, delta)
    if np.abs(np.tril(lam, -1)).max(initial=0) > 1e-12 or np.abs(np.diag(lam) - 1).max() > 1e-12:
        raise InvalidArgumentError("lambda must be unipotent upper triangular")
    bplus = kernels.zeta_solve(qd, np.ascontiguousarray(lam))
    return Q, fz.join_borel(p, bplus)


def zeta_residual(point, b_plus: np.ndarray) -> float:
    """``|b_+ lambda - Q^-1 b_+ Q|`` for a candidate ``b_+``."""
    Q, _p, lam = point
    qd = np.diag(Q)
    return float(np.abs(b_plus @ lam - np.conj(qd)[:, None] * b_plus * qd[None, :]).max())


def zeta_leading_order(Q, sigma) -> np.ndarray:
    """First-order ``b_+ = I + beta`` with ``beta_jk = sigma_jk / (conj(Q_j) Q_k - 1)``."""
    qd = torus_entries(Q)
    denom = np.conj(qd)[:, None] * qd[None, :] - 1.0
    beta = np.zeros_like(np.asarray(sigma, dtype=np.complex128))
    iu = np.triu_indices(qd.size, 1)
    beta[iu] = np.asarray(sigma)[iu] / denom[iu]
    return np.eye(qd.size) + beta


# --------------------------------------------------------------------------
# Weyl group
# --------------------------------------------------------------------------

def permutation_matrix(perm) -> np.ndarray:
    """Element of SU(n) mapping ``e_k`` to ``e_perm[k]`` (a phase fixes the determinant)."""
    perm = np.asarray(perm)
    n = perm.size
    if sorted(perm.tolist()) != list(range(n)):
        raise InvalidArgumentError("not a permutation")
    P = np.zeros((n, n), dtype=np.complex128)
    P[perm, np.arange(n)] = 1.0
    if np.linalg.det(P).real < 0:
        P *= np.exp(1j * np.pi / n)
    return P


def weyl_act(perm, point):
    """Residual gauge action of a permutation.

    Slice points ``(Q, L)`` are conjugated componentwise, Borel slice points
    ``(Q, b)`` become ``(P Q P^-1, Dress_P(b))`` and decoupled points are
    moved through ``zeta``.
    """
    P = permutation_matrix(perm)
    Pi = lc.dagger(P)
    if len(point) == 3:
        Q, b = zeta_inverse(point)
        return zeta_forward((P @ Q @ Pi, fz.dress(P, b)))
    Q, V = (lc.as_matrix(x) for x in point)
    if np.allclose(V, lc.dagger(V)):
        return P @ Q @ Pi, P @ V @ Pi
    return P @ Q @ Pi, fz.dress(P, V)


def alcove_normalize(point):
    """Sort the phases of ``Q`` increasingly in ``(-pi, pi]``.

    Returns ``(point, perm, tie)`` where ``perm`` is the permutation applied
    and ``tie`` flags equal phases (broken by index order).
    """
    Q = lc.as_matrix(point[0])
    ph = np.angle(np.diag(Q))
    ph[ph <= -np.pi] += 2 * np.pi
    order = np.argsort(ph, kind="stable")
    tie = bool(np.any(np.diff(ph[order]) == 0))
    perm = np.empty_like(order)
    perm[order] = np.arange(order.size)
    return weyl_act(perm, point), perm, tie
