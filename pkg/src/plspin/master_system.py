"""The degenerate integrable master system on ``G x P``.

Hamiltonians are conjugation-invariant functions of ``L`` pulled back to
``(g, L)``.  Their flows are explicit, ``Psi(g, L) = (g^-1 L g, L)`` collects
the constants of motion, and :func:`rank_evidence` measures the two ranks
that make the system degenerately integrable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import factorize as fz
from . import lie_core as lc
from . import poisson_engine as pe
from .errors import InvalidArgumentError

RANK_RTOL = 1e-8


@dataclass(frozen=True)
class InvariantObservable:
    """A conjugation-invariant function on the positive Hermitian matrices.

    Either ``power=k`` for ``tr L^k``, or ``symbol=u`` with derivative
    ``dsymbol`` for ``sum_j u(log lambda_j)``.
    """

    power: int | None = None
    symbol: Callable | None = None
    dsymbol: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if (self.power is None) == (self.symbol is None):
            raise InvalidArgumentError("give exactly one of power or symbol")
        if self.symbol is not None and self.dsymbol is None:
            raise InvalidArgumentError("spectral symbol needs its derivative")

    @property
    def label(self) -> str:
        return self.name or (f"tr L^{self.power}" if self.power is not None else "spectral")

    def value(self, L) -> float:
        L = lc.as_matrix(L)
        if self.power is not None:
            return float(np.trace(np.linalg.matrix_power(L, self.power)).real)
        ev = np.linalg.eigvalsh(L)
        return float(np.sum(self.symbol(np.log(ev))))

    def derivative(self, L) -> np.ndarray:
        """The sl(n,C)-valued derivative; it lies in su(n) and commutes with ``L``."""
        L = lc.as_matrix(L)
        if self.power is not None:
            k = self.power
            return 2j * k * lc.traceless(np.linalg.matrix_power(L, k))
        ev, V = np.linalg.eigh(L)
        gamma = 2 * (V * self.dsymbol(np.log(ev))) @ lc.dagger(V)
        return lc.traceless(1j * gamma)

    def on_P(self) -> pe.Observable:
        return pe.Observable("P", self.value,
                             lambda L: pe.GradientBundle("P", L.shape[0], {(0, "sym"): self.derivative(L)}),
                             name=self.label)

    def on_master(self) -> pe.Observable:
        """Pullback along ``(g, L) -> L``."""
        return pe.lift(self.on_P(), "bM", 1)


def power_traces(n: int) -> list[InvariantObservable]:
    """``tr L^k`` for ``k = 1..n-1``."""
    return [InvariantObservable(power=k) for k in range(1, n)]


def free_flow(phi: InvariantObservable, point, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact integral curve ``(exp(t Dphi(L0)) g0, L0)``."""
    g0, L0 = (lc.as_matrix(x) for x in point)
    return sla.expm(t * phi.derivative(L0)) @ g0, L0


def psi(point) -> tuple[np.ndarray, np.ndarray]:
    """Constants of motion ``(g^-1 L g, L)``."""
    g, L = (lc.as_matrix(x) for x in point)
    return lc.dagger(g) @ L @ g, L


def casimir_difference(C: InvariantObservable, pair) -> float:
    """``C(L1) - C(L2)``; vanishes on the image of :func:`psi`."""
    L1, L2 = pair
    return C.value(L1) - C.value(L2)


def tangent_dimension(n: int) -> int:
    return 2 * (n * n - 1)


def hamiltonian_matrix(point, observables: list[InvariantObservable]) -> np.ndarray:
    """Rows are the Hamiltonian vector fields in the coordinates ``(Y, X)``.

    ``Y`` in su(n) is the right-trivialized velocity of ``g`` and ``X`` in B
    the generator of ``L -> e^X L e^{X^dagger}``.  Invariant Hamiltonians
    leave ``L`` fixed, so the ``X`` block is zero.
    """
    g, L = point
    n = L.shape[0]
    dim = n * n - 1
    rows = np.zeros((len(observables), 2 * dim))
    for i, phi in enumerate(observables):
        rows[i, :dim] = lc.coordinates(phi.derivative(L), "G")
    return rows


def psi_jacobian(point) -> np.ndarray:
    """Jacobian of the entries of :func:`psi` in the coordinates ``(Y, X)``.

    Rows: real and imaginary parts of every entry of both components.
    Columns: basis of su(n) acting by ``g -> e^{tY} g`` followed by the
    basis of B acting by ``L -> e^{tX} L e^{tX^dagger}``.
    """
    g, L = (lc.as_matrix(x) for x in point)
    n = L.shape[0]
    gi = lc.dagger(g)
    cols = []
    for Y in lc.space_basis(n, "G"):
        dLt = gi @ (L @ Y - Y @ L) @ g
        cols.append(np.concatenate([dLt.real.ravel(), dLt.imag.ravel(), np.zeros(2 * n * n)]))
    for X in lc.space_basis(n, "B"):
        dL = X @ L + L @ lc.dagger(X)
        dLt = gi @ dL @ g
        cols.append(np.concatenate([dLt.real.ravel(), dLt.imag.ravel(), dL.real.ravel(), dL.imag.ravel()]))
    return np.array(cols).T


def numerical_rank(A: np.ndarray, rtol: float = RANK_RTOL) -> tuple[int, np.ndarray]:
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, s
    return int(np.sum(s > rtol * s[0])), s


def rank_evidence(point, rtol: float = RANK_RTOL, delta: float = fz.DEFAULT_GAP) -> dict:
    """Ranks of the Hamiltonian family and of the constants of motion.

    Returns a report with ``rank_H``, ``rank_F_diff``, the expected values
    ``(n-1, 2(n^2-1) - (n-1))`` and ``status`` in ``PASS``, ``FAIL`` or
    ``INCONCLUSIVE`` (when ``L`` has a repeated eigenvalue).
    """
    g, L = (lc.as_matrix(x) for x in point)
    n = L.shape[0]
    r = n - 1
    expected = (r, tangent_dimension(n) - r)
    reg = fz.regularity(L, "hermitian", delta)
    report = {"n": n, "expected_rank_H": expected[0], "expected_rank_F_diff": expected[1],
              "regularity_margin": reg.margin}
    if not reg.regular:
        report.update(status="INCONCLUSIVE", rank_H=None, rank_F_diff=None)
        return report
    rank_H, sH = numerical_rank(hamiltonian_matrix((g, L), power_traces(n)), rtol)
    rank_F, sF = numerical_rank(psi_jacobian((g, L)), rtol)
    report.update(rank_H=rank_H, rank_F_diff=rank_F,
                  gap_H=_gap(sH, rank_H), gap_F=_gap(sF, rank_F),
                  status="PASS" if (rank_H, rank_F) == expected else "FAIL")
    return report


def _gap(s: np.ndarray, rank: int) -> float:
    """Ratio of the smallest kept to the largest dropped singular value."""
    if rank == 0 or rank >= s.size:
        return float("inf")
    return float(s[rank - 1] / max(s[rank], np.finfo(float).tiny))
