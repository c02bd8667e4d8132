"""Seeded random samplers for algebra and group elements.

Every sweep draws sample ``i`` from ``rng_for(seed, i)``, a Philox stream
keyed by ``(seed, i)``, so results do not depend on evaluation order.
"""
from __future__ import annotations

import numpy as np

from . import lie_core as lc


def rng_for(seed: int, index: int = 0, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), int(stream), int(index)])
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_algebra(rng, n: int, space: str = "full", scale: float = 1.0) -> np.ndarray:
    basis = lc.space_basis(n, space)
    coeff = rng.standard_normal(basis.shape[0]) * scale / np.sqrt(max(1, n))
    return np.tensordot(coeff, basis, axes=1)


def random_sl(rng, n: int, scale: float = 0.5) -> np.ndarray:
    """Element of SL(n,C) as the exponential of a random algebra element."""
    return lc.exp_algebra(random_algebra(rng, n, "full", scale))


def random_su(rng, n: int) -> np.ndarray:
    """Haar-distributed element of SU(n)."""
    Z = complex_normal(rng, (n, n))
    q, r = np.linalg.qr(Z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    det = np.linalg.det(q)
    return q / det ** (1.0 / n)


def random_borel(rng, n: int, scale: float = 0.5) -> np.ndarray:
    """Element of B: positive real diagonal, det 1, upper triangular."""
    p = rng.standard_normal(n) * scale
    p -= p.mean()
    b = np.diag(np.exp(p)).astype(np.complex128)
    b += np.triu(complex_normal(rng, (n, n)) * scale, 1)
    return b


def random_unipotent(rng, n: int, scale: float = 0.5) -> np.ndarray:
    return np.eye(n, dtype=np.complex128) + np.triu(complex_normal(rng, (n, n)) * scale, 1)


def random_positive(rng, n: int, scale: float = 0.5) -> np.ndarray:
    """Positive definite Hermitian matrix of determinant 1."""
    b = random_borel(rng, n, scale)
    return b @ lc.dagger(b)


def random_traceless_real(rng, n: int, scale: float = 1.0) -> np.ndarray:
    v = rng.standard_normal(n) * scale
    return v - v.mean()


def random_regular_phases(rng, n: int, min_gap: float = 0.3) -> np.ndarray:
    """Traceless real vector ``q`` whose entries ``exp(i q_j)`` are well separated.

    The phases are spread around the circle with jitter; ``min_gap`` bounds
    the pairwise chordal distance of ``exp(i q_j)`` from below.
    """
    while True:
        base = np.sort(rng.uniform(-np.pi, np.pi, n))
        q = base - base.mean()
        Q = np.exp(1j * q)
        d = np.abs(Q[:, None] - Q[None, :]) + np.eye(n) * 10
        if d.min() > min_gap:
            return rng.permutation(q)


def random_regular_torus(rng, n: int, min_gap: float = 0.3) -> np.ndarray:
    """Regular diagonal element of SU(n) as a diagonal matrix."""
    return np.diag(np.exp(1j * random_regular_phases(rng, n, min_gap)))
