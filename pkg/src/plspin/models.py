"""Physical Hamiltonians: spin Sutherland, spin Ruijsenaars-Schneider type, their
scaling relation, and the trigonometric Ruijsenaars-Schneider specialization.

Normalizations follow the trace form: for the defining representation
``c_rho = 1`` and ``dim_rho = n``, and every root has squared length 2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from . import lie_core as lc
from . import poisson_engine as pe
from . import reduction as rd
from .errors import DomainError, InvalidArgumentError, SingularityError


# --------------------------------------------------------------------------
# points and contexts
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SutherlandPoint:
    """``(q, p, X)``: angles and momenta (traceless real vectors), spin ``X`` in B+."""

    q: np.ndarray
    p: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        p = np.asarray(self.p, dtype=float).ravel()
        X = np.asarray(self.X, dtype=np.complex128)
        n = q.size
        if p.size != n or X.shape != (n, n):
            raise InvalidArgumentError("inconsistent dimensions in SutherlandPoint")
        if np.abs(np.tril(X)).max(initial=0) > 0:
            raise InvalidArgumentError("spin X must be strictly upper triangular")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def Q(self) -> np.ndarray:
        return np.diag(np.exp(1j * self.q))

    def linear_point(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(Q, p, X)`` as matrices, a point of the linear decoupled space."""
        return self.Q, np.diag(self.p).astype(np.complex128), self.X


@dataclass(frozen=True)
class RepresentationContext:
    """Representation used for the character Hamiltonian; only the defining one is built in."""

    n: int
    tag: str = "defining"
    c_rho: float = 1.0

    def __post_init__(self):
        if self.tag != "defining":
            raise InvalidArgumentError(f"representation {self.tag!r} is not available")

    @property
    def dim(self) -> int:
        return self.n

    def trace(self, A: np.ndarray) -> float:
        return float(self.c_rho * np.trace(A).real)


@dataclass(frozen=True)
class RSContext:
    """Coupling ``x`` of the trigonometric Ruijsenaars-Schneider model."""

    n: int
    x: float
    _nu: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgumentError("n must be at least 2")
        if not np.isfinite(self.x) or self.x == 0:
            raise InvalidArgumentError("coupling x must be a nonzero real number")
        j = np.arange(self.n)
        d = j[None, :] - j[:, None]
        nu = np.where(d > 0, (1 - np.exp(-self.x)) * np.exp(0.5 * d * self.x), 0.0)
        nu = (nu + np.eye(self.n)).astype(np.complex128)
        nu.setflags(write=False)
        object.__setattr__(self, "_nu", nu)


# --------------------------------------------------------------------------
# spin Sutherland and its scaling limit
# --------------------------------------------------------------------------

def _check_sin(q: np.ndarray, half: bool = True) -> None:
    d = q[:, None] - q[None, :]
    s = np.sin(0.5 * d if half else d)
    s[np.diag_indices_from(s)] = 1.0
    if np.abs(s).min() < 1e-12:
        raise SingularityError("coinciding angles: the potential is singular")


def spin_sutherland_H(pt: SutherlandPoint) -> float:
    """``1/2 tr p^2 + 1/16 sum_{j<k} |X_jk|^2 / sin^2((q_j - q_k)/2)``.

    This is ``1/2 <p, p> + 1/8 sum_alpha |X_alpha|^2 / (|alpha|^2 sin^2(alpha(q)/2))``
    with ``|alpha|^2 = 2``.
    """
    _check_sin(pt.q)
    return 0.5 * float(pt.p @ pt.p) + kernels.sutherland_potential(pt.q, pt.X)


def spin_RS_H(ctx: RepresentationContext, Q, p, sigma) -> float:
    """``tr_rho(e^p b_+ b_+^dagger e^p)`` where ``b_+^-1 Q^-1 b_+ Q = exp(sigma)``."""
    lam = lc.exp_nilpotent(lc.as_matrix(sigma))
    _Q, b = rd.zeta_inverse((Q, p, lam))
    return ctx.trace(b @ lc.dagger(b))


def mu_eps(point, eps: float):
    """``(Q, p, X) -> (Q, eps p, exp(eps X))``."""
    Q, p, X = point
    return Q, eps * lc.as_matrix(p), lc.exp_nilpotent(eps * lc.as_matrix(X))


@dataclass
class ScalingTable:
    """Convergence table for ``A(eps) -> target``.

    ``ratio[i] = error[i-1] / error[i]`` when ``eps[i-1] = 2 eps[i]`` and both
    errors sit above the roundoff floor; ``extrapolated`` is the first-order
    Richardson value ``2 A(eps) - A(2 eps)``.
    """

    eps: np.ndarray
    value: np.ndarray
    target: float
    error: np.ndarray
    ratio: np.ndarray
    extrapolated: np.ndarray
    floor: float
    ratio_window: tuple[float, float] = (1.6, 2.4)

    @property
    def exact(self) -> bool:
        """Every error is at the roundoff floor (the limit is attained at each eps)."""
        return bool(np.all(self.error <= self.floor))

    @property
    def ratios_ok(self) -> bool:
        """First-order rule: every available ratio lies in ``ratio_window``."""
        r = self.ratio[np.isfinite(self.ratio)]
        lo, hi = self.ratio_window
        return bool(r.size > 0 and np.all((r >= lo) & (r <= hi)))

    @property
    def status(self) -> str:
        if self.exact:
            return "EXACT"
        return "PASS" if self.ratios_ok else "FAIL"

    @property
    def passed(self) -> bool:
        return self.status in ("PASS", "EXACT")

    def observed_order(self) -> float:
        """``log2`` of the median available ratio, ``nan`` when none."""
        r = self.ratio[np.isfinite(self.ratio)]
        return float(np.log2(np.median(r))) if r.size else float("nan")

    def limit_error(self) -> float:
        return float(abs(self.extrapolated[-1] - self.target))

    def rows(self) -> list[dict]:
        return [dict(eps=float(e), value=float(v), target=self.target, error=float(er), ratio=float(r),
                     extrapolated=float(x))
                for e, v, er, r, x in zip(self.eps, self.value, self.error, self.ratio, self.extrapolated)]


def halving_sequence(start: float = 1e-1, stop: float = 1e-3) -> np.ndarray:
    """``start, start/2, ...`` down to the first value not above ``stop``."""
    if not (start > 0 and stop > 0 and stop <= start):
        raise InvalidArgumentError("need 0 < stop <= start")
    out = [start]
    while out[-1] > stop * (1 + 1e-12):
        out.append(out[-1] / 2)
    return np.array(out)


def _table(eps_list, func, target, floor_rel: float = 1e-11) -> ScalingTable:
    eps = np.asarray(eps_list, dtype=float)
    if eps.ndim != 1 or eps.size == 0 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise InvalidArgumentError("eps list must be positive and strictly decreasing")
    vals = np.array([func(e) for e in eps])
    doubled = np.array([func(2 * e) for e in eps])
    err = np.abs(vals - target)
    floor = floor_rel * max(1.0, abs(target))
    ratio = np.full(eps.size, np.nan)
    for i in range(1, eps.size):
        if np.isclose(eps[i - 1], 2 * eps[i], rtol=1e-9) and err[i] > floor and err[i - 1] > floor:
            ratio[i] = err[i - 1] / err[i]
    return ScalingTable(eps, vals, float(target), err, ratio, 2 * vals - doubled, floor)


def scaled_hamiltonian(pt: SutherlandPoint, eps: float, ctx: RepresentationContext | None = None) -> float:
    """``(H^rho(mu_eps(pt)) - c_rho dim_rho) / (4 eps^2)``."""
    ctx = ctx or RepresentationContext(pt.n)
    Q, p, X = pt.linear_point()
    return (spin_RS_H(ctx, Q, eps * p, eps * X) - ctx.c_rho * ctx.dim) / (4 * eps * eps)


def scaling_H_limit(pt: SutherlandPoint, eps_list) -> ScalingTable:
    """Convergence of the rescaled character Hamiltonian to :func:`spin_sutherland_H`."""
    return _table(eps_list, lambda e: scaled_hamiltonian(pt, e), spin_sutherland_H(pt))


# --------------------------------------------------------------------------
# linear bracket and the scaled decoupled bracket
# --------------------------------------------------------------------------

def _linear_form(gF, gH, pt):
    X = pt[2]
    dF, dH = gF[2, "add"], gH[2, "add"]
    return (pe.pair(gF[0, "left"], gH[1, "add"]) - pe.pair(gH[0, "left"], gF[1, "add"])
            + pe.pair(X, dF @ dH - dH @ dF))


def _linear_tangent(gH, pt):
    X = pt[2]
    dH = gH[2, "add"]
    return {(0, "left"): gH[1, "add"], (1, "add"): -gH[0, "left"],
            (2, "add"): lc.pi_Bplus(dH @ X - X @ dH)}


pe.register_bracket(pe.BracketSpec("linear", "linear", _linear_form, _linear_tangent))


def linear_bracket(f: pe.Observable, h: pe.Observable, point, strategy=None) -> float:
    """``<D_Q f, d_p h> - <D_Q h, d_p f> + <X, [d_X f, d_X h]>``."""
    return pe.poisson_bracket("linear", f, h, point, strategy)


def dlog_unipotent(lam: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Derivative of ``log`` at the unipotent ``lam`` in direction ``Y``.

    Upper-right block of ``log [[lam, Y], [0, lam]]``, exact since the block
    matrix is unipotent.
    """
    n = lam.shape[0]
    big = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    big[:n, :n] = lam
    big[n:, n:] = lam
    big[:n, n:] = Y
    return lc.log_unipotent(big)[:n, n:]


def pushforward_gradient(g: pe.GradientBundle, point, eps: float) -> pe.GradientBundle:
    """Gradients of ``f o mu_eps^-1`` at ``mu_eps(point)`` from those of ``f`` at ``point``.

    With ``F(Q, p, lam) = f(Q, p/eps, log(lam)/eps)`` the chain rule gives
    ``d_p F = d_p f / eps`` and ``<Z, D_lam F> = <dlog_lam(Z lam), d_X f> / eps``
    (``lam Z`` for the right derivative), evaluated exactly.
    """
    Q, p, X = point
    n = Q.shape[0]
    lam = lc.exp_nilpotent(eps * lc.as_matrix(X))
    basis = lc.space_basis(n, "Bplus")
    dual = lc.space_dual_basis(n, "Bplus")
    dX = g[2, "add"]
    left = np.array([pe.pair(dlog_unipotent(lam, E @ lam), dX) for E in basis]) / eps
    right = np.array([pe.pair(dlog_unipotent(lam, lam @ E), dX) for E in basis]) / eps
    return pe.GradientBundle("decoupled", n, {
        (0, "left"): g[0, "left"],
        (1, "add"): g[1, "add"] / eps,
        (2, "left"): np.tensordot(left, dual, axes=1),
        (2, "right"): np.tensordot(right, dual, axes=1),
    })


def scaled_decoupled_bracket(f: pe.Observable, h: pe.Observable, point, eps: float) -> float:
    """``eps {f o mu_eps^-1, h o mu_eps^-1}_decoupled (mu_eps(point))`` by the exact chain rule."""
    spec = pe.BRACKETS["decoupled"]
    gf = pushforward_gradient(pe.gradients(f, point), point, eps)
    gh = pushforward_gradient(pe.gradients(h, point), point, eps)
    return eps * spec.form(gf, gh, mu_eps(point, eps))


def scaled_decoupled_bracket_fd(f: pe.Observable, h: pe.Observable, point, eps: float) -> float:
    """The same quantity with finite differences taken on the decoupled space.

    Only reliable for moderate ``eps``: derivatives of ``f o mu_eps^-1``
    grow like ``eps^-k``.
    """
    def pull(obs):
        return pe.Observable("decoupled",
                             lambda d: obs.func((d[0], d[1] / eps, lc.log_unipotent(d[2]) / eps)),
                             name=f"{obs.name} o mu^-1")

    return eps * rd.decoupled_bracket(pull(f), pull(h), mu_eps(point, eps))


def scaling_bracket_limit(f: pe.Observable, h: pe.Observable, point, eps_list) -> ScalingTable:
    """Convergence of the rescaled decoupled bracket to :func:`linear_bracket`."""
    return _table(eps_list, lambda e: scaled_decoupled_bracket(f, h, point, e), linear_bracket(f, h, point))


# --------------------------------------------------------------------------
# trigonometric Ruijsenaars-Schneider specialization
# --------------------------------------------------------------------------

def rs_nu(ctx: RSContext) -> np.ndarray:
    """Unipotent ``nu(x)`` with ``nu_jk = (1 - e^-x) e^{(k-j) x / 2}`` for ``j < k``."""
    return ctx._nu.copy()


def rs_delta(ctx: RSContext) -> np.ndarray:
    """``exp(diag((n-1) x/2, -x/2, ..., -x/2))``."""
    d = np.full(ctx.n, -0.5 * ctx.x)
    d[0] = 0.5 * (ctx.n - 1) * ctx.x
    return np.diag(np.exp(d)).astype(np.complex128)


def _rs_angles(q, n: int | None = None) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim == 2:
        q = np.diag(q).real
    if n is not None and q.size != n:
        raise InvalidArgumentError("dimension mismatch")
    if abs(q.sum()) > 1e-10 * max(1.0, np.abs(q).max()):
        raise InvalidArgumentError("q must be traceless")
    _check_sin(q, half=False)
    return q


def rs_bplus(Q, ctx: RSContext) -> np.ndarray:
    """Unipotent ``b_+`` solving ``b_+^-1 Q^-1 b_+ Q = nu(x)^-1`` in closed form."""
    qd = rd.torus_entries(Q)
    if qd.size != ctx.n:
        raise InvalidArgumentError("dimension mismatch")
    return kernels.rs_bplus(qd, float(ctx.x))


def rs_theta(q, p, ctx: RSContext) -> np.ndarray:
    """Canonical momenta ``theta`` from ``(q, p)``."""
    q = _rs_angles(q, ctx.n)
    return kernels.rs_theta(q, np.asarray(p, dtype=float), float(ctx.x))


def rs_momenta(q, theta, ctx: RSContext) -> np.ndarray:
    """Inverse of :func:`rs_theta` (affine in ``p``)."""
    q = _rs_angles(q, ctx.n)
    return kernels.rs_momenta(q, np.asarray(theta, dtype=float), float(ctx.x))


def rs_hamiltonian(q, theta, ctx: RSContext, sign: int = +1) -> float:
    """``H_+`` (``sign=+1``) or ``H_-`` (``sign=-1``) of the trigonometric RS model."""
    q = _rs_angles(q, ctx.n)
    hp, hm = kernels.rs_hamiltonians(q, np.asarray(theta, dtype=float), float(ctx.x))
    if sign == +1:
        return hp
    if sign == -1:
        return hm
    raise InvalidArgumentError("sign must be +1 or -1")


def rs_main_hamiltonian(q, theta, ctx: RSContext) -> float:
    return 0.5 * (rs_hamiltonian(q, theta, ctx, +1) + rs_hamiltonian(q, theta, ctx, -1))


def rs_variables(q, theta, ctx: RSContext) -> dict:
    """Translate RS data ``(q, theta)`` into slice variables.

    All sign and scale conventions live here: ``Q = exp(2 i q)``, ``p`` from
    the inverse canonical transformation, ``b_+`` from the closed form,
    ``b = e^p b_+``, ``lambda = nu(x)^-1`` and ``K = Q^-1 b^-1``.
    """
    q = _rs_angles(q, ctx.n)
    Q = np.diag(np.exp(2j * q))
    p = rs_momenta(q, theta, ctx)
    bplus = rs_bplus(Q, ctx)
    b = np.exp(p)[:, None] * bplus
    return {"q": q, "theta": np.asarray(theta, dtype=float), "Q": Q, "p": np.diag(p).astype(np.complex128),
            "b_plus": bplus, "b": b, "lambda": np.linalg.inv(rs_nu(ctx)),
            "K": np.conj(np.diag(Q))[:, None] * np.linalg.inv(b)}


def rs_crosscheck(q, theta, ctx: RSContext) -> dict:
    """Compare the reduction with the closed-form Hamiltonians.

    Returns relative residuals of ``tr(b b^dagger) = H_+`` and
    ``tr((b b^dagger)^-1) = H_-``, and the absolute constraint residual
    ``|b_+^-1 Q^-1 b_+ Q - nu(x)^-1|``.
    """
    v = rs_variables(q, theta, ctx)
    L = v["b"] @ lc.dagger(v["b"])
    hp = rs_hamiltonian(v["q"], v["theta"], ctx, +1)
    hm = rs_hamiltonian(v["q"], v["theta"], ctx, -1)
    Qd = np.diag(v["Q"])
    bp = v["b_plus"]
    lam = np.linalg.solve(bp, np.conj(Qd)[:, None] * bp * Qd[None, :])
    try:
        Linv = np.linalg.inv(L)
    except np.linalg.LinAlgError as exc:
        raise DomainError("singular b b^dagger") from exc
    return {
        "H_plus": hp,
        "H_minus": hm,
        "residual_plus": abs(np.trace(L).real - hp) / abs(hp),
        "residual_minus": abs(np.trace(Linv).real - hm) / abs(hm),
        "constraint": float(np.abs(lam - v["lambda"]).max()),
    }
