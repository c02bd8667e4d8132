"""Derivatives of functions on the model manifolds and their Poisson brackets.

Manifolds are products of components.  Each component kind fixes the curves
used to differentiate and the subspace in which the resulting derivative
lives (the pairing-dual of the direction space):

==========  ===================================  ===========  ==========
kind        curves                               directions   derivative
==========  ===================================  ===========  ==========
``SL``      ``e^{tX} K``, ``K e^{tX}``           sl(n,C)      sl(n,C)
``G``       ``e^{tY} g``, ``g e^{tY}``           G            B
``B``       ``e^{tX} b``, ``b e^{tX}``           B            G
``P``       ``e^{tX} L e^{tX^dagger}``           sl(n,C)      sl(n,C)
``T``       ``e^{tY0} Q``                        G0           B0
``p``       ``p + t X0``                         B0           G0
``N``       ``e^{tX} lam``, ``lam e^{tX}``       Bplus        Gperp
``X``       ``X + t Z``                          Bplus        Gperp
==========  ===================================  ===========  ==========

The derivative ``D`` along a family of curves is defined by
``<X, D F> = d/dt F(curve_X(t))``.  For the ``P`` kind, directions in ``B``
probe ``(DF)_G`` and directions in ``G`` probe ``(DF)_B``.

Derivatives are stored in a :class:`GradientBundle` keyed by
``(component, side)`` with ``side`` one of ``left``, ``right``, ``sym``,
``add``.  Every bracket is registered with two forms: the literal bracket
formula and its Hamiltonian tangent (the curve direction of ``V_H`` with
``{F, H} = V_H[F]``).  The tangent form is used for Hamiltonian vector
fields and for the Jacobi identity, where ``{A, {B, C}} = -V_A[{B, C}]``
needs a single directional derivative.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np
import scipy.linalg as sla

from . import factorize as fz
from . import lie_core as lc
from .errors import InvalidArgumentError
from .report import CheckResult, WorstCase

KINDS: dict[str, tuple[tuple[str, ...], str]] = {
    "SL": (("left", "right"), "full"),
    "G": (("left", "right"), "G"),
    "B": (("left", "right"), "B"),
    "P": (("sym",), "full"),
    "T": (("left",), "G0"),
    "p": (("add",), "B0"),
    "N": (("left", "right"), "Bplus"),
    "X": (("add",), "Bplus"),
}

MANIFOLDS: dict[str, tuple[str, ...]] = {
    "M": ("SL",),
    "G": ("G",),
    "B": ("B",),
    "P": ("P",),
    "fM": ("G", "B"),
    "bM": ("G", "P"),
    "BxB": ("B", "B"),
    "GxG": ("G", "G"),
    "PxP": ("P", "P"),
    "slice": ("T", "P"),
    "fslice": ("T", "B"),
    "decoupled": ("T", "p", "N"),
    "linear": ("T", "p", "X"),
}

FD_STEP = 1e-4


# --------------------------------------------------------------------------
# points and observables
# --------------------------------------------------------------------------

def as_point(manifold: str, point) -> tuple[np.ndarray, ...]:
    kinds = MANIFOLDS[manifold]
    if len(kinds) == 1:
        if isinstance(point, tuple) and len(point) == 1:
            point = point[0]
        return (lc.as_matrix(point),)
    if len(point) != len(kinds):
        raise InvalidArgumentError(f"{manifold} points have {len(kinds)} components")
    return tuple(lc.as_matrix(c) for c in point)


def native(manifold: str, pt: tuple[np.ndarray, ...]):
    """Form handed to evaluators: bare matrix for one-component manifolds."""
    return pt[0] if len(MANIFOLDS[manifold]) == 1 else pt


@dataclass(frozen=True)
class GradientBundle:
    """Derivatives keyed by ``(component, side)``; absent keys are zero."""

    manifold: str
    n: int
    parts: dict = field(default_factory=dict)

    def __getitem__(self, key) -> np.ndarray:
        got = self.parts.get(key)
        if got is None:
            return np.zeros((self.n, self.n), dtype=np.complex128)
        return got

    def keys(self):
        return self.parts.keys()

    def max_abs_difference(self, other: "GradientBundle") -> float:
        keys = set(self.parts) | set(other.parts)
        return max((float(np.abs(self[k] - other[k]).max()) for k in keys), default=0.0)


@dataclass(frozen=True)
class Observable:
    """A real function on a named manifold with a derivative strategy.

    ``grad`` is an optional analytic closure ``point -> GradientBundle``;
    without it, derivatives are sampled by central differences with step
    ``h`` (and 4-point Richardson extrapolation when ``richardson``).
    """

    manifold: str
    func: Callable
    grad: Callable | None = None
    h: float = FD_STEP
    richardson: bool = True
    name: str = ""

    def __post_init__(self):
        if self.manifold not in MANIFOLDS:
            raise InvalidArgumentError(f"unknown manifold tag {self.manifold!r}")
        if not self.h > 0:
            raise InvalidArgumentError("finite-difference step must be positive")

    def __call__(self, point) -> float:
        return float(self.func(point))

    def fd(self) -> "Observable":
        """Same observable with the finite-difference strategy forced."""
        return replace(self, grad=None)


def constant(manifold: str, value: float = 0.0) -> Observable:
    return Observable(manifold, lambda p: value,
                      grad=lambda p: GradientBundle(manifold, _dim(manifold, p)), name="const")


def _dim(manifold, p) -> int:
    return as_point(manifold, p)[0].shape[0]


# --------------------------------------------------------------------------
# finite differences
# --------------------------------------------------------------------------

@lru_cache(maxsize=512)
def _exp_table(n: int, space: str, t: float) -> np.ndarray:
    basis = lc.space_basis(n, space)
    tab = np.array([sla.expm(t * X) for X in basis])
    tab.setflags(write=False)
    return tab


def _move(kind_side: str, V: np.ndarray, E: np.ndarray) -> np.ndarray:
    if kind_side == "left":
        return E @ V
    if kind_side == "right":
        return V @ E
    if kind_side == "sym":
        return E @ V @ lc.dagger(E)
    return V + E


def _fd_combine(vals: dict, h: float, richardson: bool):
    d1 = (vals[h] - vals[-h]) / (2 * h)
    if not richardson:
        return d1
    d2 = (vals[h / 2] - vals[-h / 2]) / h
    return (4 * d2 - d1) / 3


def _steps(h: float, richardson: bool):
    return (h, -h, h / 2, -h / 2) if richardson else (h, -h)


def fd_gradient(obs: Observable, point) -> GradientBundle:
    pt = as_point(obs.manifold, point)
    n = pt[0].shape[0]
    parts = {}
    for c, kind in enumerate(MANIFOLDS[obs.manifold]):
        sides, space = KINDS[kind]
        basis = lc.space_basis(n, space)
        dual = lc.space_dual_basis(n, space)
        for side in sides:
            vals = {}
            for t in _steps(obs.h, obs.richardson):
                moves = t * basis if side == "add" else _exp_table(n, space, t)
                row = np.empty(basis.shape[0])
                for a in range(basis.shape[0]):
                    q = list(pt)
                    q[c] = _move(side, pt[c], moves[a])
                    row[a] = obs.func(native(obs.manifold, tuple(q)))
                vals[t] = row
            d = _fd_combine(vals, obs.h, obs.richardson)
            if not np.all(np.isfinite(d)):
                raise FloatingPointError(f"non-finite derivative of observable {obs.name!r}")
            parts[(c, side)] = np.tensordot(d, dual, axes=1)
    return GradientBundle(obs.manifold, n, parts)


def gradients(obs: Observable, point, strategy: str | None = None) -> GradientBundle:
    """Derivatives of ``obs`` at ``point``.

    ``strategy`` may force ``"fd"`` or ``"analytic"``; by default the
    analytic closure is used when present.
    """
    if strategy == "fd" or (obs.grad is None and strategy != "analytic"):
        return fd_gradient(obs, point)
    if obs.grad is None:
        raise InvalidArgumentError("observable has no analytic gradient")
    g = obs.grad(point)
    if isinstance(g, GradientBundle):
        return g
    return GradientBundle(obs.manifold, _dim(obs.manifold, point), dict(g))


def directional_derivative(func: Callable[[float], float], h: float = FD_STEP,
                           richardson: bool = True) -> float:
    vals = {t: func(t) for t in _steps(h, richardson)}
    return float(_fd_combine(vals, h, richardson))


# --------------------------------------------------------------------------
# analytic trace observables
# --------------------------------------------------------------------------

def _gamma_to_gradient(gamma: np.ndarray, space: str) -> np.ndarray:
    # derivative = Re tr(X gamma) = <X, i gamma>; keep the part dual to ``space``
    return lc.project(lc.traceless(1j * gamma), lc.DUAL_SPACE[space])


def trace_word(manifold: str, factors: Iterable, coef: complex = 1.0, name: str = "") -> Observable:
    """``Re(coef * tr(F_1 F_2 ... F_m))`` with analytic derivatives.

    Each factor is either a constant matrix or a pair ``(component, op)``
    where ``op`` is ``""`` (the component itself), ``"H"`` (its adjoint) or
    ``"I"`` (its inverse).
    """
    facs = []
    for f in factors:
        if isinstance(f, tuple):
            c, op = f
            if op not in ("", "H", "I"):
                raise InvalidArgumentError(f"unknown factor op {op!r}")
            facs.append((int(c), op))
        else:
            facs.append(lc.as_matrix(f))
    kinds = MANIFOLDS[manifold]
    coef = complex(coef)

    def mats(pt):
        out = []
        for f in facs:
            if isinstance(f, tuple):
                V = pt[f[0]]
                out.append(V if f[1] == "" else lc.dagger(V) if f[1] == "H" else np.linalg.inv(V))
            else:
                out.append(f)
        return out

    def value(point):
        pt = as_point(manifold, point)
        M = np.eye(pt[0].shape[0], dtype=np.complex128)
        for A in mats(pt):
            M = M @ A
        return float((coef * np.trace(M)).real)

    def grad(point):
        pt = as_point(manifold, point)
        n = pt[0].shape[0]
        ms = mats(pt)
        m = len(ms)
        prefix = [np.eye(n, dtype=np.complex128)]
        for A in ms:
            prefix.append(prefix[-1] @ A)
        suffix = [np.eye(n, dtype=np.complex128)]
        for A in reversed(ms):
            suffix.append(A @ suffix[-1])
        suffix = suffix[::-1]  # suffix[i] = ms[i] ... ms[m-1]
        gammas: dict = {}
        for i, f in enumerate(facs):
            if not isinstance(f, tuple):
                continue
            c, op = f
            V = pt[c]
            R = suffix[i + 1] @ prefix[i]
            cc = coef
            if op == "H":
                R = lc.dagger(R)
                cc = np.conj(coef)
            elif op == "I":
                Vi = ms[i]
                R = -Vi @ R @ Vi
            sides, _space = KINDS[kinds[c]]
            for side in sides:
                if side == "left":
                    G = cc * (V @ R)
                elif side == "right":
                    G = cc * (R @ V)
                elif side == "sym":
                    G = cc * (V @ R) + np.conj(cc) * lc.dagger(R @ V)
                else:
                    G = cc * R
                gammas[(c, side)] = gammas.get((c, side), 0) + G
        parts = {k: _gamma_to_gradient(G, KINDS[kinds[k[0]]][1]) for k, G in gammas.items()}
        return GradientBundle(manifold, n, parts)

    label = name or f"trace_word[{manifold}]"
    return Observable(manifold, value, grad, name=label)


def linear_combination(terms: Iterable[tuple[float, Observable]], name: str = "") -> Observable:
    """``sum_i c_i F_i`` with analytic gradient when all terms have one."""
    terms = list(terms)
    manifold = terms[0][1].manifold
    if any(o.manifold != manifold for _, o in terms):
        raise InvalidArgumentError("linear combination across manifolds")

    def value(p):
        return sum(c * o.func(p) for c, o in terms)

    grad = None
    if all(o.grad is not None for _, o in terms):
        def grad(p):
            acc: dict = {}
            n = _dim(manifold, p)
            for c, o in terms:
                for k, v in gradients(o, p).parts.items():
                    acc[k] = acc.get(k, 0) + c * v
            return GradientBundle(manifold, n, acc)

    return Observable(manifold, value, grad, name=name or "lincomb")


def product(F: Observable, H: Observable, analytic: bool = True) -> Observable:
    """Pointwise product; with ``analytic=False`` derivatives are sampled."""
    if F.manifold != H.manifold:
        raise InvalidArgumentError("product across manifolds")

    def value(p):
        return F.func(p) * H.func(p)

    grad = None
    if analytic and F.grad is not None and H.grad is not None:
        def grad(p):
            gF, gH = gradients(F, p), gradients(H, p)
            fv, hv = F.func(p), H.func(p)
            keys = set(gF.parts) | set(gH.parts)
            return GradientBundle(F.manifold, gF.n, {k: hv * gF[k] + fv * gH[k] for k in keys})

    return Observable(F.manifold, value, grad, h=F.h, richardson=F.richardson,
                      name=f"({F.name})*({H.name})")


def lift(obs: Observable, manifold: str, component: int) -> Observable:
    """Pull back along the projection onto one component of ``manifold``."""
    src_kind = MANIFOLDS[obs.manifold]
    if len(src_kind) != 1 or MANIFOLDS[manifold][component] != src_kind[0]:
        raise InvalidArgumentError("component kinds do not match")

    def value(p):
        return obs.func(as_point(manifold, p)[component])

    grad = None
    if obs.grad is not None:
        def grad(p):
            pt = as_point(manifold, p)
            g = gradients(obs, pt[component])
            return GradientBundle(manifold, g.n, {(component, s): v for (_, s), v in g.parts.items()})

    return Observable(manifold, value, grad, h=obs.h, richardson=obs.richardson,
                      name=f"lift[{obs.name}]")


def pullback(obs: Observable, fmap: Callable, manifold: str, h: float = FD_STEP) -> Observable:
    """``obs o fmap`` as a finite-difference observable on ``manifold``."""
    return Observable(manifold, lambda p: obs.func(fmap(p)), None, h=h,
                      name=f"pullback[{obs.name}]")


# --------------------------------------------------------------------------
# brackets
# --------------------------------------------------------------------------

pair = lc.pairing


def rho(X: np.ndarray) -> np.ndarray:
    """``rho = (pi_G - pi_B) / 2``, the classical r-matrix of the double."""
    XG, XB = lc._split(X)
    return 0.5 * (XG - XB)


def _conj_inv(V: np.ndarray, X: np.ndarray) -> np.ndarray:
    # V^-1 X V
    return np.linalg.solve(V, X @ V)


@dataclass(frozen=True)
class BracketSpec:
    """A Poisson bracket: literal formula plus Hamiltonian tangent."""

    name: str
    manifold: str
    form: Callable        # (gF, gH, pt) -> float
    tangent: Callable     # (gH, pt) -> {(component, side): algebra element}


BRACKETS: dict[str, BracketSpec] = {}


def register_bracket(spec: BracketSpec) -> BracketSpec:
    BRACKETS[spec.name] = spec
    return spec


def _double_form(sign):
    def form(gF, gH, pt):
        return (pair(gF[0, "left"], rho(gH[0, "left"]))
                + sign * pair(gF[0, "right"], rho(gH[0, "right"])))

    def tangent(gH, pt):
        return {(0, "left"): rho(gH[0, "left"]), (0, "right"): sign * rho(gH[0, "right"])}

    return form, tangent


def _B_form(gF, gH, pt):
    b = pt[0]
    return pair(gF[0, "right"], _conj_inv(b, gH[0, "left"]))


def _B_tangent(gH, pt):
    return {(0, "right"): lc.pi_B(_conj_inv(pt[0], gH[0, "left"]))}


def _G_form(gF, gH, pt):
    g = pt[0]
    return -pair(gF[0, "right"], _conj_inv(g, gH[0, "left"]))


def _G_tangent(gH, pt):
    return {(0, "right"): -lc.pi_G(_conj_inv(pt[0], gH[0, "left"]))}


def _fM_form(gF, gH, pt):
    g, b = pt
    return (pair(gF[1, "right"], _conj_inv(b, gH[1, "left"]))
            - pair(gF[0, "right"], _conj_inv(g, gH[0, "left"]))
            + pair(gF[0, "left"], gH[1, "left"])
            - pair(gH[0, "left"], gF[1, "left"]))


def _fM_tangent(gH, pt):
    g, b = pt
    return {
        (1, "right"): lc.pi_B(_conj_inv(b, gH[1, "left"])),
        (0, "right"): -lc.pi_G(_conj_inv(g, gH[0, "left"])),
        (0, "left"): gH[1, "left"],
        (1, "left"): -gH[0, "left"],
    }


def _bM_form(gF, gH, pt):
    g, _L = pt
    D2H = gH[1, "sym"]
    return (pair(gF[1, "sym"], lc.pi_G(D2H))
            - pair(g @ gF[0, "right"] @ np.linalg.inv(g), gH[0, "left"])
            + pair(gF[0, "left"], D2H)
            - pair(gH[0, "left"], gF[1, "sym"]))


def _bM_tangent(gH, pt):
    g, _L = pt
    D2H_G = lc.pi_G(gH[1, "sym"])
    return {
        (1, "sym"): D2H_G - gH[0, "left"],
        (0, "right"): -lc.pi_G(_conj_inv(g, gH[0, "left"])),
        (0, "left"): D2H_G,
    }


def _P_form_at(c, gF, gH):
    return pair(lc.pi_B(gF[c, "sym"]), lc.pi_G(gH[c, "sym"]))


def _P_form(gF, gH, pt):
    return _P_form_at(0, gF, gH)


def _P_tangent(gH, pt):
    return {(0, "sym"): lc.pi_G(gH[0, "sym"])}


def _PxP_form(gF, gH, pt):
    return -_P_form_at(0, gF, gH) + _P_form_at(1, gF, gH)


def _PxP_tangent(gH, pt):
    return {(0, "sym"): -lc.pi_G(gH[0, "sym"]), (1, "sym"): lc.pi_G(gH[1, "sym"])}


def _BxB_form(gF, gH, pt):
    return sum(pair(gF[c, "right"], _conj_inv(pt[c], gH[c, "left"])) for c in (0, 1))


def _BxB_tangent(gH, pt):
    return {(c, "right"): lc.pi_B(_conj_inv(pt[c], gH[c, "left"])) for c in (0, 1)}


def _GxG_form(gF, gH, pt):
    return -sum(pair(gF[c, "right"], _conj_inv(pt[c], gH[c, "left"])) for c in (0, 1))


def _GxG_tangent(gH, pt):
    return {(c, "right"): -lc.pi_G(_conj_inv(pt[c], gH[c, "left"])) for c in (0, 1)}


register_bracket(BracketSpec("M+", "M", *_double_form(+1)))
register_bracket(BracketSpec("M-", "M", *_double_form(-1)))
register_bracket(BracketSpec("B", "B", _B_form, _B_tangent))
register_bracket(BracketSpec("G", "G", _G_form, _G_tangent))
register_bracket(BracketSpec("fM", "fM", _fM_form, _fM_tangent))
register_bracket(BracketSpec("bM", "bM", _bM_form, _bM_tangent))
register_bracket(BracketSpec("P", "P", _P_form, _P_tangent))
register_bracket(BracketSpec("PmxP", "PxP", _PxP_form, _PxP_tangent))
register_bracket(BracketSpec("BxB", "BxB", _BxB_form, _BxB_tangent))
register_bracket(BracketSpec("GxG", "GxG", _GxG_form, _GxG_tangent))


def _spec(name: str) -> BracketSpec:
    try:
        return BRACKETS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown bracket {name!r}") from None


def poisson_bracket(name: str, F: Observable, H: Observable, point, strategy: str | None = None) -> float:
    """Evaluate the registered bracket ``name`` on ``F, H`` at ``point``."""
    spec = _spec(name)
    pt = as_point(spec.manifold, point)
    gF = gradients(F, native(spec.manifold, pt), strategy)
    gH = gradients(H, native(spec.manifold, pt), strategy)
    return float(spec.form(gF, gH, pt))


def bracket_double(sign: int, F: Observable, H: Observable, K) -> float:
    """``<grad F, rho grad H> +/- <grad' F, rho grad' H>`` on SL(n,C)."""
    return poisson_bracket("M+" if sign > 0 else "M-", F, H, K)


def bracket_B(F: Observable, H: Observable, b) -> float:
    """``<D'F, b^-1 (DH) b>`` on the Borel group."""
    return poisson_bracket("B", F, H, b)


def bracket_G(F: Observable, H: Observable, g) -> float:
    """``-<D'F, g^-1 (DH) g>`` on SU(n)."""
    return poisson_bracket("G", F, H, g)


def bracket_fM(F: Observable, H: Observable, point) -> float:
    """Bracket on ``G x B`` transported from the Heisenberg double by ``m1``."""
    return poisson_bracket("fM", F, H, point)


def bracket_bM(F: Observable, H: Observable, point) -> float:
    """Bracket on the master phase space ``G x P``."""
    return poisson_bracket("bM", F, H, point)


def bracket_P(F: Observable, H: Observable, L) -> float:
    """``<(DF)_B, (DH)_G>`` on the positive Hermitian matrices."""
    return poisson_bracket("P", F, H, L)


def hamiltonian_tangent(name: str, H: Observable, point) -> dict:
    spec = _spec(name)
    pt = as_point(spec.manifold, point)
    return spec.tangent(gradients(H, native(spec.manifold, pt)), pt)


def flow_point(manifold: str, pt: tuple, tangent: dict, t: float) -> tuple:
    """Move ``pt`` along the curve generated by ``tangent`` for time ``t``."""
    out = list(pt)
    by_comp: dict = {}
    for (c, side), X in tangent.items():
        by_comp.setdefault(c, {})[side] = X
    for c, sides in by_comp.items():
        V = out[c]
        if "add" in sides:
            V = V + t * sides["add"]
        if "sym" in sides:
            E = sla.expm(t * sides["sym"])
            V = E @ V @ lc.dagger(E)
        if "left" in sides:
            V = sla.expm(t * sides["left"]) @ V
        if "right" in sides:
            V = V @ sla.expm(t * sides["right"])
        out[c] = V
    return tuple(out)


def hamiltonian_flow_field(H: Observable, point, bracket: str | None = None) -> tuple:
    """Velocity of the Hamiltonian vector field of ``H``, one matrix per component.

    On ``P`` this is ``[(DH)_G, L]``; on ``G x P`` with ``H`` depending on
    ``L`` only it is ``(DH(L) g, 0)``.
    """
    name = bracket or H.manifold
    spec = _spec(name)
    pt = as_point(spec.manifold, point)
    tan = spec.tangent(gradients(H, native(spec.manifold, pt)), pt)
    vel = [np.zeros_like(c) for c in pt]
    for (c, side), X in tan.items():
        V = pt[c]
        if side == "left":
            vel[c] = vel[c] + X @ V
        elif side == "right":
            vel[c] = vel[c] + V @ X
        elif side == "sym":
            vel[c] = vel[c] + X @ V + V @ lc.dagger(X)
        else:
            vel[c] = vel[c] + X
    return tuple(vel)


# --------------------------------------------------------------------------
# axiom residuals
# --------------------------------------------------------------------------

def antisymmetry_residual(name: str, F: Observable, H: Observable, point) -> float:
    return abs(poisson_bracket(name, F, H, point) + poisson_bracket(name, H, F, point))


def _bracket_observable(name: str, F: Observable, H: Observable) -> Observable:
    spec = _spec(name)
    return Observable(spec.manifold, lambda p: poisson_bracket(name, F, H, p),
                      name=f"{{{F.name},{H.name}}}")


def derivation(name: str, A: Observable, func: Callable, point, h: float = FD_STEP) -> float:
    """``{func, A}`` computed as the derivative of ``func`` along ``V_A``."""
    spec = _spec(name)
    pt = as_point(spec.manifold, point)
    tan = spec.tangent(gradients(A, native(spec.manifold, pt)), pt)
    return directional_derivative(
        lambda t: func(native(spec.manifold, flow_point(spec.manifold, pt, tan, t))), h)


def jacobi_residual(name: str, F: Observable, G: Observable, H: Observable, point,
                    h: float = FD_STEP) -> float:
    """``|{F,{G,H}} + {G,{H,F}} + {H,{F,G}}|`` with ``{A, f} = -V_A[f]``."""
    total = 0.0
    for A, B, C in ((F, G, H), (G, H, F), (H, F, G)):
        inner = _bracket_observable(name, B, C)
        total -= derivation(name, A, inner.func, point, h)
    return abs(total)


def leibniz_residual(name: str, F: Observable, G: Observable, H: Observable, point) -> float:
    """``|{F, GH} - {F,G} H - G {F,H}|`` with the product differentiated numerically."""
    spec = _spec(name)
    GH = product(G, H, analytic=False)
    lhs = poisson_bracket(name, F, GH, point)
    p = native(spec.manifold, as_point(spec.manifold, point))
    rhs = poisson_bracket(name, F, G, point) * H.func(p) + G.func(p) * poisson_bracket(name, F, H, point)
    return abs(lhs - rhs)


# --------------------------------------------------------------------------
# property verifiers
# --------------------------------------------------------------------------

def verify_poisson_map(fmap: Callable, source: str, target: str, probes: list[Observable],
                       points: Iterable, tol: float = 5e-5, name: str = "",
                       h: float = FD_STEP) -> CheckResult:
    """Compare ``{F o map, H o map}_source`` with ``{F, H}_target o map``.

    ``probes`` are observables on the target manifold; each unordered pair is
    tested at every point.
    """
    src = _spec(source)
    tgt = _spec(target)
    wc = WorstCase(name or f"poisson map {source}->{target}", tol)
    pulled = [pullback(F, fmap, src.manifold, h) for F in probes]
    for x in points:
        xs = native(src.manifold, as_point(src.manifold, x))
        y = fmap(xs)
        gs = [gradients(P, xs) for P in pulled]
        ypt = as_point(tgt.manifold, y)
        gt = [gradients(F, native(tgt.manifold, ypt)) for F in probes]
        xpt = as_point(src.manifold, xs)
        for i in range(len(probes)):
            for j in range(i + 1, len(probes)):
                lhs = src.form(gs[i], gs[j], xpt)
                rhs = tgt.form(gt[i], gt[j], ypt)
                wc.add(abs(lhs - rhs), point=xs, probes=(probes[i].name, probes[j].name),
                       lhs=lhs, rhs=rhs)
    return wc.result()


def generator_from_moment(name: str, moment: Callable, f: Observable, X: np.ndarray, point) -> float:
    """``-<X, {Lambda, f} Lambda^-1>``: the moment-map formula for ``df(X_M)``."""
    spec = _spec(name)
    pt = native(spec.manifold, as_point(spec.manifold, point))
    W = np.linalg.solve(moment(pt), X)  # Lambda^-1 X, frozen at the point
    probe = Observable(spec.manifold, lambda p: float(np.einsum("ij,ji->", W, moment(p)).imag),
                       name="moment-probe")
    return -poisson_bracket(name, probe, f, pt)


def generator_from_action(action: Callable, f: Observable, X: np.ndarray, point,
                          h: float = FD_STEP) -> float:
    """``d/dt f(A_{exp(tX)}(point))`` at ``t = 0``."""
    return directional_derivative(lambda t: f.func(action(sla.expm(t * X), point)), h)


def verify_moment_property(name: str, moment: Callable, action: Callable, probes: list[Observable],
                           points: Iterable, tol: float = 5e-5, check_action_identity: bool = True,
                           label: str = "") -> CheckResult:
    """Check that ``moment`` generates ``action`` and that the action is Poisson.

    For every point, probe ``f`` and basis element ``X`` of su(n) the value
    ``-<X, {Lambda, f} Lambda^-1>`` must equal the derivative of ``f`` along
    the action.  With ``check_action_identity`` the infinitesimal Poisson-action identity

        L_X{F,H} - {L_X F, H} - {F, L_X H} + <X, [zeta_F, zeta_H]> = 0

    is tested on probe pairs, where ``zeta_F`` in ``B`` is dual to
    ``Y -> L_Y F``.
    """
    spec = _spec(name)
    wc = WorstCase(label or f"moment map [{name}]", tol)
    for x in points:
        pt = native(spec.manifold, as_point(spec.manifold, x))
        n = as_point(spec.manifold, pt)[0].shape[0]
        basis = lc.space_basis(n, "G")
        for f in probes:
            for X in basis:
                a = generator_from_moment(name, moment, f, X, pt)
                b = generator_from_action(action, f, X, pt)
                wc.add(abs(a - b), point=pt, probe=f.name, X=X, kind="generator")
        if check_action_identity:
            for i in range(len(probes)):
                for j in range(i + 1, len(probes)):
                    r = poisson_action_residual(name, action, probes[i], probes[j], basis[(i + j) % len(basis)], pt)
                    wc.add(r, point=pt, probes=(probes[i].name, probes[j].name), kind="poisson action identity")
    return wc.result()


def _lie_derivative_obs(manifold: str, action: Callable, F: Observable, X: np.ndarray) -> Observable:
    return Observable(manifold, lambda p: generator_from_action(action, F, X, p), name=f"L_X {F.name}")


def zeta_of(action: Callable, F: Observable, point) -> np.ndarray:
    """``zeta_F = sum_a T^a dF((T_a)_M)`` with ``T_a`` a basis of su(n)."""
    n = np.asarray(point[0] if isinstance(point, tuple) else point).shape[0]
    basis = lc.space_basis(n, "G")
    dual = lc.space_dual_basis(n, "G")
    vals = np.array([generator_from_action(action, F, T, point) for T in basis])
    return np.tensordot(vals, dual, axes=1)


def poisson_action_residual(name: str, action: Callable, F: Observable, H: Observable, X: np.ndarray, point) -> float:
    spec = _spec(name)
    LF = _lie_derivative_obs(spec.manifold, action, F, X)
    LH = _lie_derivative_obs(spec.manifold, action, H, X)
    FH = _bracket_observable(name, F, H)
    t1 = generator_from_action(action, FH, X, point)
    t2 = derivation(name, H, LF.func, point)    # {L_X F, H} = V_H[L_X F]
    t3 = -derivation(name, F, LH.func, point)   # {F, L_X H} = -V_F[L_X H]
    zF = zeta_of(action, F, point)
    zH = zeta_of(action, H, point)
    t4 = -pair(X, zF @ zH - zH @ zF)
    return abs(t1 - t2 - t3 - t4)
