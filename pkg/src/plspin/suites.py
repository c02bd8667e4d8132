"""Property batteries shared by ``lab verify`` and the acceptance tests.

Every suite draws sample ``i`` from its own seeded stream, evaluates one
family of identities and returns :class:`CheckResult` records carrying the
worst residual and the sample that produced it.
"""
from __future__ import annotations

import warnings
from typing import Iterable

import numpy as np

from . import factorize as fz
from . import lie_core as lc
from . import master_system as ms
from . import models as md
from . import poisson_engine as pe
from . import reduction as rd
from . import sampling as sp
from .errors import ConditioningWarning, SingularityError
from .report import CheckResult, WorstCase

# stream ids keep the suites statistically independent for a common seed
_STREAMS = {name: k for k, name in enumerate(
    ["manin", "factor", "axioms", "maps", "moment", "master", "rank", "reduced",
     "quadrature", "zeta", "scaling", "rs"])}

AXIOM_BRACKETS = ("M+", "M-", "B", "G", "P", "fM", "bM")
FD_TOL = 5e-5


def _rng(seed: int, suite: str, i: int, n: int = 0) -> np.random.Generator:
    return sp.rng_for(seed, 1000 * n + i, _STREAMS[suite])


# --------------------------------------------------------------------------
# random points and probes
# --------------------------------------------------------------------------

def random_point(manifold: str, rng, n: int, scale: float = 0.5):
    """Random point of a tagged manifold with unit-scale factors."""
    draw = {
        "SL": lambda: sp.random_sl(rng, n, scale),
        "G": lambda: sp.random_su(rng, n),
        "B": lambda: sp.random_borel(rng, n, scale),
        "P": lambda: sp.random_positive(rng, n, scale),
        "T": lambda: sp.random_regular_torus(rng, n),
        "p": lambda: np.diag(sp.random_traceless_real(rng, n, scale)).astype(np.complex128),
        "N": lambda: sp.random_unipotent(rng, n, scale),
        "X": lambda: np.triu(sp.complex_normal(rng, (n, n)) * scale, 1),
    }
    pts = tuple(draw[k]() for k in pe.MANIFOLDS[manifold])
    return pts[0] if len(pts) == 1 else pts


_OPS = ("", "H", "I")


def trace_probes(manifold: str, rng, n: int, count: int = 3) -> list[pe.Observable]:
    """Words ``Re(c tr(A_1 x_1 A_2 x_2 ...))`` with random constant factors ``A_i``."""
    kinds = pe.MANIFOLDS[manifold]
    out = []
    for i in range(count):
        factors = []
        for c, kind in enumerate(kinds):
            factors.append(sp.complex_normal(rng, (n, n)))
            factors.append((c, _OPS[(i + c) % 3] if kind not in ("p", "X") else ""))
        coef = complex(*rng.standard_normal(2))
        out.append(pe.trace_word(manifold, factors, coef=coef, name=f"{manifold}-w{i}"))
    return out


# words without constant factors keep slice probes invariant under the diagonal torus
SLICE_WORDS = ([(0, ""), (1, ""), (0, "H"), (1, "")], [(0, ""), (1, "")], [(0, ""), (0, ""), (1, "I")],
               [(1, ""), (1, ""), (0, "H")], [(0, "H"), (1, ""), (1, ""), (0, ""), (1, "I")])
DECOUPLED_WORDS = ([(0, ""), (2, ""), (0, "H"), (2, "H")], [(1, ""), (2, ""), (1, ""), (2, "H")],
                   [(0, ""), (1, "")], [(0, ""), (2, "I"), (0, "H"), (2, "H"), (1, "")],
                   [(1, ""), (1, ""), (0, "")], [(2, ""), (1, ""), (2, "H"), (0, "")])
LINEAR_WORDS = ([(2, ""), (2, "H"), (2, ""), (2, "H")], [(0, ""), (2, ""), (0, "H"), (2, "H")],
                [(2, ""), (2, "H"), (0, ""), (2, ""), (2, "H"), (0, "H")], [(1, ""), (2, ""), (2, "H")])


def word_probes(manifold: str, words, rng, count: int = 3, offset: int = 0) -> list[pe.Observable]:
    return [pe.trace_word(manifold, words[(offset + 2 * i + 1) % len(words)],
                          coef=complex(*rng.standard_normal(2)), name=f"{manifold}-v{i}")
            for i in range(count)]


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


# --------------------------------------------------------------------------
# algebra and factorizations
# --------------------------------------------------------------------------

def manin_checks(ns: Iterable[int], samples: int, seed: int, tol_scale: float = 1.0) -> list[CheckResult]:
    """Isotropy of both summands, ad-invariance of the pairing, split reassembly."""
    iso = WorstCase("manin isotropy", 1e-10 * tol_scale)
    inv = WorstCase("pairing ad-invariance", 1e-10 * tol_scale)
    split = WorstCase("manin split reassembly", 1e-10 * tol_scale)
    for n in ns:
        for i in range(samples):
            rng = _rng(seed, "manin", i, n)
            Xg, Yg = (sp.random_algebra(rng, n, "G") for _ in range(2))
            Xb, Yb = (sp.random_algebra(rng, n, "B") for _ in range(2))
            iso.add(max(abs(lc.pairing(Xg, Yg)), abs(lc.pairing(Xb, Yb))), n=n, X=Xg, Y=Yg)
            X, Y, Z = (sp.random_algebra(rng, n) for _ in range(3))
            inv.add(abs(lc.pairing(Z @ X - X @ Z, Y) + lc.pairing(X, Z @ Y - Y @ Z)), n=n, X=X, Y=Y, Z=Z)
            G, B = lc.project_manin(X)
            split.add(max(np.abs(G + B - X).max(), np.abs(G + lc.dagger(G)).max(),
                          np.abs(np.tril(B, -1)).max(), np.abs(np.diag(B).imag).max()), n=n, X=X)
    return [iso.result(), inv.result(), split.result()]


def factorization_checks(ns: Iterable[int], samples: int, seed: int, tol_scale: float = 1.0) -> list[CheckResult]:
    """Iwasawa reassembly, the left/right relation, nu and split roundtrips, nu-equivariance."""
    tol = 1e-10 * tol_scale
    iw = WorstCase("iwasawa reassembly", tol)
    lr = WorstCase("iwasawa left-right relation", tol)
    nu = WorstCase("nu roundtrip", tol)
    spl = WorstCase("borel split roundtrip", tol)
    eq = WorstCase("nu dressing equivariance", tol)
    for n in ns:
        for i in range(samples):
            rng = _rng(seed, "factor", i, n)
            K = sp.random_sl(rng, n)
            f = fz.iwasawa(K)
            iw.add(max(np.abs(f.g_L @ np.linalg.inv(f.b_R) - K).max(),
                       np.abs(f.b_L @ lc.dagger(f.g_R) - K).max()), n=n, K=K)
            lr.add(np.abs(lc.dagger(f.g_R) @ f.b_R - np.linalg.inv(f.b_L) @ f.g_L).max(), n=n, K=K)
            b = sp.random_borel(rng, n)
            nu.add(np.abs(fz.nu_inverse(fz.nu(b)) - b).max(), n=n, b=b)
            p, bp = fz.split_borel(b)
            spl.add(np.abs(fz.join_borel(p, bp) - b).max(), n=n, b=b)
            eta = sp.random_su(rng, n)
            eq.add(np.abs(fz.nu(fz.dress(eta, b)) - eta @ fz.nu(b) @ lc.dagger(eta)).max(), n=n, b=b, eta=eta)
    return [iw.result(), lr.result(), nu.result(), spl.result(), eq.result()]


# --------------------------------------------------------------------------
# brackets, Poisson maps, moment maps
# --------------------------------------------------------------------------

def bracket_axiom_checks(ns: Iterable[int], triples: int, seed: int, tol_scale: float = 1.0,
                         brackets: tuple[str, ...] = AXIOM_BRACKETS) -> list[CheckResult]:
    """Antisymmetry, Jacobi and Leibniz on random trace-word triples.

    The triples are spread over ``ns`` and ``brackets`` in turn.
    """
    anti = WorstCase("bracket antisymmetry", 1e-12 * tol_scale)
    jac = WorstCase("bracket Jacobi", FD_TOL * tol_scale)
    leib = WorstCase("bracket Leibniz", FD_TOL * tol_scale)
    ns = list(ns)
    for i in range(triples):
        n = ns[i % len(ns)]
        name = brackets[(i // len(ns)) % len(brackets)]
        man = pe.BRACKETS[name].manifold
        rng = _rng(seed, "axioms", i, n)
        pt = random_point(man, rng, n)
        F, G, H = trace_probes(man, rng, n)
        anti.add(pe.antisymmetry_residual(name, F, H, pt), bracket=name, n=n, point=pt)
        jac.add(pe.jacobi_residual(name, F, G, H, pt), bracket=name, n=n, point=pt)
        leib.add(pe.leibniz_residual(name, F, G, H, pt), bracket=name, n=n, point=pt)
    return [anti.result(), jac.result(), leib.result()]


def _psi_map(pt):
    g, L = pt
    return lc.dagger(g) @ L @ g, L


def _lambda_pair(K):
    f = fz.iwasawa(K)
    return f.b_L, f.b_R


POISSON_MAPS = (
    ("(Lambda_L, Lambda_R): M -> BxB", _lambda_pair, "M+", "BxB", "SL"),
    ("Psi: bM -> P- x P", _psi_map, "bM", "PmxP", "bM"),
    ("nu: B -> P", fz.nu, "B", "P", "B"),
    ("m2: fM -> bM", fz.m2, "fM", "bM", "fM"),
    ("m1: M -> fM", fz.m1, "M+", "fM", "SL"),
)


def _src_point(tag: str, rng, n: int):
    return random_point("M" if tag == "SL" else tag, rng, n)


def poisson_map_checks(ns: Iterable[int], points: int, seed: int, tol_scale: float = 1.0) -> list[CheckResult]:
    out = []
    for k, (label, fmap, src, tgt, tag) in enumerate(POISSON_MAPS):
        results = []
        for n in ns:
            rng = _rng(seed, "maps", k, n)
            probes = trace_probes(pe.BRACKETS[tgt].manifold, rng, n)
            pts = [_src_point(tag, _rng(seed, "maps", 100 * (k + 1) + i, n), n) for i in range(points)]
            results.append(pe.verify_poisson_map(fmap, src, tgt, probes, pts, FD_TOL * tol_scale,
                                                 name=f"poisson map {label}"))
        out.append(_merge(results))
    return out


def _merge(results: list[CheckResult]) -> CheckResult:
    worst = max(results, key=lambda r: r.residual)
    return CheckResult(worst.name, worst.residual, worst.threshold, all(r.passed for r in results),
                       sum(r.count for r in results), worst.sample, worst.info)


def moment_checks(ns: Iterable[int], points: int, seed: int, tol_scale: float = 1.0) -> list[CheckResult]:
    """Dressing and quasi-adjoint actions against their moment maps, plus equivariance."""
    dress_r, qadj_r = [], []
    eq = WorstCase("moment map equivariance", 1e-9 * tol_scale)
    for n in ns:
        rng = _rng(seed, "moment", 0, n)
        pts_B = [random_point("B", _rng(seed, "moment", 10 + i, n), n) for i in range(points)]
        pts_M = [random_point("M", _rng(seed, "moment", 50 + i, n), n) for i in range(points)]
        dress_r.append(pe.verify_moment_property("B", lambda b: b, fz.dress, trace_probes("B", rng, n), pts_B,
                                                 FD_TOL * tol_scale, label="moment map: dressing on B"))
        qadj_r.append(pe.verify_moment_property("M+", fz.moment_map, fz.quasi_adjoint, trace_probes("M", rng, n),
                                                pts_M, FD_TOL * tol_scale, label="moment map: quasi-adjoint on M"))
        for i in range(max(points, 10)):
            r = _rng(seed, "moment", 200 + i, n)
            K, eta = sp.random_sl(r, n), sp.random_su(r, n)
            res = np.abs(fz.moment_map(fz.quasi_adjoint(eta, K)) - fz.dress(eta, fz.moment_map(K))).max()
            eq.add(res, n=n, K=K, eta=eta)
    return [_merge(dress_r), _merge(qadj_r), eq.result()]


# --------------------------------------------------------------------------
# master system
# --------------------------------------------------------------------------

def master_checks(ns: Iterable[int], points: int, seed: int, tol_scale: float = 1.0,
                  t_max: float = 10.0) -> list[CheckResult]:
    cons = WorstCase("master flow conserves Psi", 1e-9 * tol_scale)
    comm = WorstCase("invariant Hamiltonians commute", FD_TOL * tol_scale)
    for n in ns:
        for i in range(points):
            rng = _rng(seed, "master", i, n)
            pt = (sp.random_su(rng, n), sp.random_positive(rng, n))
            P0 = ms.psi(pt)
            for phi in ms.power_traces(n):
                for t in np.linspace(0.0, t_max, 11):
                    Pt = ms.psi(ms.free_flow(phi, pt, t))
                    cons.add(max(np.abs(Pt[0] - P0[0]).max(), np.abs(Pt[1] - P0[1]).max()),
                             n=n, point=pt, t=float(t), phi=phi.label)
            hams = [ms.InvariantObservable(power=k).on_master() for k in range(1, n + 1)]
            for a in range(len(hams)):
                for b in range(a + 1, len(hams)):
                    comm.add(abs(pe.bracket_bM(hams[a].fd(), hams[b].fd(), pt)), n=n, point=pt, pair=(a + 1, b + 1))
    return [cons.result(), comm.result()]


def rank_checks(ns: Iterable[int], points: int, seed: int) -> list[CheckResult]:
    out = []
    for n in ns:
        wc = WorstCase(f"rank evidence n={n}", 0.5)
        statuses = []
        for i in range(points):
            rng = _rng(seed, "rank", i, n)
            pt = (sp.random_su(rng, n), sp.random_positive(rng, n))
            rep = ms.rank_evidence(pt)
            statuses.append(rep["status"])
            wc.add(0.0 if rep["status"] == "PASS" else 1.0, n=n, point=pt, report=rep)
        res = wc.result()
        res.info = {"statuses": {s: statuses.count(s) for s in sorted(set(statuses))}}
        out.append(res)
    return out


# --------------------------------------------------------------------------
# reduction
# --------------------------------------------------------------------------

def reduced_bracket_checks(ns: Iterable[int], samples: int, seed: int, tol_scale: float = 1.0) -> list[CheckResult]:
    """Slice bracket against invariant extensions and against the Borel slice form."""
    ext = WorstCase("reduced bracket vs invariant extension", FD_TOL * tol_scale)
    tra = WorstCase("reduced bracket vs Borel slice transport", FD_TOL * tol_scale)
    ns = list(ns)
    for i in range(samples):
        n = ns[i % len(ns)]
        rng = _rng(seed, "reduced", i, n)
        Q = sp.random_regular_torus(rng, n)
        b = sp.random_borel(rng, n)
        L = fz.nu(b)
        F, H = word_probes("slice", SLICE_WORDS, rng, 2, offset=i)
        a = rd.reduced_bracket_slice(F, H, (Q, L))
        c = pe.bracket_bM(rd.invariant_extension(F), rd.invariant_extension(H), (Q, L))
        e = rd.reduced_bracket_borel(rd.slice_to_borel_observable(F), rd.slice_to_borel_observable(H), (Q, b))
        ext.add(abs(a - c), n=n, Q=Q, L=L, value=a)
        tra.add(abs(a - e), n=n, Q=Q, L=L, value=a)
    return [ext.result(), tra.result()]


def _fd_check_grid(ts: np.ndarray, d: float) -> np.ndarray:
    offs = np.array([-d, -d / 2, 0.0, d / 2, d])
    return np.unique(np.round(np.concatenate([[0.0], (ts[:, None] + offs[None, :]).ravel()]), 12))


def quadrature_checks(n: int, trajectories: int, seed: int, tol_scale: float = 1.0,
                      t_max: float = 1.0, probes: int = 10, d: float = 1e-4) -> list[CheckResult]:
    """Richardson time derivative of quadrature trajectories against ``reduced_vf``."""
    vf = WorstCase("quadrature matches reduced vector field", 1e-5 * tol_scale)
    inv = WorstCase("quadrature spectral invariants", 1e-8 * tol_scale)
    ts = np.linspace(0.05 * t_max, 0.95 * t_max, probes)
    grid = _fd_check_grid(ts, d)
    breaks = 0
    for i in range(trajectories):
        rng = _rng(seed, "quadrature", i, n)
        Q, L = sp.random_regular_torus(rng, n), sp.random_positive(rng, n, 0.4)
        phi = ms.InvariantObservable(power=1 + i % 2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConditioningWarning)
            tr = rd.quadrature_integrate(phi, (Q, L), grid, eta0=True)
        if not tr.complete:
            breaks += 1
        idx = {round(float(t), 12): k for k, t in enumerate(tr.t)}
        for t in ts:
            keys = [round(float(t + s), 12) for s in (-d, -d / 2, 0.0, d / 2, d)]
            if not all(k in idx for k in keys):
                continue
            j = [idx[k] for k in keys]
            v = rd.reduced_vf(phi, (tr.Q[j[2]], tr.L[j[2]]))
            for A, vk in ((tr.Q, v[0]), (tr.L, v[1])):
                D1 = (A[j[4]] - A[j[0]]) / (2 * d)
                D2 = (A[j[3]] - A[j[1]]) / d
                vf.add(np.abs((4 * D2 - D1) / 3 - vk).max(), Q0=Q, L0=L, t=float(t), phi=phi.label)
        inv.add(rd.spectral_drift(tr), Q0=Q, L0=L, phi=phi.label)
    res = [vf.result(), inv.result()]
    res[0].info["breakpoints"] = breaks
    return res


def zeta_checks(ns: Iterable[int], samples: int, seed: int, tol_scale: float = 1.0,
                sigma_norm: float = 1e-4) -> list[CheckResult]:
    eqn = WorstCase("zeta defining equation", 1e-12 * tol_scale)
    rnd = WorstCase("zeta roundtrip", 1e-12 * tol_scale)
    lead = WorstCase("zeta leading order", 1e-6 * tol_scale)
    for n in ns:
        for i in range(samples):
            rng = _rng(seed, "zeta", i, n)
            Q = sp.random_regular_torus(rng, n)
            p = np.diag(sp.random_traceless_real(rng, n, 0.5))
            lam = sp.random_unipotent(rng, n)
            _Q, b = rd.zeta_inverse((Q, p, lam))
            _p, bplus = fz.split_borel(b)
            eqn.add(rd.zeta_residual((Q, p, lam), bplus), n=n, Q=Q, lam=lam)
            Q2, p2, lam2 = rd.zeta_forward((Q, b))
            b3 = rd.zeta_inverse((Q2, p2, lam2))[1]
            rnd.add(max(np.abs(lam2 - lam).max(), np.abs(p2 - p).max(), np.abs(b3 - b).max()), n=n, Q=Q, lam=lam)
            S = np.triu(sp.complex_normal(rng, (n, n)), 1)
            sigma = sigma_norm * S / np.linalg.norm(S)
            bp = rd.zeta_inverse((Q, p, lc.exp_nilpotent(sigma)))[1]
            bp = fz.split_borel(bp)[1]
            lead.add(np.abs(bp - rd.zeta_leading_order(Q, sigma)).max(), n=n, Q=Q, sigma=sigma)
    return [eqn.result(), rnd.result(), lead.result()]


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------

def random_sutherland_point(rng, n: int, scale: float = 0.5) -> md.SutherlandPoint:
    q = sp.random_regular_phases(rng, n, 0.8)
    p = sp.random_traceless_real(rng, n, scale)
    X = np.triu(sp.complex_normal(rng, (n, n)) * scale, 1)
    return md.SutherlandPoint(q, p, X)


def scaling_tables(n: int, index: int, seed: int, eps=None) -> dict:
    """Hamiltonian and bracket convergence tables at one random point."""
    eps = md.halving_sequence() if eps is None else np.asarray(eps, dtype=float)
    rng = _rng(seed, "scaling", index, n)
    pt = random_sutherland_point(rng, n)
    f, h = word_probes("linear", LINEAR_WORDS, rng, 2, offset=index)
    return {"point": pt, "H": md.scaling_H_limit(pt, eps),
            "bracket": md.scaling_bracket_limit(f, h, pt.linear_point(), eps)}


def scaling_checks(ns: Iterable[int], points: int, seed: int, tol_scale: float = 1.0, eps=None) -> list[CheckResult]:
    """First-order ratio rule and limit values for both scaling limits."""
    out = []
    for kind in ("H", "bracket"):
        ratio = WorstCase(f"scaling {kind}: ratio rule", 0.5)
        limit = WorstCase(f"scaling {kind}: limit value", 1e-4 * tol_scale)
        for n in ns:
            for i in range(points):
                tab = scaling_tables(n, i, seed, eps)[kind]
                ratio.add(0.0 if tab.passed else 1.0, n=n, index=i, ratios=tab.ratio.tolist(),
                          order=tab.observed_order(), status=tab.status)
                limit.add(tab.limit_error(), n=n, index=i, target=tab.target, extrapolated=float(tab.extrapolated[-1]))
        out += [ratio.result(), limit.result()]
    return out


def random_rs_sample(rng, n: int) -> tuple[np.ndarray, np.ndarray]:
    q = 0.5 * sp.random_regular_phases(rng, n, 0.3)
    theta = sp.random_traceless_real(rng, n, 1.0)
    return q, theta


def rs_checks(ns: Iterable[int], xs: Iterable[float], samples: int, seed: int,
              tol_scale: float = 1.0) -> list[CheckResult]:
    """Closed-form identities of the trigonometric RS specialization."""
    nux = WorstCase("rs nu(-x) nu(x) = I", 1e-12 * tol_scale)
    con = WorstCase("rs constraint on b_+", 1e-10 * tol_scale)
    cross = WorstCase("rs cross-check H_+ and H_-", 1e-10 * tol_scale)
    skipped = 0
    for n in ns:
        for x in xs:
            ctx = md.RSContext(n, x)
            nux.add(np.abs(md.rs_nu(md.RSContext(n, -x)) @ md.rs_nu(ctx) - np.eye(n)).max(), n=n, x=x)
            for i in range(samples):
                rng = _rng(seed, "rs", i, n)
                q, theta = random_rs_sample(rng, n)
                try:
                    c = md.rs_crosscheck(q, theta, ctx)
                except SingularityError:
                    skipped += 1
                    continue
                con.add(c["constraint"], n=n, x=x, q=q, theta=theta)
                cross.add(max(c["residual_plus"], c["residual_minus"]), n=n, x=x, q=q, theta=theta)
    res = [nux.result(), con.result(), cross.result()]
    res[2].info["skipped"] = skipped
    return res
