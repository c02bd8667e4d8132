"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Sizes and tolerances are the ones fixed for the acceptance gate.
The lines are collected in ``LINES`` and repeated in the terminal summary
by ``conftest.py``.
"""
import time
import warnings

import pytest

from plspin import suites as su
from plspin.errors import ConditioningWarning

SEED = 42
LINES: list[str] = []
ELAPSED: dict[str, float] = {}

pytestmark = pytest.mark.acceptance


def _gate(label, results, elapsed, limit=None):
    ok = all(r.passed for r in results)
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:.0f}s)" if limit else "")
    if limit is not None and elapsed >= limit:
        ok = False
    worst = "; ".join(f"{r.name}={r.residual:.2e}/{r.threshold:.0e}" for r in results)
    line = f"{'PASS' if ok else 'FAIL'} {label} [{timing}] {worst}"
    LINES.append(line)
    ELAPSED[label] = elapsed
    print(line)
    return ok, [r.line() for r in results if not r.passed]


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_criterion_01_manin_triple():
    res, dt = _timed(su.manin_checks, [2, 3, 4, 5], 1000, SEED)
    ok, bad = _gate("criterion 1: Manin isotropy and ad-invariance", res, dt, limit=5)
    assert ok, bad


def test_criterion_02_factorization_roundtrips():
    res, dt = _timed(su.factorization_checks, [2, 3, 4, 5], 1000, SEED)
    ok, bad = _gate("criterion 2: Iwasawa, nu and split roundtrips", res, dt)
    assert ok, bad


def test_criterion_03_bracket_axioms():
    res, dt = _timed(su.bracket_axiom_checks, [2, 3], 100, SEED)
    ok, bad = _gate("criterion 3: bracket axioms", res, dt, limit=60)
    assert ok, bad


def test_criterion_04_poisson_maps():
    res, dt = _timed(su.poisson_map_checks, [2, 3], 10, SEED)
    ok, bad = _gate("criterion 4: Poisson-map battery", res, dt)
    assert ok, bad


def test_criterion_05_moment_maps():
    res, dt = _timed(su.moment_checks, [2, 3], 5, SEED)
    ok, bad = _gate("criterion 5: moment-map battery", res, dt)
    assert ok, bad


def test_criterion_06_master_system():
    res, dt = _timed(su.master_checks, [2, 3, 4], 10, SEED, t_max=10.0)
    ok, bad = _gate("criterion 6: master conservation and commutation", res, dt)
    assert ok, bad


def test_criterion_07_rank_evidence():
    res, dt = _timed(su.rank_checks, [2, 3, 4], 100, SEED)
    ok, bad = _gate("criterion 7: rank evidence", res, dt)
    assert ok, bad


def test_criterion_08_reduced_brackets():
    res, dt = _timed(su.reduced_bracket_checks, [2, 3], 100, SEED)
    ok, bad = _gate("criterion 8: reduced-bracket consistency", res, dt)
    assert ok, bad


def test_criterion_09_quadrature():
    res, dt = _timed(su.quadrature_checks, 3, 20, SEED, t_max=1.0)
    ok, bad = _gate("criterion 9: quadrature fidelity", res, dt)
    assert ok, bad


def test_criterion_10_zeta():
    res, dt = _timed(su.zeta_checks, [2, 3, 4, 5], 1000, SEED, sigma_norm=1e-4)
    ok, bad = _gate("criterion 10: zeta exactness", res, dt)
    assert ok, bad


_SCALING: dict = {}


def _scaling():
    if not _SCALING:
        res, dt = _timed(su.scaling_checks, [2, 3], 3, SEED)
        _SCALING.update({r.name: r for r in res}, elapsed=dt)
    return _SCALING


def test_criterion_11a_scaling_hamiltonian_ratios():
    s = _scaling()
    ok, bad = _gate("criterion 11a: Hamiltonian convergence ratios", [s["scaling H: ratio rule"]], s["elapsed"])
    assert ok, bad


def test_criterion_11b_scaling_limit_values():
    s = _scaling()
    ok, bad = _gate("criterion 11b: scaling limit values",
                    [s["scaling H: limit value"], s["scaling bracket: limit value"]], 0.0)
    assert ok, bad


def test_criterion_11c_scaling_bracket_ratios():
    # the rescaled bracket is even in eps, so its error ratios approach 4 rather than 2
    s = _scaling()
    r = s["scaling bracket: ratio rule"]
    ok, bad = _gate("criterion 11c: bracket convergence ratios", [r], 0.0)
    assert ok, (bad, r.sample)


def test_criterion_12_rs_identities():
    res, dt = _timed(su.rs_checks, [2, 3, 4, 5], [-1.0, -0.3, 0.3, 1.0], 1000, SEED)
    ok, bad = _gate("criterion 12: trigonometric RS identities", res, dt)
    assert ok, bad


def test_total_runtime():
    total = sum(ELAPSED.values())
    line = f"{'PASS' if total < 600 else 'FAIL'} total acceptance runtime {total:.1f}s (limit 600s)"
    LINES.append(line)
    print(line)
    assert total < 600
