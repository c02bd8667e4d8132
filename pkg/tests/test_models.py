import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from plspin import lie_core as lc
from plspin import models as md
from plspin import poisson_engine as pe
from plspin import reduction as rd
from plspin import sampling as sp
from plspin import suites as su
from plspin.errors import InvalidArgumentError, SingularityError


# ---------------------------------------------------------------- spin Sutherland

def test_sutherland_free_motion():
    pt = md.SutherlandPoint([0.4, -0.1, -0.3], [0.5, -0.2, -0.3], np.zeros((3, 3)))
    assert md.spin_sutherland_H(pt) == pytest.approx(0.5 * (0.25 + 0.04 + 0.09))


def test_sutherland_single_spin_two_by_two():
    c, q1 = 0.8 - 0.3j, 0.6
    X = np.array([[0, c], [0, 0]])
    pt = md.SutherlandPoint([q1, -q1], [0.0, 0.0], X)
    npt.assert_allclose(md.spin_sutherland_H(pt), abs(c) ** 2 / (16 * np.sin(q1) ** 2), rtol=1e-14)


def test_sutherland_matches_root_sum():
    rng = sp.rng_for(1)
    pt = su.random_sutherland_point(rng, 4)
    rs = lc.RootSystem(4)
    pot = sum(abs(pt.X[a]) ** 2 / (rs.squared_length(a) * np.sin(rs.evaluate(a, pt.q) / 2) ** 2)
              for a in rs.positive_roots) / 8
    npt.assert_allclose(md.spin_sutherland_H(pt), 0.5 * pt.p @ pt.p + pot, rtol=1e-13)


def test_sutherland_errors():
    with pytest.raises(SingularityError):
        md.spin_sutherland_H(md.SutherlandPoint([0.2, 0.2], [0, 0], np.zeros((2, 2))))
    with pytest.raises(InvalidArgumentError):
        md.SutherlandPoint([0.2, -0.2], [0, 0], np.ones((2, 2)))


# ---------------------------------------------------------------- character Hamiltonian

def test_character_hamiltonian_trivial_cases():
    ctx = md.RepresentationContext(3)
    Q = sp.random_regular_torus(sp.rng_for(2), 3)
    zero = np.zeros((3, 3))
    assert md.spin_RS_H(ctx, Q, zero, zero) == pytest.approx(3.0)
    p = np.diag([0.3, -0.1, -0.2])
    assert md.spin_RS_H(ctx, Q, p, zero) == pytest.approx(np.sum(np.exp(2 * np.diag(p))))
    with pytest.raises(InvalidArgumentError):
        md.RepresentationContext(3, tag="adjoint")


def _second_order(q, p, sigma):
    # tr(e^{2p}(I + 1/4 sum |sigma_jk|^2 E_jj / sin^2((q_j - q_k)/2)))
    n = q.size
    w = np.ones(n)
    for j in range(n):
        for k in range(j + 1, n):
            w[j] += 0.25 * abs(sigma[j, k]) ** 2 / np.sin(0.5 * (q[j] - q[k])) ** 2
    return float(np.sum(np.exp(2 * p) * w))


def test_character_hamiltonian_second_order_expansion():
    rng = sp.rng_for(3)
    n = 3
    q = sp.random_regular_phases(rng, n, 0.8)
    p = sp.random_traceless_real(rng, n, 0.5)
    S = np.triu(sp.complex_normal(rng, (n, n)), 1)
    ctx = md.RepresentationContext(n)
    errs = []
    for s in (1e-1, 5e-2, 2.5e-2, 1.25e-2):
        exact = md.spin_RS_H(ctx, np.diag(np.exp(1j * q)), np.diag(p), s * S)
        errs.append(abs(exact - _second_order(q, p, s * S)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    # remainder is cubic in sigma
    npt.assert_allclose(ratios, 8.0, rtol=0.15)


# ---------------------------------------------------------------- scaling limits

def test_scaling_H_exact_at_origin():
    pt = md.SutherlandPoint([0.5, -0.5], [0.0, 0.0], np.zeros((2, 2)))
    tab = md.scaling_H_limit(pt, md.halving_sequence())
    assert tab.status == "EXACT"
    npt.assert_allclose(tab.error, 0, atol=1e-12)


def test_scaling_H_first_order_two_by_two():
    pt = md.SutherlandPoint([0.9, -0.9], [0.3, -0.3], np.array([[0, 0.6 + 0.2j], [0, 0]]))
    tab = md.scaling_H_limit(pt, md.halving_sequence())
    assert tab.status == "PASS"
    npt.assert_allclose(tab.observed_order(), 1.0, atol=0.1)
    assert tab.limit_error() < 1e-4


def test_scaling_H_limit_value_three_by_three():
    pt = su.random_sutherland_point(sp.rng_for(4), 3)
    tab = md.scaling_H_limit(pt, md.halving_sequence())
    assert tab.limit_error() < 1e-4
    assert tab.error[-1] < 1e-3


def test_halving_sequence_and_table_validation():
    eps = md.halving_sequence()
    assert eps[0] == 0.1 and eps[-1] <= 1e-3 and eps.size == 8
    with pytest.raises(InvalidArgumentError):
        md.halving_sequence(1e-3, 1e-1)
    pt = md.SutherlandPoint([0.5, -0.5], [0.1, -0.1], np.zeros((2, 2)))
    with pytest.raises(InvalidArgumentError):
        md.scaling_H_limit(pt, [1e-3, 1e-2])


def _linear_point(n, seed):
    return su.random_sutherland_point(sp.rng_for(seed), n).linear_point()


def test_scaled_bracket_vanishes_for_angle_functions():
    pt = _linear_point(3, 5)
    f = pe.trace_word("linear", [(0, ""), np.diag([1.0, 2.0, -0.5])], coef=1j)
    h = pe.trace_word("linear", [(0, ""), (0, "")])
    tab = md.scaling_bracket_limit(f, h, pt, md.halving_sequence())
    npt.assert_allclose(tab.value, 0, atol=1e-14)
    assert tab.target == 0.0


def test_scaled_bracket_canonical_block_is_eps_independent():
    pt = _linear_point(3, 6)
    f = pe.trace_word("linear", [(0, ""), np.diag([1.0, -1.0, 0.0])], coef=-1j)
    h = pe.trace_word("linear", [(1, ""), np.diag([1.0, 0.0, -1.0])])
    target = md.linear_bracket(f, h, pt)
    assert abs(target) > 0.1
    for eps in (1e-1, 1e-2, 1e-3):
        npt.assert_allclose(md.scaled_decoupled_bracket(f, h, pt, eps), target, rtol=1e-13)


def test_scaled_bracket_exact_for_two_by_two_spin_invariants():
    # for n = 2 the spin space is one-dimensional and both brackets agree at every eps
    pt = _linear_point(2, 7)
    f, h = su.word_probes("linear", su.LINEAR_WORDS, sp.rng_for(7), 2)
    tab = md.scaling_bracket_limit(f, h, pt, md.halving_sequence())
    assert tab.status == "EXACT"


def test_scaled_bracket_is_even_in_eps():
    pt = _linear_point(3, 8)
    f, h = su.word_probes("linear", su.LINEAR_WORDS, sp.rng_for(8), 2, offset=1)
    for eps in (0.2, 0.05):
        a = md.scaled_decoupled_bracket(f, h, pt, eps)
        b = md.scaled_decoupled_bracket(f, h, pt, -eps)
        npt.assert_allclose(a, b, rtol=1e-12, atol=1e-13)
    tab = md.scaling_bracket_limit(f, h, pt, md.halving_sequence())
    assert tab.limit_error() < 1e-4
    npt.assert_allclose(tab.observed_order(), 2.0, atol=0.15)


@pytest.mark.parametrize("eps", [0.2, 0.1])
def test_scaled_bracket_chain_rule_matches_finite_differences(eps):
    pt = _linear_point(3, 9)
    f, h = su.word_probes("linear", su.LINEAR_WORDS, sp.rng_for(9), 2)
    a = md.scaled_decoupled_bracket(f, h, pt, eps)
    b = md.scaled_decoupled_bracket_fd(f, h, pt, eps)
    npt.assert_allclose(b, a, rtol=1e-8, atol=1e-9)


def test_dlog_unipotent_matches_finite_differences():
    rng = sp.rng_for(10)
    lam = sp.random_unipotent(rng, 4)
    Y = np.triu(sp.complex_normal(rng, (4, 4)), 1)
    h = 1e-6
    fd = (lc.log_unipotent(lam + h * Y) - lc.log_unipotent(lam - h * Y)) / (2 * h)
    npt.assert_allclose(md.dlog_unipotent(lam, Y), fd, atol=1e-8)


# ---------------------------------------------------------------- trigonometric RS

def test_rs_nu_two_by_two():
    for x in (0.3, -1.2):
        nu = md.rs_nu(md.RSContext(2, x))
        npt.assert_allclose(nu[0, 1], 2 * np.sinh(x / 2), rtol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_rs_nu_inverse_and_small_coupling(n):
    x = 0.7
    nu, nu_m = md.rs_nu(md.RSContext(n, x)), md.rs_nu(md.RSContext(n, -x))
    npt.assert_allclose(nu_m @ nu, np.eye(n), atol=1e-12)
    small = md.rs_nu(md.RSContext(n, 1e-8))
    npt.assert_allclose(small, np.eye(n), atol=1e-7)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_rs_nu_dressing_orbit_spectrum(n):
    ctx = md.RSContext(n, 0.9)
    nu = md.rs_nu(ctx)
    ev_nu = np.sort(np.linalg.eigvalsh(nu @ lc.dagger(nu)))
    ev_delta = np.sort(np.diag(md.rs_delta(ctx)).real ** 2)
    npt.assert_allclose(ev_nu, ev_delta, rtol=1e-12)


def test_rs_bplus_two_by_two_formula():
    x = 0.8
    Q = np.diag(np.exp(1j * np.array([0.7, -0.7])))
    b = md.rs_bplus(Q, md.RSContext(2, x))
    Q1, Q2 = np.diag(Q)
    expected = -2 * np.sinh(x / 2) * Q1 * np.conj(Q2) * np.conj(Q1) / (np.conj(Q1) - np.conj(Q2))
    npt.assert_allclose(b[0, 1], expected, rtol=1e-14)
    npt.assert_allclose(np.diag(b), 1)
    assert b[1, 0] == 0


@pytest.mark.parametrize("n", [3, 4, 5])
def test_rs_bplus_solves_constraint(n):
    ctx = md.RSContext(n, 0.7)
    Q = sp.random_regular_torus(sp.rng_for(n), n)
    b = md.rs_bplus(Q, ctx)
    npt.assert_allclose(np.tril(b, -1), 0)
    npt.assert_allclose(np.diag(b), 1)
    qd = np.diag(Q)
    lam = np.linalg.solve(b, np.conj(qd)[:, None] * b * qd[None, :])
    npt.assert_allclose(lam, np.linalg.inv(md.rs_nu(ctx)), atol=1e-10)
    # the closed form agrees with the general solver of the defining equation
    npt.assert_allclose(b, rd.zeta_inverse((Q, np.zeros((n, n)), np.linalg.inv(md.rs_nu(ctx))))[1], atol=1e-12)


def test_rs_bplus_diverges_at_coinciding_eigenvalues():
    ctx = md.RSContext(2, 0.5)
    prods = []
    for gap in (1e-2, 1e-3, 1e-4):
        b = md.rs_bplus(np.diag(np.exp(1j * np.array([gap / 2, -gap / 2]))), ctx)
        prods.append(abs(b[0, 1]) * gap)
    npt.assert_allclose(prods, prods[-1], rtol=1e-4)


def test_rs_theta_two_by_two_and_roundtrip():
    x, q1, p1 = 0.9, 0.4, 0.25
    ctx = md.RSContext(2, x)
    q, p = np.array([q1, -q1]), np.array([p1, -p1])
    th = md.rs_theta(q, p, ctx)
    t1 = 2 * p1 + 0.5 * np.log(1 + np.sinh(x / 2) ** 2 / np.sin(2 * q1) ** 2)
    npt.assert_allclose(th, [t1, -t1], rtol=1e-14)
    npt.assert_allclose(md.rs_momenta(q, th, ctx), p, atol=1e-14)


def test_rs_theta_weak_coupling():
    q = np.array([0.5, 0.1, -0.6])
    p = np.array([0.2, -0.5, 0.3])
    npt.assert_allclose(md.rs_theta(q, p, md.RSContext(3, 1e-9)), 2 * p, atol=1e-15)


def test_rs_hamiltonian_two_by_two():
    x, q1, t1 = 0.6, 0.35, 0.4
    ctx = md.RSContext(2, x)
    q, th = np.array([q1, -q1]), np.array([t1, -t1])
    w = np.sqrt(1 + np.sinh(x / 2) ** 2 / np.sin(2 * q1) ** 2)
    expected = np.exp(t1) * w + np.exp(-t1) * w
    npt.assert_allclose(md.rs_hamiltonian(q, th, ctx, +1), expected, rtol=1e-14)
    npt.assert_allclose(md.rs_crosscheck(q, th, ctx)["H_plus"], expected, rtol=1e-14)


def test_rs_hamiltonian_weak_coupling_limit():
    q = np.array([0.5, 0.1, -0.6])
    ctx = md.RSContext(3, 1e-9)
    for s in (+1, -1):
        assert md.rs_hamiltonian(q, np.zeros(3), ctx, s) == pytest.approx(3.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 5), x=st.sampled_from([-1.0, -0.3, 0.3, 1.0]))
def test_rs_hamiltonian_momentum_reflection(seed, n, x):
    q, th = su.random_rs_sample(sp.rng_for(seed), n)
    ctx = md.RSContext(n, x)
    npt.assert_allclose(md.rs_hamiltonian(q, -th, ctx, +1), md.rs_hamiltonian(q, th, ctx, -1), rtol=1e-13)
    rep = md.rs_crosscheck(q, th, ctx)
    assert rep["residual_plus"] < 1e-10
    assert rep["residual_minus"] < 1e-10
    assert rep["constraint"] < 1e-10


def test_rs_crosscheck_reference_point():
    q = np.array([0.6, 0.05, -0.65])
    th = np.array([0.4, -0.1, -0.3])
    rep = md.rs_crosscheck(q, th, md.RSContext(3, 0.7))
    assert max(rep["residual_plus"], rep["residual_minus"], rep["constraint"]) < 1e-10


def test_rs_variables_adapter():
    q = np.array([0.6, 0.05, -0.65])
    th = np.array([0.4, -0.1, -0.3])
    ctx = md.RSContext(3, 0.7)
    v = md.rs_variables(q, th, ctx)
    npt.assert_allclose(np.diag(v["Q"]), np.exp(2j * q))
    npt.assert_allclose(v["b"], np.diag(np.exp(np.diag(v["p"]).real)) @ v["b_plus"])
    npt.assert_allclose(v["K"] @ v["b"] @ v["Q"], np.eye(3), atol=1e-13)


def test_rs_errors():
    with pytest.raises(InvalidArgumentError):
        md.RSContext(3, 0.0)
    with pytest.raises(InvalidArgumentError):
        md.RSContext(1, 0.5)
    ctx = md.RSContext(2, 0.5)
    with pytest.raises(SingularityError):
        md.rs_hamiltonian(np.array([np.pi / 2, -np.pi / 2]), np.zeros(2), ctx)
    with pytest.raises(InvalidArgumentError):
        md.rs_hamiltonian(np.array([0.2, -0.2]), np.zeros(2), ctx, sign=0)
    with pytest.raises(InvalidArgumentError):
        md.rs_theta(np.array([0.2, 0.1]), np.zeros(2), ctx)
