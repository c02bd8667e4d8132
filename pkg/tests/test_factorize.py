import warnings

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from plspin import factorize as fz
from plspin import lie_core as lc
from plspin import sampling as sp
from plspin.errors import ConditioningWarning, DomainError, InvalidArgumentError


def test_iwasawa_identity():
    f = fz.iwasawa(np.eye(3))
    for A in (f.g_L, f.b_R, f.b_L, f.g_R):
        npt.assert_allclose(A, np.eye(3), atol=1e-15)


def test_iwasawa_of_borel_and_unitary():
    rng = sp.rng_for(11)
    b = sp.random_borel(rng, 3)
    f = fz.iwasawa(np.linalg.inv(b))
    npt.assert_allclose(f.g_L, np.eye(3), atol=1e-13)
    npt.assert_allclose(f.b_R, b, atol=1e-13)
    g = sp.random_su(rng, 3)
    f = fz.iwasawa(g)
    npt.assert_allclose(f.g_L, g, atol=1e-13)
    npt.assert_allclose(f.b_R, np.eye(3), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 6))
def test_iwasawa_reassembly(seed, n):
    K = sp.random_sl(sp.rng_for(seed), n)
    f = fz.iwasawa(K)
    npt.assert_allclose(f.g_L @ np.linalg.inv(f.b_R), K, atol=1e-11)
    npt.assert_allclose(f.b_L @ np.linalg.inv(f.g_R), K, atol=1e-11)
    for g in (f.g_L, f.g_R):
        fz.check_unitary(g)
    for b in (f.b_L, f.b_R):
        fz.check_borel(b)


def test_iwasawa_warns_when_ill_conditioned():
    K = np.diag([1e7, 1e7, 1e-14])
    with pytest.warns(ConditioningWarning):
        fz.iwasawa(K)


def test_iwasawa_rejects_det():
    with pytest.raises(InvalidArgumentError):
        fz.iwasawa(2 * np.eye(2))


def test_nu_inverse_roundtrip_and_hand_value():
    L = np.array([[2.0, 1.0], [1.0, 1.0]])
    b = fz.nu_inverse(L)
    npt.assert_allclose(b, [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)
    b = sp.random_borel(sp.rng_for(12), 4)
    npt.assert_allclose(fz.nu_inverse(fz.nu(b)), b, atol=1e-12)


def test_nu_inverse_rejects_indefinite():
    with pytest.raises(DomainError):
        fz.nu_inverse(np.diag([-1.0, -1.0]))


def test_split_join_borel():
    b = sp.random_borel(sp.rng_for(13), 3)
    p, bplus = fz.split_borel(b)
    npt.assert_allclose(np.diag(bplus), 1)
    npt.assert_allclose(np.trace(p), 0, atol=1e-14)
    npt.assert_allclose(fz.join_borel(p, bplus), b, atol=1e-14)


def test_dress_is_action_and_moment_equivariant():
    rng = sp.rng_for(14)
    b = sp.random_borel(rng, 3)
    e1, e2 = sp.random_su(rng, 3), sp.random_su(rng, 3)
    npt.assert_allclose(fz.dress(np.eye(3), b), b, atol=1e-13)
    lhs = fz.dress(e1 @ e2, b)
    rhs = fz.dress(e1, fz.dress(e2, b))
    npt.assert_allclose(lhs, rhs, atol=1e-12)
    npt.assert_allclose(fz.nu(fz.dress(e1, b)), e1 @ fz.nu(b) @ lc.dagger(e1), atol=1e-12)


def test_dress_infinitesimal_matches_fd():
    rng = sp.rng_for(15)
    b = sp.random_borel(rng, 3)
    X = sp.random_algebra(rng, 3, "G")
    h = 1e-6
    import scipy.linalg as sla
    fd = (fz.dress(sla.expm(h * X), b) - fz.dress(sla.expm(-h * X), b)) / (2 * h)
    npt.assert_allclose(fz.dress_infinitesimal(X, b), fd, atol=1e-8)


def test_model_maps_roundtrip():
    K = sp.random_sl(sp.rng_for(16), 3)
    npt.assert_allclose(fz.m1_inverse(fz.m1(K)), K, atol=1e-11)
    npt.assert_allclose(fz.m_inverse(fz.m(K)), K, atol=1e-11)


def test_quasi_adjoint_is_action_with_equivariant_moment():
    rng = sp.rng_for(17)
    K = sp.random_sl(rng, 3)
    e1, e2 = sp.random_su(rng, 3), sp.random_su(rng, 3)
    lhs = fz.quasi_adjoint(e1 @ e2, K)
    rhs = fz.quasi_adjoint(e1, fz.quasi_adjoint(e2, K))
    npt.assert_allclose(lhs, rhs, atol=1e-11)
    npt.assert_allclose(fz.moment_map(fz.quasi_adjoint(e1, K)),
                        fz.dress(e1, fz.moment_map(K)), atol=1e-11)


def test_poisson_action_bM_matches_quasi_adjoint():
    rng = sp.rng_for(18)
    K = sp.random_sl(rng, 3)
    eta = sp.random_su(rng, 3)
    a = fz.poisson_action_bM(eta, fz.m(K))
    b = fz.m(fz.quasi_adjoint(eta, K))
    for x, y in zip(a, b):
        npt.assert_allclose(x, y, atol=1e-11)


def test_hat_action_moment_equivariance():
    rng = sp.rng_for(19)
    L1, L2 = sp.random_positive(rng, 3), sp.random_positive(rng, 3)
    eta = sp.random_su(rng, 3)
    lhs = fz.hat_moment(fz.hat_action(eta, (L1, L2)))
    rhs = fz.dress(eta, fz.hat_moment((L1, L2)))
    npt.assert_allclose(lhs, rhs, atol=1e-11)


def test_regularity():
    r = fz.regularity(np.diag(np.exp(1j * np.array([0.5, -0.5]))))
    assert r.regular
    npt.assert_allclose(r.margin, 2 * np.sin(0.5), rtol=1e-14)
    assert not fz.regularity(np.eye(3), "hermitian").regular
    assert fz.regularity(np.diag([2.0, 1.0, 0.5]), "hermitian").margin == pytest.approx(0.5)
    with pytest.raises(InvalidArgumentError):
        fz.regularity(np.eye(2), "bogus")
