import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from plspin import lie_core as lc
from plspin import sampling as sp
from plspin.errors import DegenerateBasisError, InvalidArgumentError


def _traceless(seed, n):
    return sp.random_algebra(sp.rng_for(seed), n)


def test_manin_split_zero():
    G, B = lc.project_manin(np.zeros((3, 3)))
    npt.assert_allclose(G, 0)
    npt.assert_allclose(B, 0)


def test_manin_split_skew_hermitian_is_fixed():
    X = sp.random_algebra(sp.rng_for(1), 3, "G")
    G, B = lc.project_manin(X)
    npt.assert_allclose(G, X, atol=1e-15)
    npt.assert_allclose(B, 0, atol=1e-15)


def test_manin_split_matches_explicit_rule():
    X = _traceless(2, 4)
    lower, diag = np.tril(X, -1), np.diag(np.diag(X))
    G_ref = lower - lower.conj().T + 1j * diag.imag
    B_ref = np.triu(X, 1) + lower.conj().T + diag.real
    G, B = lc.project_manin(X)
    npt.assert_allclose(G, G_ref, atol=1e-15)
    npt.assert_allclose(B, B_ref, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 6))
def test_manin_split_shapes_and_idempotence(seed, n):
    X = _traceless(seed, n)
    G, B = lc.project_manin(X)
    npt.assert_allclose(G + B, X, atol=1e-14)
    npt.assert_allclose(G, -G.conj().T, atol=1e-14)
    npt.assert_allclose(np.tril(B, -1), 0, atol=1e-14)
    npt.assert_allclose(np.diag(B).imag, 0, atol=1e-14)
    npt.assert_allclose(lc.pi_G(G), G, atol=1e-14)
    npt.assert_allclose(lc.pi_B(G), 0, atol=1e-14)
    npt.assert_allclose(lc.pi_B(B), B, atol=1e-14)


def test_manin_split_rejects_trace():
    with pytest.raises(InvalidArgumentError):
        lc.project_manin(np.eye(3))
    with pytest.raises(InvalidArgumentError):
        lc.project_manin(np.zeros((2, 3)))


def test_project_triangular():
    H = np.diag([1.0, -1.0])
    lo, d, up = lc.project_triangular(H)
    npt.assert_allclose(d, H)
    npt.assert_allclose(lo + up, 0)
    E12 = np.array([[0, 1], [0, 0]], dtype=complex)
    lo, d, up = lc.project_triangular(E12)
    npt.assert_allclose(up, E12)
    X = _traceless(3, 4)
    parts = lc.project_triangular(X)
    npt.assert_allclose(sum(parts), X)


def test_pairing_values():
    H = np.diag([1.0, -1.0, 0.0])
    assert lc.pairing(H, 1j * H) == pytest.approx(2.0)
    assert lc.pairing(H, np.zeros((3, 3))) == 0.0
    ctx = lc.PairingContext(3)
    assert ctx(H, 1j * H) == pytest.approx(2.0)
    with pytest.raises(InvalidArgumentError):
        lc.pairing(np.eye(2), np.eye(3))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 6))
def test_isotropy_and_ad_invariance(seed, n):
    rng = sp.rng_for(seed)
    Xg, Yg = sp.random_algebra(rng, n, "G"), sp.random_algebra(rng, n, "G")
    Xb, Yb = sp.random_algebra(rng, n, "B"), sp.random_algebra(rng, n, "B")
    assert abs(lc.pairing(Xg, Yg)) < 1e-12
    assert abs(lc.pairing(Xb, Yb)) < 1e-12
    X, Y, Z = (sp.random_algebra(rng, n) for _ in range(3))
    assert abs(lc.pairing(Z @ X - X @ Z, Y) + lc.pairing(X, Z @ Y - Y @ Z)) < 1e-10
    assert lc.pairing(X, Y) == pytest.approx(lc.pairing(Y, X), abs=1e-13)


@pytest.mark.parametrize("space", ["G", "B", "G0", "B0", "Gperp", "Bplus"])
def test_dual_basis_gram_identity(space):
    n = 4
    E = lc.space_basis(n, space)
    F = lc.space_dual_basis(n, space)
    gram = np.einsum("aij,bji->ab", E, F).imag
    npt.assert_allclose(gram, np.eye(E.shape[0]), atol=1e-12)
    for f in F:
        assert lc.in_space(f, lc.DUAL_SPACE[space])


def test_dual_basis_su2_hand_value():
    H = np.diag([1.0, -1.0])
    f = lc.dual_basis([1j * H], [H])
    npt.assert_allclose(f[0], H / 2)


def test_dual_basis_degenerate():
    H = np.diag([1.0, -1.0])
    with pytest.raises(DegenerateBasisError):
        lc.dual_basis([H], [H])


def test_space_dimensions():
    n = 5
    dims = {s: lc.space_basis(n, s).shape[0] for s in lc.SPACES}
    assert dims["full"] == 2 * (n * n - 1)
    assert dims["G"] == dims["B"] == n * n - 1
    assert dims["Bplus"] == dims["Gperp"] == n * (n - 1)


def test_coordinates_roundtrip():
    X = sp.random_algebra(sp.rng_for(4), 3, "B")
    c = lc.coordinates(X, "B")
    npt.assert_allclose(np.tensordot(c, lc.space_basis(3, "B"), axes=1), X, atol=1e-14)


def test_root_system_normalization():
    rs = lc.RootSystem(4)
    assert len(rs.positive_roots) == 6
    assert rs.simple_roots == [(0, 1), (1, 2), (2, 3)]
    for a in rs.positive_roots:
        Ea, Ema = rs.root_vector(a), rs.negative_root_vector(a)
        assert np.trace(Ea @ Ema).real == pytest.approx(2 / rs.squared_length(a))
    assert rs.evaluate((0, 2), np.array([0.3, 0.1, -0.4])) == pytest.approx(0.7)
    assert lc.killing_to_trace_ratio(3) == 6


def test_exp_algebra_cases():
    npt.assert_allclose(lc.exp_algebra(np.zeros((3, 3)), "Bplus"), np.eye(3))
    E12 = np.array([[0, 2 + 1j], [0, 0]])
    npt.assert_allclose(lc.exp_algebra(E12, "B+"), np.eye(2) + E12)
    A = sp.complex_normal(sp.rng_for(5), (3, 3))
    H = lc.traceless(A + A.conj().T)
    P = lc.exp_algebra(H, "iG")
    assert np.linalg.eigvalsh(P).min() > 0
    assert np.linalg.det(P) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidArgumentError):
        lc.exp_algebra(H, "Bplus")


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 6))
def test_nilpotent_exp_log_inverse(seed, n):
    N = np.triu(sp.complex_normal(sp.rng_for(seed), (n, n)), 1)
    U = lc.exp_nilpotent(N)
    npt.assert_allclose(lc.log_unipotent(U), N, atol=1e-12)
    import scipy.linalg as sla
    npt.assert_allclose(U, sla.expm(N), atol=1e-12)
