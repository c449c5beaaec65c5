import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavityed import photon as ph


def test_two_state_ladder():
    a, ad = ph.ladder_operators(ph.FockSpace(2, 1.0))
    np.testing.assert_array_equal(a, [[0, 1], [0, 0]])
    np.testing.assert_array_equal(ad, a.T)


@given(st.integers(2, 30))
def test_truncated_commutator(n):
    a, ad = ph.ladder_operators(ph.FockSpace(n, 0.1))
    c = a @ ad - ad @ a
    expected = np.eye(n)
    expected[-1, -1] = 1 - n
    np.testing.assert_allclose(c, expected, atol=1e-12)
    np.testing.assert_allclose(np.diag(ad @ a), np.arange(n), atol=1e-12)


@given(st.integers(2, 40), st.floats(1e-4, 2.0))
def test_vacuum_moments(n, w):
    ops = ph.coordinate_operators(ph.FockSpace(n, w))
    assert ops.p_coord[0, 0] == 0.0
    assert ops.p_coord_sq[0, 0] == pytest.approx(1 / (2 * w))
    assert 0.5 * -ops.d2_dp2[0, 0] + 0.5 * w * w * ops.p_coord_sq[0, 0] == pytest.approx(w / 2)
    for m in (ops.p_coord, ops.p_coord_sq, ops.d2_dp2):
        np.testing.assert_array_equal(m, m.T)


def test_p_square_is_matrix_square():
    ops = ph.coordinate_operators(ph.FockSpace(7, 0.3))
    np.testing.assert_array_equal(ops.p_coord_sq, ops.p_coord @ ops.p_coord)


def test_photon_hamiltonian():
    h = ph.photon_hamiltonian(ph.FockSpace(5, 0.00231))
    np.testing.assert_allclose(np.diag(h), [0, 0.00231, 0.00462, 0.00693, 0.00924], rtol=1e-14)
    h2 = ph.photon_hamiltonian(ph.FockSpace(5, 0.2), subtract_vacuum=False)
    assert h2[0, 0] == pytest.approx(0.1)
    np.testing.assert_allclose(np.diff(np.diag(h2)), 0.2)


def test_fock_space_validation():
    with pytest.raises(ValueError):
        ph.FockSpace(1, 0.1)
    with pytest.raises(ValueError):
        ph.FockSpace(4, 0.0)


def test_oracle_zero_dipole():
    r = ph.pinned_dipole_oracle(0.0, 0.1, 0.05)
    assert (r.ground_energy, r.expect_p, r.expect_N, r.expect_Nprime) == (0, 0, 0, 0)


def test_oracle_values():
    r = ph.pinned_dipole_oracle(1.0, 0.00231, 0.0277)
    assert r.expect_p == pytest.approx(11.99, abs=0.005)
    assert r.expect_Nprime == pytest.approx(0.1661, abs=5e-5)
    off = ph.pinned_dipole_oracle(1.0, 0.00231, 0.0277, self_polarization=False)
    assert off.ground_energy == pytest.approx(-3.836e-4, abs=5e-8)
    assert off.expect_p == r.expect_p


@pytest.mark.parametrize("sp", [True, False])
def test_oracle_against_dense_diagonalization(sp):
    w, lam, R0 = 0.05, 0.03, 2.0
    space = ph.FockSpace(30, w)
    ops = ph.coordinate_operators(space)
    shift = lam * R0 / w
    H = 0.5 * -ops.d2_dp2 + 0.5 * w * w * (ops.p_coord_sq - 2 * shift * ops.p_coord + shift ** 2 * np.eye(30))
    H -= 0.5 * w * np.eye(30)
    if not sp:
        H -= 0.5 * (lam * R0) ** 2 * np.eye(30)
    e, v = np.linalg.eigh(H)
    ref = ph.pinned_dipole_oracle(R0, w, lam, sp)
    assert e[0] == pytest.approx(ref.ground_energy, abs=1e-10)
    assert v[:, 0] @ ops.p_coord @ v[:, 0] == pytest.approx(ref.expect_p, abs=1e-9)


@given(st.integers(2, 25), st.floats(0.001, 1.0), st.floats(-5, 5))
def test_bilinear_operator_bounded_below(n, w, lamR0):
    ops = ph.coordinate_operators(ph.FockSpace(n, w))
    H = 0.5 * -ops.d2_dp2 + 0.5 * w * w * ops.p_coord_sq - lamR0 * w * ops.p_coord
    assert np.linalg.eigvalsh(H)[0] >= -0.5 * lamR0 ** 2 - 1e-9 * max(1.0, lamR0 ** 2)


def test_tail_population():
    t = np.zeros((6, 3))
    t[4, 0] = 0.6
    t[0, 1] = 0.8
    assert ph.fock_tail_population(t) == pytest.approx(0.36)
    assert ph.fock_tail_population(t, tail=1) == 0.0
