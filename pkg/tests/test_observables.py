import numpy as np
import pytest
from hypothesis import given, strategies as st

from cavityed import model as M
from cavityed import observables as obs
from cavityed import photon as ph
from cavityed.grid1d import ShinMetiuParams
from cavityed.linop import WaveFunction, lowest_eigenpairs

from .conftest import tiny_hydrogen, tiny_shin_metiu


def _dense_ground(model, k=1):
    h = M.build_hamiltonian(model).to_dense_kron()
    w, v = np.linalg.eigh(h)
    return [WaveFunction(v[:, i], model.dims) for i in range(k)], w[:k]


def test_parity_gives_zero_dipole():
    m = tiny_shin_metiu(params=ShinMetiuParams(Z_minus=1.0))
    (psi,), _ = _dense_ground(m)
    assert abs(obs.dipole_expectation(psi, m)) < 1e-10
    assert abs(obs.photon_coordinate_expectation(psi, m)) < 1e-10
    n = obs.reduced_density(psi, m, "electron")
    np.testing.assert_allclose(n, n[::-1], atol=1e-10)


def test_product_state_moments():
    m = tiny_hydrogen(n_fock=6)
    nx = m.dims[1]
    phi = np.exp(-0.5 * (m.electron.coordinates - 1.0) ** 2)
    phi /= np.linalg.norm(phi)
    for n in range(3):
        chi = np.zeros(m.dims[0])
        chi[n] = 1.0
        psi = np.kron(chi, phi)
        nums = obs.photon_numbers(psi, m)
        assert nums.N_naive == pytest.approx(n, abs=1e-14)
        assert obs.photon_coordinate_expectation(psi, m) == pytest.approx(0.0, abs=1e-14)
        assert obs.dipole_expectation(psi, m) == pytest.approx(-1.0, abs=1e-5)
    assert nx == m.electron.n_points


def test_uncoupled_numbers_coincide():
    m = tiny_shin_metiu(g_over_omega=0.0)
    (psi,), _ = _dense_ground(m)
    nums = obs.photon_numbers(psi, m)
    assert nums.N_physical == nums.N_naive == pytest.approx(0.0, abs=1e-14)
    f = obs.field_expectations(psi, m)
    assert f.D_perp == f.P_perp == 0.0


@pytest.mark.parametrize("sp", [True, False])
def test_pinned_dipole_observables(sp):
    # The quadratic term is a constant here, so only the energy depends on it.
    R0, w, lam = 1.5, 0.05, 0.03
    m = M.pinned_dipole_model(R0, w, lam, n_fock=40, self_polarization=sp)
    res = lowest_eigenpairs(M.build_hamiltonian(m), k=1, tol=1e-12)
    psi = res.eigenvectors[0]
    ref = ph.pinned_dipole_oracle(R0, w, lam, sp)
    nums = obs.photon_numbers(psi, m)
    assert obs.photon_coordinate_expectation(psi, m) == pytest.approx(ref.expect_p, rel=1e-9)
    assert nums.N_physical == pytest.approx(ref.expect_N, abs=1e-12)
    assert nums.N_naive == pytest.approx(ref.expect_Nprime, rel=1e-9)
    assert obs.field_expectations(psi, m).E_perp == pytest.approx(0.0, abs=1e-12)
    assert obs.dipole_expectation(psi, m) == pytest.approx(R0)


def test_densities_normalized():
    m = tiny_shin_metiu()
    (psi,), _ = _dense_ground(m)
    for axis in ("electron", "nucleus"):
        n = obs.reduced_density(psi, m, axis)
        assert np.sum(n) * m.grid(axis).spacing == pytest.approx(1.0, rel=1e-13)
        assert np.all(n >= 0)
    assert np.sum(obs.reduced_density(psi, m, "photon")) == pytest.approx(1.0)
    with pytest.raises(M.ConfigurationError):
        obs.reduced_density(psi, tiny_hydrogen(), "nucleus")


def test_mirror_image():
    # Mirroring the matter flips R and p and keeps the photon numbers.
    m = tiny_shin_metiu(params=ShinMetiuParams(Z=1.05), n_fock=6)
    (psi,), _ = _dense_ground(m)
    mirrored = M.shin_metiu_model(
        electron_box=8.0, nuclear_box=0.56, dx=0.8, dX=0.08, n_fock=6, unit="bohr",
        params=ShinMetiuParams(Z=1.05, Z_plus=1.05, Z_minus=1.0))
    (phi,), _ = _dense_ground(mirrored)
    a, b = obs.evaluate(psi, m), obs.evaluate(phi, mirrored)
    assert a.dipole_R == pytest.approx(-b.dipole_R, abs=1e-10)
    assert a.expect_p == pytest.approx(-b.expect_p, abs=1e-10)
    assert a.N_physical == pytest.approx(b.N_physical, abs=1e-10)
    np.testing.assert_allclose(a.electron_density, b.electron_density[::-1], atol=1e-10)


@pytest.mark.parametrize("factory", [tiny_shin_metiu, tiny_hydrogen])
def test_zero_field_in_eigenstates(factory):
    m = factory(n_fock=30 if factory is tiny_hydrogen else 14)
    psis, _ = _dense_ground(m, k=3) if factory is tiny_shin_metiu else (None, None)
    if psis is None:
        psis = lowest_eigenpairs(M.build_hamiltonian(m), k=3, tol=1e-12).eigenvectors
    c = m.coupling
    for psi in psis:
        f = obs.field_expectations(psi, m)
        lhs = c.omega * obs.photon_coordinate_expectation(psi, m)
        rhs = c.lam * obs.dipole_expectation(psi, m)
        assert abs(f.E_perp) < 1e-9
        assert lhs == pytest.approx(rhs, abs=1e-9)


@given(st.integers(0, 2 ** 32 - 1))
def test_physical_number_nonnegative(seed):
    m = tiny_shin_metiu(params=ShinMetiuParams(Z=1.05))
    r = np.random.default_rng(seed)
    psi = r.standard_normal(int(np.prod(m.dims)))
    psi /= np.linalg.norm(psi)
    nums = obs.photon_numbers(psi, m)
    assert nums.N_physical >= -1e-14
    assert nums.N_naive >= 0


def test_physical_number_matches_photon_energy(rng):
    # w N_physical is the expectation of the self-polarized photon block.
    m = tiny_shin_metiu()
    h_all = M.build_hamiltonian(m).to_dense_kron()
    h_mat = np.kron(np.eye(m.dims[0]), M.matter_hamiltonian(m).to_dense_kron())
    psi = rng.standard_normal(h_all.shape[0])
    psi /= np.linalg.norm(psi)
    e_ph = psi @ (h_all - h_mat) @ psi
    assert m.coupling.omega * obs.photon_numbers(psi, m).N_physical == pytest.approx(e_ph, rel=1e-10)


def test_length_gauge_required():
    m = tiny_hydrogen(gauge="coulomb")
    psi = np.ones(int(np.prod(m.dims)))
    with pytest.raises(M.ConfigurationError):
        obs.field_expectations(psi, m)
    with pytest.raises(M.ConfigurationError):
        obs.evaluate(psi, m)
    assert obs.dipole_expectation(psi / np.linalg.norm(psi), m) == pytest.approx(0.0, abs=1e-12)


def test_shape_mismatch():
    m = tiny_hydrogen()
    with pytest.raises(ValueError):
        obs.dipole_expectation(np.ones(3), m)
    with pytest.raises(ValueError):
        obs.dipole_expectation(WaveFunction(np.ones(6), (2, 3)), m)
