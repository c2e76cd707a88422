import numpy as np
import pytest
from scipy.linalg import expm

from rigidrotor import geometry as geo
from rigidrotor import wavefunctions as wf
from rigidrotor.errors import DomainError, HbarMismatchError, TruncationLossError


@pytest.mark.parametrize("j", [0, 1, 2, 3, 5])
def test_spin_algebra(j):
    J1, J2, J3 = wf.spin_matrices(j)
    np.testing.assert_allclose(J1 @ J2 - J2 @ J1, 1j * J3, atol=1e-12)
    np.testing.assert_allclose(J1 @ J1 + J2 @ J2 + J3 @ J3, j * (j + 1) * np.eye(2 * j + 1), atol=1e-12)


@pytest.mark.parametrize("j", [1, 2, 4])
def test_small_d_against_explicit_sum(j):
    for beta in (0.3, 1.2, 2.9):
        np.testing.assert_allclose(wf.rep_axis(j, 1, beta), wf.wigner_small_d(j, beta), atol=1e-12)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_representation_is_homomorphism(j, rng):
    a, b = rng.normal(size=3), rng.normal(size=3)
    Ra, Rb = geo.exp_so3(a), geo.exp_so3(b)
    np.testing.assert_allclose(wf.rep_matrix(j, Ra @ Rb), wf.rep_matrix(j, Ra) @ wf.rep_matrix(j, Rb), atol=1e-11)
    J = wf.spin_matrices(j)
    np.testing.assert_allclose(wf.rep_exp(j, a), expm(-1j * sum(a[k] * J[k] for k in range(3))), atol=1e-12)


def test_euler_and_exponential_routes_agree(rng):
    psi = wf.WaveFunction.random(rng, 3)
    for _ in range(5):
        e = geo.EulerAngles(rng.uniform(0, 6), rng.uniform(0.1, 3.0), rng.uniform(0, 6))
        assert wf.evaluate(psi, geo.euler_to_rotation(e)) == pytest.approx(
            complex(wf.evaluate_euler(psi, e.phi, e.theta, e.psi)), abs=1e-12)


def test_basis_orthonormal_by_quadrature():
    states = [wf.WaveFunction.basis(j, m, k, jmax=2) for j in range(3) for m in range(-j, j + 1) for k in range(-j, j + 1)]
    grid = geo.euler_grid(8, 5, 8)
    G = np.array([[wf.inner_product_quadrature(a, b, grid) for b in states] for a in states])
    np.testing.assert_allclose(G, np.eye(len(states)), atol=1e-12)


def test_j0_state_is_constant():
    psi = wf.WaveFunction.basis(0, 0, 0)
    assert wf.evaluate(psi, geo.Rotation.identity()) == pytest.approx(1 / np.sqrt(8 * np.pi**2))


def test_L3_eigenvalue_and_hermiticity(rng):
    hbar = 0.7
    psi = wf.WaveFunction.basis(2, 1, -2, hbar=hbar)
    out = wf.apply_Lk(psi, 3)
    np.testing.assert_allclose(out.coefficient_vector(), -2 * hbar * psi.coefficient_vector())
    a, b = wf.WaveFunction.random(rng, 3, hbar), wf.WaveFunction.random(rng, 3, hbar)
    for k in (1, 2, 3):
        assert wf.inner_product(a, wf.apply_Lk(b, k)) == pytest.approx(
            wf.inner_product(wf.apply_Lk(a, k), b), abs=1e-12)


def test_Z_matches_finite_difference(rng):
    psi = wf.WaveFunction.random(rng, 2)
    R = geo.Rotation.random(rng).m
    h = 1e-6
    for k in (1, 2, 3):
        fd = (wf.evaluate(psi, R @ geo.axis_rotation(k, h)) - wf.evaluate(psi, R @ geo.axis_rotation(k, -h))) / (2 * h)
        assert wf.evaluate(wf.apply_Z(psi, k), R) == pytest.approx(fd, abs=1e-7)


def test_right_translate(rng):
    psi = wf.WaveFunction.random(rng, 3)
    v = rng.normal(size=3)
    R = geo.Rotation.random(rng).m
    assert wf.evaluate(wf.right_translate(psi, v), R) == pytest.approx(wf.evaluate(psi, R @ geo.exp_so3(v)), abs=1e-12)
    with pytest.raises(DomainError):
        wf.right_translate(psi, [7.0, 0, 0])


def test_spectrum_spherical_and_symmetric():
    hbar, I = 0.5, 2.0
    H = wf.hamiltonian(geo.InertiaTensor(I, I, I), hbar, jmax=4)
    for j in range(5):
        np.testing.assert_allclose(H.eigenvalues(j), hbar**2 * j * (j + 1) / (2 * I) + hbar**2 / (4 * I))
    I1, I3 = 1.0, 3.0
    H = wf.hamiltonian(geo.InertiaTensor(I1, I1, I3), 1.0, include_zero_point=False, jmax=3)
    for j in range(4):
        ref = sorted(j * (j + 1) / (2 * I1) + k * k * (1 / (2 * I3) - 1 / (2 * I1)) for k in range(-j, j + 1))
        np.testing.assert_allclose(H.eigenvalues(j), ref, atol=1e-12)
    assert H.is_hermitian()


def test_zero_point_energy():
    assert wf.zero_point_energy(geo.InertiaTensor(2, 2, 2), 1.0) == pytest.approx(1 / 8)
    assert wf.zero_point_energy(geo.InertiaTensor(1, 2, 3), 2.0) == pytest.approx(4 / 12 * (1 + 1 / 2 + 1 / 3))


def test_evolution_group_law_and_unitarity(rng):
    I = geo.InertiaTensor(1.0, 2.0, 3.0)
    psi = wf.WaveFunction.random(rng, 3)
    a = wf.schrodinger_evolve(wf.schrodinger_evolve(psi, I, 0.3), I, 0.4)
    b = wf.schrodinger_evolve(psi, I, 0.7)
    np.testing.assert_allclose(a.coefficient_vector(), b.coefficient_vector(), atol=1e-12)
    assert b.norm2() == pytest.approx(1.0, abs=1e-12)


def test_hbar_mismatch(rng):
    with pytest.raises(HbarMismatchError):
        wf.inner_product(wf.WaveFunction.random(rng, 1, 1.0), wf.WaveFunction.random(rng, 1, 0.5))


def test_json_round_trip(tmp_path, rng):
    psi = wf.WaveFunction.random(rng, 2, 0.25)
    psi.save(tmp_path / "s.json")
    back = wf.WaveFunction.load(tmp_path / "s.json")
    assert back.hbar == 0.25
    np.testing.assert_array_equal(back.coefficient_vector(), psi.coefficient_vector())


def test_projection_recovers_band_limited_state(rng):
    psi = wf.WaveFunction.random(rng, 2)
    n_phi, n_theta, n_psi = 12, 8, 12
    g = geo.euler_grid(n_phi, n_theta, n_psi)
    samples = wf.evaluate_euler(psi, *g.coords.T)
    back = wf.project_samples(samples, 3, n_phi, n_theta, n_psi)
    np.testing.assert_allclose(back.coefficient_vector(), psi.padded(3).coefficient_vector(), atol=1e-12)


def test_action_wave_projection_loss_guard():
    n = geo.ScalarField.from_matrix(lambda m: np.full(np.shape(m)[:-2], 1 / (8 * np.pi**2)))
    S = geo.ScalarField.from_matrix(lambda m: 3.0 * np.asarray(m)[..., 0, 1])
    with pytest.raises(TruncationLossError):
        wf.from_action_wave(n, S, hbar=0.1, jmax=2)
    proj = wf.from_action_wave(n, S, hbar=1.0, jmax=8)
    assert proj.truncation_loss < 1e-3
    assert proj.density_integral == pytest.approx(1.0, abs=1e-12)
