import numpy as np
import pytest
from scipy.integrate import quad

from rigidrotor import distributions as dist
from rigidrotor import geometry as geo
from rigidrotor import wavefunctions as wf
from rigidrotor.errors import DomainError, HbarMismatchError, UnderResolvedError


def brute_force_wigner(psi, R, rho, grid):
    # direct product over the ball, evaluating each half translate separately
    m = geo.Rotation(R).m if not isinstance(R, geo.Rotation) else R.m
    plus = wf.evaluate(psi, m @ geo.exp_so3(grid.coords / 2))
    minus = wf.evaluate(psi, m @ geo.exp_so3(-grid.coords / 2))
    phase = np.exp(-1j * grid.coords @ rho / psi.hbar)
    return np.sum(grid.weights * phase * plus * np.conj(minus)) / (2 * np.pi * psi.hbar) ** 3


def test_wigner_matches_direct_quadrature(rng):
    psi = wf.WaveFunction.random(rng, 2, 0.8)
    grid = geo.ball_grid(16, 12, 24)
    w = dist.WignerDistribution(psi, grid)
    R = geo.Rotation.random(rng)
    for rho in ([0.1, -0.3, 0.2], [1.0, 0.5, -0.4]):
        rho = np.array(rho)
        ref = brute_force_wigner(psi, R, rho, grid)
        re, im = w.evaluate(R, rho)
        assert re == pytest.approx(ref.real, abs=1e-13)
        assert abs(ref.imag) < 1e-13 and abs(im) < 1e-13


@pytest.mark.parametrize("rho", [0.0, 0.7, 2.5])
def test_constant_state_radial_oracle(rho):
    w = dist.WignerDistribution(wf.WaveFunction.basis(0, 0, 0))
    val = dist.wigner_eval(w, (geo.Rotation.identity(), np.array([0.0, 0.0, rho])))
    assert val == pytest.approx(dist.wigner_radial_oracle(rho), rel=1e-10)


def test_under_resolved_guard():
    w = dist.WignerDistribution(wf.WaveFunction.basis(1, 0, 0), geo.ball_grid(8, 6, 12))
    with pytest.raises(UnderResolvedError):
        w.evaluate(geo.Rotation.identity(), [50.0, 0.0, 0.0])


def test_f_tilde_domain(rng):
    psi = wf.WaveFunction.random(rng, 1)
    with pytest.raises(DomainError):
        dist.f_tilde(psi, geo.Rotation.identity(), [4.0, 0.0, 0.0])
    R = geo.Rotation.random(rng)
    assert dist.f_tilde(psi, R, [0, 0, 0]) == pytest.approx(abs(wf.evaluate(psi, R)) ** 2)


def test_window_kernel_against_radial_transform():
    sigma, N = 0.4, 8
    for g in (0.0, 0.3, 1.1):
        if g == 0:
            integrand = lambda u: u * u * dist.window(u, sigma, N)
        else:
            integrand = lambda u: u * u * dist.window(u, sigma, N) * np.sin(g * u) / (g * u)
        ref = 4 * np.pi * quad(integrand, 0, 200 / sigma, limit=400)[0] / (2 * np.pi) ** 3
        h = dist.window_kernel(np.array([0.0, 0.0, g]), sigma, N)["h"]
        assert h == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_window_kernel_derivatives_by_difference():
    sigma, g, e = 0.3, np.array([0.2, -0.1, 0.15]), 1e-5
    k = dist.window_kernel(g, sigma)
    for i in range(3):
        d = np.zeros(3)
        d[i] = e
        hp, hm = dist.window_kernel(g + d, sigma)["h"], dist.window_kernel(g - d, sigma)["h"]
        assert k["grad"][i] == pytest.approx((hp - hm) / (2 * e), rel=1e-6)
        assert k["hess_diag"][i] == pytest.approx((hp - 2 * k["h"] + hm) / e**2, rel=1e-4)


def test_window_is_flat_near_origin():
    assert dist.window(0.0, 0.5) == 1.0
    # 1 - W = O(s^9) is far below double rounding here
    assert 1 - dist.window(1.0, 0.1) < 1e-15


def test_momentum_marginal_converges_with_extent(rng):
    psi = wf.WaveFunction.random(rng, 2)
    w = dist.WignerDistribution(psi)
    R = geo.Rotation.random(rng)
    exact = abs(wf.evaluate(psi, R)) ** 2
    errs = [abs(dist.momentum_marginal(w, R, dist.MomentumGrid.for_state(psi, s, 3)) - exact) / exact
            for s in (1.0, 2.0, 4.0)]
    assert errs[0] < 2e-2
    assert errs[0] > errs[1] > errs[2]


def test_fourier_momentum_nyquist_and_point_mass():
    grid = dist.MomentumGrid.cartesian(2.0, 9)
    with pytest.raises(UnderResolvedError):
        dist.fourier_momentum(np.ones(len(grid.weights)), grid, [10.0, 0, 0])
    assert dist.fourier_point_mass([1.0, 2.0, 0.0], [0.5, 0.0, 1.0]) == pytest.approx(np.exp(0.5j))
    # transform of a discrete delta at a node
    vals = np.zeros(len(grid.weights))
    i = 5
    vals[i] = 1 / grid.weights[i]
    r = np.array([0.3, -0.2, 0.1])
    assert dist.fourier_momentum(vals, grid, r) == pytest.approx(np.exp(1j * grid.nodes[i] @ r))


def test_moment_routes_agree(rng):
    psi = wf.WaveFunction.random(rng, 2)
    a = dist.phase_space_moments(psi)
    b = dist.phase_space_moments(psi, r_integration="quadrature")
    assert a.norm == pytest.approx(1.0, abs=1e-8)
    np.testing.assert_allclose(a.rho, b.rho, atol=1e-10)
    np.testing.assert_allclose(a.rho2, b.rho2, atol=1e-10)


@pytest.mark.parametrize("j,m,k", [(0, 0, 0), (1, 0, 1), (2, -1, -2), (3, 2, 1)])
def test_rho3_quantized(j, m, k):
    hbar = 0.5
    psi = wf.WaveFunction.basis(j, m, k, hbar)
    rep = dist.expect_rho(psi, 3)
    assert rep.quadrature == pytest.approx(hbar * k, abs=1e-6 * hbar)
    assert rep.gap < 1e-6 * hbar


def test_rho2_shift_and_zero_point(rng):
    psi = wf.WaveFunction.random(rng, 2, 0.7)
    mom = dist.phase_space_moments(psi)
    for k in (1, 2, 3):
        rep = dist.expect_rho2(psi, k, mom)
        assert rep.quadrature - wf.expectation_Lk2(psi, k) == pytest.approx(0.49 / 6, abs=1e-6)
    I = geo.InertiaTensor(1.0, 2.0, 3.0)
    rep = dist.expect_H(psi, I, mom)
    plain = wf.hamiltonian(I, 0.7, include_zero_point=False, jmax=2).expectation(psi)
    assert rep.quadrature - plain == pytest.approx(wf.zero_point_energy(I, 0.7), rel=1e-6)


def test_overlap_haar_pairing(rng):
    a, b = wf.WaveFunction.random(rng, 1), wf.WaveFunction.random(rng, 1)
    rep = dist.overlap(a, b, resolution=(16, 12, 24))
    assert rep.rhs == pytest.approx(abs(wf.inner_product(a, b)) ** 2 / (2 * np.pi) ** 3)
    assert rep.lhs_haar_pairing == pytest.approx(rep.rhs, rel=1e-8)
    with pytest.raises(HbarMismatchError):
        dist.overlap(a, wf.WaveFunction.random(rng, 1, 0.5))


def test_f0_expectations():
    for amp in (0.5, -0.3):
        a = dist.reference_action_wave(amp)
        assert dist.f0_expectation(a, "1") == pytest.approx(1.0, abs=1e-10)
        # rho_3 = Z_3 R_12 = -R_11 and <R_11^2> = 1/3
        assert dist.f0_expectation(a, "rho3") == pytest.approx(-amp / 3, abs=1e-8)
    with pytest.raises(DomainError):
        dist.reference_action_wave(1.5)
    with pytest.raises(ValueError):
        dist.observable("H")


def test_classical_limit_gap_shrinks():
    rows = dist.classical_limit_gap(dist.reference_action_wave(), [1.0, 0.5], "rho3")
    assert rows[0].jmax == 2 and rows[1].jmax == 4
    assert rows[1].gap < rows[0].gap
    assert all(r.truncation_loss < 1e-3 for r in rows)


# ---------------------------------------------------------------- separable exact solutions


def separable_wave(I1, I3, E=2.0, M=0.3, K=0.5, n_scale=1.0, dn=0.0):
    """Symmetric-top HJ solution S = M phi + K psi + W(theta) - E t with its stationary density."""
    c = 2 * I1 * (E - K**2 / (2 * I3)) - K**2
    Wp = lambda t: np.sqrt(c - (M - K * np.cos(t)) ** 2 / np.sin(t) ** 2)
    W = lambda t: quad(Wp, np.pi / 2, t, epsabs=1e-13, epsrel=1e-13)[0]
    S = geo.ScalarField.from_euler(lambda p, t, s: M * p + K * s + W(t))
    n = geo.ScalarField.from_euler(lambda p, t, s: n_scale / (np.sin(t) * Wp(t)))
    return dist.ActionWave(n, S, geo.ScalarField.from_euler(lambda p, t, s: dn),
                           geo.ScalarField.from_euler(lambda p, t, s: -E))


@pytest.mark.parametrize("I", [(1.0, 1.0, 1.0), (1.0, 1.0, 2.0)])
def test_exact_solution_residuals(I, rng):
    inertia = geo.InertiaTensor(*I)
    a = separable_wave(I[0], I[2])
    for _ in range(2):
        R = geo.euler_to_rotation(geo.EulerAngles(rng.uniform(0, 6), rng.uniform(1.2, 1.9), rng.uniform(0, 6)))
        cont, hj = dist.hj_residual(a, inertia, R)
        assert abs(cont) < 1e-5 and hj < 1e-5
        assert dist.fle_residual(a, inertia, R, 0.5 * rng.normal(size=3)) < 1e-5


def test_residuals_detect_wrong_density(rng):
    inertia = geo.InertiaTensor(1.0, 1.0, 2.0)
    bad = separable_wave(1.0, 2.0, dn=0.1)
    R = geo.euler_to_rotation(geo.EulerAngles(0.4, 1.3, 2.0))
    cont, _ = dist.hj_residual(bad, inertia, R)
    assert cont == pytest.approx(0.1, abs=1e-5)
    assert dist.fle_residual(bad, inertia, R, [0.2, 0.1, -0.3]) == pytest.approx(0.1, abs=1e-5)
