import numpy as np
import pytest

from rigidrotor import coherence as coh
from rigidrotor import geometry as geo
from rigidrotor import wavefunctions as wf
from rigidrotor.errors import DomainError

SPHERE = geo.InertiaTensor(1.0, 1.0, 1.0)


def chart_function(v):
    # smooth test function of the exponential-chart vector
    v = np.asarray(v)
    return np.sin(v[0]) * v[1] + np.cos(v[2]) * v[0] ** 2 + 0.3 * v[1] * v[2]


def test_f_curly():
    assert coh.f_curly(0.0) == 1.0
    g = np.array([1e-5, 0.3, 2.0, 5.0])
    np.testing.assert_allclose(coh.f_curly(g), g / 2 / np.tan(g / 2), rtol=1e-12)
    with pytest.raises(DomainError):
        coh.f_curly(2 * np.pi)


@pytest.mark.parametrize("v", [[0.3, -0.2, 0.5], [1.0, 1.2, -0.9], [2.5, 0.1, 0.3]])
def test_chart_generators_match_group_definition(v):
    ops = coh.GammaChartOperators(1e-5)
    np.testing.assert_allclose(ops.Y(chart_function, v), coh.chart_generator_by_definition(chart_function, v, "left"), atol=1e-7)
    np.testing.assert_allclose(ops.Z(chart_function, v), coh.chart_generator_by_definition(chart_function, v, "right"), atol=1e-7)
    np.testing.assert_allclose(ops.Y(chart_function, v) - ops.Z(chart_function, v), ops.lam(chart_function, v), atol=1e-12)


def test_chart_generators_at_origin_are_gradient():
    ops = coh.GammaChartOperators()
    np.testing.assert_allclose(ops.Y(chart_function, [0, 0, 0]), ops.gradient(chart_function, [0, 0, 0]))
    np.testing.assert_allclose(ops.angular(chart_function, [0, 0, 0]), 0.0)


@pytest.mark.parametrize("gamma", [0.05, 1.0, 2.5, 3.0])
def test_b_product_rule_holds_for_large_gamma(gamma, rng):
    psi = wf.WaveFunction.random(rng, 2)
    R = geo.Rotation.random(rng)
    g = rng.normal(size=3)
    g *= gamma / np.linalg.norm(g)
    np.testing.assert_allclose(coh.apply_b(psi, R, g, "product_rule"), coh.apply_b(psi, R, g), atol=1e-7)


def test_constant_state_is_annihilated(rng):
    psi = wf.WaveFunction.basis(0, 0, 0)
    R = geo.Rotation.random(rng)
    np.testing.assert_allclose(coh.apply_b(psi, R, [0.3, 0.1, -0.2], "product_rule"), 0.0, atol=1e-15)
    res = coh.liouville_residual(coh.evolved_triple(psi, geo.InertiaTensor(1, 2, 3)), geo.InertiaTensor(1, 2, 3), R, [0.3, 0.1, -0.2])
    assert abs(res) < 1e-12


def test_lambda_intertwining(rng):
    psi = wf.WaveFunction.random(rng, 3)
    R = geo.Rotation.random(rng)
    for sign in (1.0, -1.0):
        assert coh.lambda_intertwining_residual(psi, R, [0.7, -1.1, 0.4], sign) < 1e-5


def test_f_tilde_w_domain_and_origin(rng):
    psi = wf.WaveFunction.random(rng, 1)
    R = geo.Rotation.random(rng)
    assert coh.f_tilde_w(psi, R, [0, 0, 0]) == pytest.approx(abs(wf.evaluate(psi, R)) ** 2)
    with pytest.raises(DomainError):
        coh.f_tilde_w(psi, R, [3.5, 0, 0])


def test_liouville_residual_vanishes_linearly(rng):
    psi = wf.WaveFunction.random(rng, 2)
    triple = coh.evolved_triple(psi, SPHERE)
    R = geo.Rotation.random(rng)
    g = rng.normal(size=3)
    g /= np.linalg.norm(g)
    r = [abs(coh.liouville_residual(triple, SPHERE, R, s * g)) for s in (0.0, 0.025, 0.05, 0.1)]
    assert r[0] < 1e-6
    # the leading correction is first order in |gamma|
    assert r[1] < r[2] < r[3]
    assert r[2] / r[3] == pytest.approx(0.5, abs=0.05)


def test_defect_residual_grows_linearly(rng):
    psi = wf.WaveFunction.random(rng, 2)
    R = geo.Rotation.random(rng)
    g = np.array([0.01, 0.0, 0.0])
    vals = []
    for eps in (0.01, 0.02, 0.04):
        triple = coh.evolved_triple(psi, geo.InertiaTensor(1 + eps, 1 + eps, 1 + eps))
        vals.append(abs(coh.liouville_residual(triple, SPHERE, R, g)))
    base = abs(coh.liouville_residual(coh.evolved_triple(psi, SPHERE), SPHERE, R, g))
    excess = np.array(vals) - base
    assert excess[1] / excess[0] == pytest.approx(2.0, rel=0.1)
    assert excess[2] / excess[1] == pytest.approx(2.0, rel=0.1)


def test_stable_residual_agrees_with_fixed_step(rng):
    psi = wf.WaveFunction.random(rng, 1)
    R = geo.Rotation.random(rng)
    g = [0.05, 0.02, -0.01]
    a = coh.stable_liouville_residual(psi, SPHERE, R, g)
    b = coh.liouville_residual(coh.evolved_triple(psi, SPHERE, 0.0, 1e-4), SPHERE, R, g)
    assert a == pytest.approx(b, abs=1e-8)


def test_schrodinger_residual(rng):
    I = geo.InertiaTensor(1.0, 2.0, 3.0)
    psi = wf.WaveFunction.random(rng, 3)
    r = [coh.schrodinger_residual(coh.evolved_triple(psi, I, 0.0, dt), I) for dt in (1e-3, 5e-4, 2.5e-4)]
    assert r[-1] < 1e-6
    assert r[0] / r[1] == pytest.approx(4.0, rel=0.05)
    assert r[1] / r[2] == pytest.approx(4.0, rel=0.05)
    frozen = coh.schrodinger_residual(coh.frozen_triple(psi), I)
    H = wf.hamiltonian(I, 1.0, True, 3)
    assert frozen == pytest.approx(np.sqrt(H.apply(psi).norm2()))
    # flipping the zero-point flag only adds a phase rate along psi
    tr = coh.evolved_triple(psi, I, 0.0, 2.5e-4, include_zero_point=False)
    a = coh.schrodinger_residual(tr, I, True, project_out_state=True)
    b = coh.schrodinger_residual(tr, I, False, project_out_state=True)
    assert a == pytest.approx(b, abs=1e-12)
    assert coh.schrodinger_residual(tr, I, True) == pytest.approx(wf.zero_point_energy(I, 1.0), abs=2e-6)


def test_scan_and_crossover(rng):
    psi = wf.WaveFunction.random(rng, 1)
    rows = coh.scan(psi, SPHERE, [0.01, 0.1, 0.5], np.random.default_rng(1), n_points=2)
    assert [r.gamma for r in rows] == [0.01, 0.1, 0.5]
    assert rows[0].max_abs < rows[-1].max_abs
    assert coh.crossover(rows, rows[1].max_abs * 0.99) == 0.1
    assert coh.crossover(rows, 1.0) is None
