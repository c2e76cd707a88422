import numpy as np
import pytest
from scipy.spatial.transform import Rotation as SciRot

from rigidrotor import geometry as geo
from rigidrotor.errors import DomainError, SingularChartError


def random_euler(rng, n):
    out = []
    while len(out) < n:
        t = np.arccos(rng.uniform(-1, 1))
        if 0.05 < t < np.pi - 0.05:
            out.append(geo.EulerAngles(rng.uniform(0, 2 * np.pi), t, rng.uniform(0, 2 * np.pi)))
    return out


def smooth_field():
    return geo.ScalarField.from_matrix(
        lambda m: np.asarray(m)[..., 0, 0] + 0.5 * np.asarray(m)[..., 1, 2] * np.asarray(m)[..., 2, 0]
        + np.sin(np.asarray(m)[..., 0, 1]))


def test_generators_match_cross_product():
    v, w = np.array([0.3, -1.2, 0.7]), np.array([2.0, 0.1, -0.4])
    np.testing.assert_allclose(geo.hat(v) @ w, np.cross(v, w), atol=1e-15)
    np.testing.assert_allclose(geo.vee(geo.hat(v)), v)


def test_exp_against_scipy(rng):
    v = rng.normal(size=(20, 3))
    np.testing.assert_allclose(geo.exp_so3(v), SciRot.from_rotvec(v).as_matrix(), atol=1e-13)
    # small-angle branch
    tiny = 1e-9 * rng.normal(size=3)
    np.testing.assert_allclose(geo.exp_so3(tiny), SciRot.from_rotvec(tiny).as_matrix(), atol=1e-15)


def test_euler_matrix_is_intrinsic_zxz(rng):
    for e in random_euler(rng, 10):
        ref = SciRot.from_euler("ZXZ", [e.phi, e.theta, e.psi]).as_matrix()
        np.testing.assert_allclose(geo.euler_to_rotation(e).m, ref, atol=1e-14)


def test_euler_round_trip(rng):
    for e in random_euler(rng, 20):
        back = geo.rotation_to_euler(geo.euler_to_rotation(e))
        np.testing.assert_allclose(back.as_array(), e.as_array(), atol=1e-10)


def test_contravariant_chart_is_inverse():
    e = geo.EulerAngles(0.4, 1.0, 2.2)
    a = geo.euler_to_rotation(e).m
    b = geo.euler_to_rotation(e, "contravariant_q").m
    np.testing.assert_allclose(a @ b, np.eye(3), atol=1e-14)


def test_axis_angle_closed_form_matches_matrix_route(rng):
    for _ in range(30):
        a = geo.AxisAngle.from_angles(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi), np.arccos(rng.uniform(-1, 1)))
        e = geo.axis_angle_to_euler(a)
        np.testing.assert_allclose(geo.euler_to_rotation(e).m, geo.axis_angle_to_rotation(a).m, atol=1e-10)


def test_rotvec_canonical_at_pi():
    v = geo.matrix_to_rotvec(geo.exp_so3([0.0, -np.pi, 0.0]))
    np.testing.assert_allclose(v, [0.0, np.pi, 0.0], atol=1e-12)


def test_domain_errors():
    with pytest.raises(DomainError):
        geo.EulerAngles(0.0, 4.0, 0.0)
    with pytest.raises(DomainError):
        geo.AxisAngle([4.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        geo.InertiaTensor(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        geo.Rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(SingularChartError):
        geo.generator_coefficients("Z1", 0.1, 0.0, 0.2)
    with pytest.raises(SingularChartError):
        geo.structure_equation_residual(1, geo.EulerAngles(0.0, 0.0, 0.0))


def test_right_generator_matches_derivative_of_translate():
    # Z_3 acts on psi only: d/dpsi of the field
    f = geo.ScalarField.from_euler(lambda p, t, s: np.sin(p) * np.cos(s) + t)
    e = geo.EulerAngles(0.3, 0.9, 1.4)
    val = geo.apply_generator(f, "Z3", geo.euler_to_rotation(e))
    assert val == pytest.approx(-np.sin(0.3) * np.sin(1.4), abs=1e-8)
    val = geo.apply_generator(f, "Y3", geo.euler_to_rotation(e))
    assert val == pytest.approx(np.cos(0.3) * np.cos(1.4), abs=1e-8)


@pytest.mark.parametrize("which", ["Y1", "Y2", "Y3", "Z1", "Z2", "Z3"])
def test_generator_analytic_vs_translation(which, rng):
    f = smooth_field()
    for e in random_euler(rng, 5):
        R = geo.euler_to_rotation(e)
        assert geo.apply_generator(f, which, R, "analytic") == pytest.approx(
            geo.apply_generator(f, which, R), abs=1e-7)


@pytest.mark.parametrize("kind", ["YY", "ZZ", "YZ"])
def test_commutators(kind, rng):
    f = smooth_field()
    for e in random_euler(rng, 5):
        R = geo.euler_to_rotation(e)
        for i, j in ((1, 2), (2, 3), (3, 1)):
            assert geo.generator_commutator_residual(f, i, j, kind, R) < 1e-5


def test_structure_equations_and_duality(rng):
    for e in random_euler(rng, 10):
        for i in (1, 2, 3):
            assert geo.structure_equation_residual(i, e) < 1e-6
        Zc = np.array([geo.generator_coefficients(f"Z{k}", e.phi, e.theta, e.psi) for k in (1, 2, 3)])
        np.testing.assert_allclose(geo.zeta_matrix(e) @ Zc.T, np.eye(3), atol=1e-12)


def test_metric_is_zeta_weighted_by_inertia():
    I = geo.InertiaTensor(1.0, 2.0, 3.0)
    e = geo.EulerAngles(0.2, 1.1, 0.5)
    z = geo.zeta_matrix(e)
    np.testing.assert_allclose(geo.metric_euler(e, I), z.T @ np.diag(I.as_array()) @ z, atol=1e-12)


def test_christoffel_table_values():
    # tabulated form: -(I_j - I_k) eps_ijk / I_i
    G = geo.christoffel_table(geo.InertiaTensor(1.0, 2.0, 3.0))
    assert G[0, 1, 2] == pytest.approx(1.0)
    assert G[0, 2, 1] == pytest.approx(1.0)
    assert G[1, 2, 0] == pytest.approx(-1.0)
    assert G[2, 0, 1] == pytest.approx(1 / 3)
    assert np.allclose(geo.christoffel_table(geo.InertiaTensor(2.0, 2.0, 2.0)), 0.0)


def test_levi_civita_symmetric_part_is_half_table():
    I = geo.InertiaTensor(1.0, 2.5, 4.0)
    C = geo.levi_civita_connection(I)
    np.testing.assert_allclose(C + C.transpose(0, 2, 1), geo.christoffel_table(I), atol=1e-14)


def test_scalar_curvature_spherical():
    assert geo.curvature(geo.InertiaTensor(1, 1, 1))["scalar"] == pytest.approx(1.5, abs=1e-6)
    assert geo.curvature(geo.InertiaTensor(1, 2, 3))["scalar"] is None


def test_haar_volumes():
    assert geo.so3_quadrature("euler").weights.sum() == pytest.approx(8 * np.pi**2, rel=1e-12)
    assert geo.so3_quadrature("exponential").weights.sum() == pytest.approx(8 * np.pi**2, rel=1e-12)
    plain = geo.ball_grid(16, 8, 8, radial_weight=lambda g: g**2)
    assert plain.weights.sum() == pytest.approx(4 * np.pi**4 / 3, rel=1e-12)
    with pytest.raises(DomainError):
        geo.haar_weight(4.0)


def test_quadrature_charts_agree():
    # integral of R_11^2 over SO(3) is 8 pi^2 / 3
    f = lambda m: m[..., 0, 0] ** 2
    for chart in ("euler", "exponential"):
        g = geo.so3_quadrature(chart)
        assert g.integrate(f(g.rotations())) == pytest.approx(8 * np.pi**2 / 3, rel=1e-10)
