"""Property tests for the structural invariants."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rigidrotor import coherence as coh
from rigidrotor import dynamics as dyn
from rigidrotor import geometry as geo
from rigidrotor import wavefunctions as wf

settings.register_profile("rotor", max_examples=40, deadline=None)
settings.load_profile("rotor")

coord = st.floats(-3.0, 3.0, allow_nan=False)
vec3 = st.tuples(coord, coord, coord).map(np.array)
small_vec = st.tuples(*[st.floats(-1.0, 1.0)] * 3).map(np.array)
spins = st.integers(0, 3)
seeds = st.integers(0, 2**31 - 1)


def _in_ball(v):
    return np.linalg.norm(v) < np.pi - 1e-3


@given(vec3)
def test_exp_log_round_trip(v):
    if not _in_ball(v):
        v = v * (np.pi - 0.1) / np.linalg.norm(v)
    m = geo.exp_so3(v)
    np.testing.assert_allclose(m @ m.T, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(geo.matrix_to_rotvec(m), v, atol=1e-9)


@given(st.floats(0, 2 * np.pi), st.floats(0.01, np.pi - 0.01), st.floats(0, 2 * np.pi))
def test_euler_round_trip(phi, theta, psi):
    m = geo.euler_matrix(phi, theta, psi)
    e = geo.rotation_to_euler(m)
    np.testing.assert_allclose(geo.euler_matrix(e.phi, e.theta, e.psi), m, atol=1e-10)


@given(spins, vec3, vec3)
def test_representation_homomorphism(j, a, b):
    Ua, Ub = wf.rep_exp(j, a), wf.rep_exp(j, b)
    np.testing.assert_allclose(Ua @ Ua.conj().T, np.eye(2 * j + 1), atol=1e-12)
    ab = geo.exp_so3(a) @ geo.exp_so3(b)
    np.testing.assert_allclose(wf.rep_matrix(j, ab), Ua @ Ub, atol=1e-9)


@given(seeds, st.integers(0, 2), st.integers(1, 3))
def test_body_frame_operator_hermitian(seed, jmax, k):
    rng = np.random.default_rng(seed)
    a, b = (wf.WaveFunction.random(rng, jmax, 0.7).normalize() for _ in range(2))
    lhs = wf.inner_product(a, wf.apply_Lk(b, k))
    rhs = wf.inner_product(wf.apply_Lk(a, k), b)
    assert abs(lhs - rhs) < 1e-12


@given(seeds, st.floats(-5, 5))
def test_evolution_is_unitary(seed, t):
    psi = wf.WaveFunction.random(np.random.default_rng(seed), 2, 1.0).normalize()
    out = wf.schrodinger_evolve(psi, geo.InertiaTensor(1.0, 2.0, 3.0), t)
    assert out.norm2() == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0.0, 6.0))
def test_f_curly_series(g):
    # (g/2) cot(g/2) = 1 - g^2/12 - g^4/720 - ...
    val = float(coh.f_curly(g))
    assert val <= 1.0 + 1e-15
    if g < 0.3:
        assert val == pytest.approx(1 - g**2 / 12 - g**4 / 720, abs=1e-7)
    else:
        assert val == pytest.approx(g / 2 / np.tan(g / 2), rel=1e-12)


@given(seeds, small_vec)
def test_lambda_intertwining(seed, g):
    rng = np.random.default_rng(seed)
    psi = wf.WaveFunction.random(rng, 1, 1.0).normalize()
    assert coh.lambda_intertwining_residual(psi, geo.Rotation.random(rng), 0.9 * g) < 1e-5


@given(vec3, vec3)
def test_lie_poisson_brackets(rho, angles):
    p = dyn.PhaseSpacePoint(geo.Rotation(geo.exp_so3(0.5 * angles)), rho)
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        br = dyn.poisson_bracket(lambda m, r, i=i: r[i], lambda m, r, j=j: r[j], p)
        assert br == pytest.approx(-rho[k], abs=1e-6)
    # the Casimir commutes with every body momentum
    cas = dyn.poisson_bracket(lambda m, r: r @ r, lambda m, r: r[0], p)
    assert abs(cas) < 1e-6
