"""Charts, generators, one-forms, metric and curvature of SO(3).

Conventions
-----------
The generator matrices satisfy ``(xi_i)_{jk} = -eps_{ijk}`` so that
``xi_i @ v == cross(e_i, v)`` and ``[xi_i, xi_j] = eps_{ijk} xi_k``.
Euler angles use the X-convention for the middle rotation::

    R = expm(phi*xi_3) @ expm(theta*xi_1) @ expm(psi*xi_3)

and the exponential chart is ``R = expm(gamma_vec . xi)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.spatial.transform import Rotation as _SciRot

from .errors import DomainError, SingularChartError

TWO_PI = 2.0 * np.pi
SO3_VOLUME = 8.0 * np.pi**2

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0

XI = -LEVI_CIVITA.copy()  # XI[i] is xi_{i+1}
ELL = -XI

DEFAULT_FD_STEP = 1e-5
SINGULAR_TOL = 1e-8


def hat(v):
    """Map vectors (..., 3) to the Lie algebra element ``v . xi`` (..., 3, 3)."""
    v = np.asarray(v, dtype=float)
    return np.einsum("...i,ijk->...jk", v, XI)


def vee(a):
    """Inverse of :func:`hat` applied to the antisymmetric part of ``a``."""
    a = np.asarray(a, dtype=float)
    return 0.5 * np.stack(
        [a[..., 2, 1] - a[..., 1, 2], a[..., 0, 2] - a[..., 2, 0], a[..., 1, 0] - a[..., 0, 1]],
        axis=-1,
    )


def exp_so3(v):
    """Rodrigues formula for ``expm(v . xi)``, vectorised over leading axes."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1)[..., None, None]
    K = hat(v)
    K2 = K @ K
    small = theta < 1e-6
    t = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(t) / t)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(t)) / t**2)
    return np.eye(3) + a * K + b * K2


def axis_rotation(k: int, angle):
    """``expm(angle * xi_k)`` for k in {1, 2, 3}, vectorised over ``angle``."""
    angle = np.asarray(angle, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    one, zero = np.ones_like(angle), np.zeros_like(angle)
    if k == 1:
        rows = [[one, zero, zero], [zero, c, -s], [zero, s, c]]
    elif k == 2:
        rows = [[c, zero, s], [zero, one, zero], [-s, zero, c]]
    elif k == 3:
        rows = [[c, -s, zero], [s, c, zero], [zero, zero, one]]
    else:
        raise ValueError(f"axis index must be 1, 2 or 3, got {k}")
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def euler_matrix(phi, theta, psi):
    """Covariant Euler matrix ``R^e`` for (arrays of) Euler angles."""
    return axis_rotation(3, phi) @ axis_rotation(1, theta) @ axis_rotation(3, psi)


def matrix_to_euler(m):
    """Euler angles (phi, theta, psi) of ``R^e`` matrices, vectorised.

    On the chart singularity ``sin(theta) = 0`` the convention ``psi = 0`` is used.
    """
    m = np.asarray(m, dtype=float)
    theta = np.arccos(np.clip(m[..., 2, 2], -1.0, 1.0))
    degenerate = np.sin(theta) < 1e-12
    phi = np.where(degenerate, np.arctan2(m[..., 1, 0], m[..., 0, 0]),
                   np.arctan2(m[..., 0, 2], -m[..., 1, 2]))
    psi = np.where(degenerate, 0.0, np.arctan2(m[..., 2, 0], m[..., 2, 1]))
    return np.mod(phi, TWO_PI), theta, np.mod(psi, TWO_PI)


def polar_orthonormalize(m):
    """Closest rotation matrix to ``m`` in the Frobenius norm."""
    u, _, vt = np.linalg.svd(m)
    d = np.sign(np.linalg.det(u @ vt))
    u[..., :, -1] *= np.asarray(d)[..., None]
    return u @ vt


@dataclass(frozen=True)
class Rotation:
    """An element of SO(3), stored as a 3x3 orthogonal matrix."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"rotation matrix must be 3x3, got shape {m.shape}")
        if np.linalg.norm(m.T @ m - np.eye(3)) > 1e-8 or abs(np.linalg.det(m) - 1.0) > 1e-8:
            raise ValueError("matrix is not a proper rotation")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(np.eye(3))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Rotation":
        return cls(_SciRot.random(random_state=rng).as_matrix())

    def __matmul__(self, other: "Rotation") -> "Rotation":
        return Rotation(polar_orthonormalize(self.m @ other.m))

    @property
    def T(self) -> "Rotation":
        return Rotation(self.m.T)

    def trace(self) -> float:
        return float(np.trace(self.m))


@dataclass(frozen=True)
class EulerAngles:
    phi: float
    theta: float
    psi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.theta, self.psi])

    def to_y_convention(self) -> "EulerAngles":
        """Angles of the same rotation in the Y-convention used in quantum texts."""
        return EulerAngles(np.mod(self.phi + np.pi / 2, TWO_PI), self.theta,
                           np.mod(self.psi - np.pi / 2, TWO_PI))

    @classmethod
    def from_y_convention(cls, phi: float, theta: float, psi: float) -> "EulerAngles":
        return cls(np.mod(phi - np.pi / 2, TWO_PI), theta, np.mod(psi + np.pi / 2, TWO_PI))


@dataclass(frozen=True)
class AxisAngle:
    """Exponential-chart coordinates ``gamma_vec = gamma * g``."""

    gamma_vec: np.ndarray

    def __post_init__(self):
        v = np.array(self.gamma_vec, dtype=float).reshape(3)
        if np.linalg.norm(v) > np.pi + 1e-12:
            raise DomainError("rotation angle must not exceed pi")
        v.setflags(write=False)
        object.__setattr__(self, "gamma_vec", v)

    @property
    def gamma(self) -> float:
        return float(np.linalg.norm(self.gamma_vec))

    @property
    def axis(self) -> np.ndarray:
        g = self.gamma
        return self.gamma_vec / g if g > 0 else np.array([0.0, 0.0, 1.0])

    @property
    def alpha(self) -> float:
        g = self.axis
        return float(np.mod(np.arctan2(g[1], g[0]), TWO_PI))

    @property
    def beta(self) -> float:
        return float(np.arccos(np.clip(self.axis[2], -1.0, 1.0)))

    @classmethod
    def from_angles(cls, gamma: float, alpha: float, beta: float) -> "AxisAngle":
        g = np.array([np.cos(alpha) * np.sin(beta), np.sin(alpha) * np.sin(beta), np.cos(beta)])
        return cls(gamma * g)


@dataclass(frozen=True)
class InertiaTensor:
    I1: float
    I2: float
    I3: float

    def __post_init__(self):
        if min(self.I1, self.I2, self.I3) <= 0:
            raise DomainError("moments of inertia must be strictly positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.I1, self.I2, self.I3], dtype=float)

    @property
    def is_spherical(self) -> bool:
        return self.I1 == self.I2 == self.I3


@dataclass(frozen=True)
class ScalarField:
    """A scalar function on SO(3).

    ``on_rotation`` takes a 3x3 matrix.  ``on_euler`` (optional) takes
    ``(phi, theta, psi)`` and is what the analytic generator path
    differentiates; ``grad_euler`` may supply exact chart partials.
    """

    on_rotation: Callable[[np.ndarray], complex]
    on_euler: Optional[Callable[[float, float, float], complex]] = None
    grad_euler: Optional[Callable[[float, float, float], np.ndarray]] = field(default=None)

    def __call__(self, R) -> complex:
        return self.on_rotation(_as_matrix(R))

    @classmethod
    def from_euler(cls, fn, grad=None) -> "ScalarField":
        def on_rotation(m):
            return fn(*matrix_to_euler(m))

        return cls(on_rotation, fn, grad)

    @classmethod
    def from_matrix(cls, fn) -> "ScalarField":
        return cls(fn, lambda p, t, s: fn(euler_matrix(p, t, s)))


def _as_matrix(R) -> np.ndarray:
    return R.m if isinstance(R, Rotation) else np.asarray(R, dtype=float)


# ---------------------------------------------------------------- chart maps


def euler_to_rotation(e: EulerAngles, convention: str = "covariant_e") -> Rotation:
    m = euler_matrix(e.phi, e.theta, e.psi)
    if convention == "covariant_e":
        return Rotation(m)
    if convention == "contravariant_q":
        # R^q = exp(psi l3) exp(theta l1) exp(phi l3) with l = -xi
        return Rotation(axis_rotation(3, -e.psi) @ axis_rotation(1, -e.theta) @ axis_rotation(3, -e.phi))
    raise ValueError(f"unknown convention {convention!r}")


def rotation_to_euler(R) -> EulerAngles:
    phi, theta, psi = matrix_to_euler(_as_matrix(R))
    return EulerAngles(float(phi), float(theta), float(psi))


def _canonical_pi_axis(v):
    """At gamma = pi, flip ``v`` so its first nonzero component is positive."""
    v = np.array(v, dtype=float)
    gamma = np.linalg.norm(v, axis=-1)
    at_pi = gamma > np.pi - 1e-9
    if not np.any(at_pi):
        return v
    flat = v.reshape(-1, 3)
    mask = at_pi.reshape(-1)
    for idx in np.nonzero(mask)[0]:
        comp = flat[idx]
        nz = np.nonzero(np.abs(comp) > 1e-12)[0]
        if nz.size and comp[nz[0]] < 0:
            flat[idx] = -comp
    return flat.reshape(v.shape)


def matrix_to_rotvec(m):
    """Exponential-chart vectors of rotation matrices, vectorised, with ``|v| <= pi``."""
    m = np.asarray(m, dtype=float)
    v = _SciRot.from_matrix(m.reshape(-1, 3, 3)).as_rotvec().reshape(m.shape[:-2] + (3,))
    return _canonical_pi_axis(v)


def rotation_to_axis_angle(R) -> AxisAngle:
    return AxisAngle(matrix_to_rotvec(_as_matrix(R)))


def axis_angle_to_rotation(a: AxisAngle) -> Rotation:
    return Rotation(exp_so3(a.gamma_vec))


def axis_angle_to_euler(a: AxisAngle, tol: float = 1e-6) -> EulerAngles:
    """Closed-form exponential-to-Euler conversion.

    Near ``theta in {0, pi}`` the closed-form ratios for tan(phi) and
    tan(psi) degenerate and the matrix route is used instead.
    """
    gamma, alpha, beta = a.gamma, a.alpha, a.beta
    sb, cb = np.sin(beta), np.cos(beta)
    sg, cg = np.sin(gamma), np.cos(gamma)
    ca, sa = np.cos(alpha), np.sin(alpha)
    cos_theta = 1.0 - 2.0 * sb**2 * np.sin(gamma / 2) ** 2
    theta = float(np.arccos(np.clip(cos_theta, -1.0, 1.0)))
    if np.sin(theta) < tol or sb < tol:
        return rotation_to_euler(axis_angle_to_rotation(a))
    phi = np.arctan2(cb * (1 - cg) * ca + sg * sa, sg * ca - cb * (1 - cg) * sa)
    psi = np.arctan2(cb * (1 - cg) * ca - sg * sa, cb * (1 - cg) * sa + sg * ca)
    return EulerAngles(float(np.mod(phi, TWO_PI)), theta, float(np.mod(psi, TWO_PI)))


# ---------------------------------------------------------------- generators

_Y_NAMES = {"Y1": 0, "Y2": 1, "Y3": 2}
_Z_NAMES = {"Z1": 0, "Z2": 1, "Z3": 2}


def generator_coefficients(which: str, phi: float, theta: float, psi: float) -> np.ndarray:
    """Components of Y_k or Z_k in the coordinate basis (d_phi, d_theta, d_psi)."""
    st, ct = np.sin(theta), np.cos(theta)
    if abs(st) < SINGULAR_TOL:
        raise SingularChartError(f"generator {which} undefined in the Euler chart at sin(theta)=0")
    if which == "Y1":
        return np.array([-np.sin(phi) * ct / st, np.cos(phi), np.sin(phi) / st])
    if which == "Y2":
        return np.array([np.cos(phi) * ct / st, np.sin(phi), -np.cos(phi) / st])
    if which == "Y3":
        return np.array([1.0, 0.0, 0.0])
    if which == "Z1":
        return np.array([np.sin(psi) / st, np.cos(psi), -np.sin(psi) * ct / st])
    if which == "Z2":
        return np.array([np.cos(psi) / st, -np.sin(psi), -np.cos(psi) * ct / st])
    if which == "Z3":
        return np.array([0.0, 0.0, 1.0])
    raise ValueError(f"unknown generator {which!r}")


def euler_gradient(f: ScalarField, e: EulerAngles, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    if f.grad_euler is not None:
        return np.asarray(f.grad_euler(e.phi, e.theta, e.psi))
    if f.on_euler is None:
        raise ValueError("analytic path needs a field given in Euler angles")
    q = e.as_array()
    grad = []
    for a in range(3):
        dq = np.zeros(3)
        dq[a] = h
        grad.append((f.on_euler(*(q + dq)) - f.on_euler(*(q - dq))) / (2 * h))
    return np.array(grad)


def apply_generator(f: ScalarField, which: str, R, method: str = "finite_difference",
                    h: float = DEFAULT_FD_STEP):
    """Apply a left (Y_k) or right (Z_k) translation generator to ``f`` at ``R``."""
    if method == "analytic":
        e = R if isinstance(R, EulerAngles) else rotation_to_euler(R)
        coeff = generator_coefficients(which, e.phi, e.theta, e.psi)
        return coeff @ euler_gradient(f, e, h)
    if method != "finite_difference":
        raise ValueError(f"unknown method {method!r}")
    m = euler_matrix(R.phi, R.theta, R.psi) if isinstance(R, EulerAngles) else _as_matrix(R)
    if which in _Z_NAMES:
        k = _Z_NAMES[which] + 1
        plus, minus = m @ axis_rotation(k, h), m @ axis_rotation(k, -h)
    elif which in _Y_NAMES:
        k = _Y_NAMES[which] + 1
        plus, minus = axis_rotation(k, h) @ m, axis_rotation(k, -h) @ m
    else:
        raise ValueError(f"unknown generator {which!r}")
    return (f.on_rotation(plus) - f.on_rotation(minus)) / (2 * h)


def apply_generator_pair(f: ScalarField, first: str, second: str, R, h: float = 1e-4):
    """``first(second f)`` at ``R`` by a four-point mixed difference.

    The outer operator is applied last, so for right generators the
    translate is ``R e^{s xi_first} e^{t xi_second}``.
    """
    m = _as_matrix(R) if not isinstance(R, EulerAngles) else euler_matrix(R.phi, R.theta, R.psi)

    def shifted(s, t):
        out = m
        names = (first, second)
        steps = (s, t)
        left = [(n, st) for n, st in zip(names, steps) if n in _Y_NAMES]
        right = [(n, st) for n, st in zip(names, steps) if n in _Z_NAMES]
        # right translations act as R -> R e^{s xi_a} e^{t xi_b}
        for n, st in right:
            out = out @ axis_rotation(_Z_NAMES[n] + 1, st)
        # left translations act as R -> e^{t xi_b} e^{s xi_a} R
        for n, st in left:
            out = axis_rotation(_Y_NAMES[n] + 1, st) @ out
        return f.on_rotation(out)

    return (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4 * h * h)


def generator_commutator_residual(f: ScalarField, i: int, j: int, kind: str, R,
                                  h: float = 1e-4) -> float:
    """|([A_i, A_j] - c eps_ijk A_k) f| for the pairs (Y,Y), (Z,Z), (Y,Z).

    ``kind`` is ``"YY"``, ``"ZZ"`` or ``"YZ"``; indices are 1-based.
    """
    a, b = kind[0], kind[1]
    lhs = (apply_generator_pair(f, f"{a}{i}", f"{b}{j}", R, h)
           - apply_generator_pair(f, f"{b}{j}", f"{a}{i}", R, h))
    if kind == "YZ":
        rhs = 0.0
    else:
        sign = 1.0 if kind == "ZZ" else -1.0
        rhs = 0.0
        for k in range(1, 4):
            eps = LEVI_CIVITA[i - 1, j - 1, k - 1]
            if eps:
                rhs += sign * eps * apply_generator(f, f"{a}{k}", R, "finite_difference")
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------- one-forms


def zeta_matrix(e: EulerAngles) -> np.ndarray:
    """Rows are the one-forms zeta_1..3 in the (d_phi, d_theta, d_psi) basis."""
    return _zeta(e.phi, e.theta, e.psi)


def _zeta(phi, theta, psi):
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(psi), np.cos(psi)
    return np.array([
        [st * sp, cp, 0.0],
        [st * cp, -sp, 0.0],
        [ct, 0.0, 1.0],
    ])


def exterior_derivative(form: Callable[[np.ndarray], np.ndarray], q, h: float = DEFAULT_FD_STEP):
    """Components ``(d w)_{ab} = d_a w_b - d_b w_a`` of a one-form by central differences."""
    q = np.asarray(q, dtype=float)
    grad = np.zeros((3, 3))  # grad[a, b] = d_a w_b
    for a in range(3):
        dq = np.zeros(3)
        dq[a] = h
        grad[a] = (np.asarray(form(q + dq)) - np.asarray(form(q - dq))) / (2 * h)
    return grad - grad.T


def wedge(u, v) -> np.ndarray:
    u, v = np.asarray(u), np.asarray(v)
    return np.outer(u, v) - np.outer(v, u)


def structure_equation_residual(i: int, e: EulerAngles, h: float = DEFAULT_FD_STEP) -> float:
    """Max-norm of ``d zeta_i + zeta_j ^ zeta_k`` for cyclic (i, j, k), 1-based ``i``."""
    if abs(np.sin(e.theta)) < SINGULAR_TOL:
        raise SingularChartError("structure equations evaluated at sin(theta)=0")
    i0 = i - 1
    j0, k0 = (i0 + 1) % 3, (i0 + 2) % 3
    dz = exterior_derivative(lambda q: _zeta(*q)[i0], e.as_array(), h)
    Z = zeta_matrix(e)
    return float(np.max(np.abs(dz + wedge(Z[j0], Z[k0]))))


def volume_form_coefficient(e: EulerAngles) -> float:
    """Coefficient of d_phi ^ d_theta ^ d_psi in zeta_1 ^ zeta_2 ^ zeta_3."""
    return float(np.linalg.det(zeta_matrix(e)))


def metric_euler(e_or_q, inertia: InertiaTensor) -> np.ndarray:
    """Metric ``B = sum_k I_k zeta_k (x) zeta_k`` in the Euler coordinate basis."""
    q = e_or_q.as_array() if isinstance(e_or_q, EulerAngles) else np.asarray(e_or_q, dtype=float)
    Z = _zeta(*q)
    return Z.T @ np.diag(inertia.as_array()) @ Z


# ---------------------------------------------------------------- curvature


def christoffel_table(inertia: InertiaTensor) -> np.ndarray:
    """``G[i, j, k] = -(I_j - I_k) eps_ijk / I_i`` in the left-invariant frame.

    This symmetric table is twice the symmetric part of the Levi-Civita
    connection; the geodesic equation uses it with a factor 1/2 (see
    :func:`rigidrotor.dynamics.geodesic_rhs`).
    """
    I = inertia.as_array()
    return -(I[None, :, None] - I[None, None, :]) * LEVI_CIVITA / I[:, None, None]


def levi_civita_connection(inertia: InertiaTensor) -> np.ndarray:
    """Full connection coefficients ``nabla_{Z_j} Z_k = sum_i C[i,j,k] Z_i`` (Koszul formula)."""
    I = inertia.as_array()
    return LEVI_CIVITA * (I[:, None, None] - I[None, :, None] + I[None, None, :]) / (2 * I[:, None, None])


def _coordinate_christoffel(metric, q, h):
    """Gamma^a_{bc} of a coordinate metric by central differences."""
    g = metric(q)
    ginv = np.linalg.inv(g)
    dg = np.zeros((3, 3, 3))  # dg[c, a, b] = d_c g_ab
    for c in range(3):
        dq = np.zeros(3)
        dq[c] = h
        dg[c] = (metric(q + dq) - metric(q - dq)) / (2 * h)
    # Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)
    lower = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    return np.einsum("ad,dbc->abc", ginv, lower)


def scalar_curvature(metric: Callable[[np.ndarray], np.ndarray], q, h: float = 1e-4) -> float:
    """Scalar curvature of a coordinate metric at ``q`` by nested finite differences."""
    q = np.asarray(q, dtype=float)
    G = _coordinate_christoffel(metric, q, h)
    dG = np.zeros((3, 3, 3, 3))  # dG[c, a, b, d] = d_c Gamma^a_bd
    for c in range(3):
        dq = np.zeros(3)
        dq[c] = h
        dG[c] = (_coordinate_christoffel(metric, q + dq, h)
                 - _coordinate_christoffel(metric, q - dq, h)) / (2 * h)
    # R^a_{bcd} = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
    riemann = (np.einsum("cadb->abcd", dG) - np.einsum("dacb->abcd", dG)
               + np.einsum("ace,edb->abcd", G, G) - np.einsum("ade,ecb->abcd", G, G))
    ricci = np.einsum("abad->bd", riemann)
    return float(np.einsum("bd,bd->", np.linalg.inv(metric(q)), ricci))


def spherical_metric(q) -> np.ndarray:
    """Unit-inertia kinetic metric in Euler coordinates: g_pp = g_tt = g_ss = 1, g_ps = cos(theta)."""
    c = np.cos(q[1])
    return np.array([[1.0, 0.0, c], [0.0, 1.0, 0.0], [c, 0.0, 1.0]])


def curvature(inertia: InertiaTensor, point=(0.3, 1.1, 0.7)) -> dict:
    """Christoffel table and, for a spherical rotor, the numerically computed scalar curvature."""
    out = {"christoffel": christoffel_table(inertia), "scalar": None}
    if inertia.is_spherical:
        out["scalar"] = scalar_curvature(spherical_metric, point)
    return out


# ---------------------------------------------------------------- quadrature


def j0(x):
    return np.sinc(np.asarray(x) / np.pi)


def haar_weight(gamma):
    """Density of the Haar measure in the exponential chart, ``j0(gamma/2)**2``."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0) or np.any(gamma > np.pi + 1e-12):
        raise DomainError("gamma must lie in [0, pi]")
    return j0(gamma / 2) ** 2


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and weights for integration over SO(3) or the exponential-chart ball.

    ``coords`` holds the chart coordinates (one row per node):
    (phi, theta, psi) for the Euler chart and the Cartesian gamma vector
    for the exponential chart.  Weights include the Haar density, so
    ``weights.sum()`` is the SO(3) volume.
    """

    chart: str
    coords: np.ndarray
    weights: np.ndarray
    shape: tuple

    @property
    def size(self) -> int:
        return len(self.weights)

    def rotations(self) -> np.ndarray:
        if self.chart == "euler":
            return euler_matrix(*self.coords.T)
        return exp_so3(self.coords)

    def integrate(self, values) -> complex:
        # fixed left-to-right order over the node list keeps sums reproducible
        values = np.asarray(values)
        return np.sum(self.weights * values, axis=-1)


def euler_grid(n_phi: int, n_theta: int, n_psi: int) -> QuadratureGrid:
    """Trapezoid in phi and psi, Gauss-Legendre in cos(theta)."""
    for n in (n_phi, n_theta, n_psi):
        if n <= 0:
            raise ValueError("resolution must be positive")
    phi = TWO_PI * np.arange(n_phi) / n_phi
    psi = TWO_PI * np.arange(n_psi) / n_psi
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x[::-1])
    wx = wx[::-1]
    P, T, S = np.meshgrid(phi, theta, psi, indexing="ij")
    W = (TWO_PI / n_phi) * (TWO_PI / n_psi) * np.broadcast_to(wx[None, :, None], P.shape)
    coords = np.stack([P.ravel(), T.ravel(), S.ravel()], axis=1)
    return QuadratureGrid("euler", coords, W.ravel().copy(), (n_phi, n_theta, n_psi))


def ball_grid(n_gamma: int, n_beta: int, n_alpha: int, gamma_max: float = np.pi,
              radial_weight: Optional[Callable] = None) -> QuadratureGrid:
    """Product rule on ``|gamma_vec| <= gamma_max``.

    Gauss-Legendre radially, Gauss-Legendre in cos(beta), trapezoid in
    alpha.  The default radial weight ``gamma**2 j0(gamma/2)**2`` makes the
    weights integrate against the Haar measure; pass ``radial_weight`` to
    override (``lambda g: g**2`` gives plain Lebesgue measure).
    """
    for n in (n_gamma, n_beta, n_alpha):
        if n <= 0:
            raise ValueError("resolution must be positive")
    xg, wg = np.polynomial.legendre.leggauss(n_gamma)
    gamma = 0.5 * gamma_max * (xg + 1.0)
    wg = 0.5 * gamma_max * wg
    rw = radial_weight(gamma) if radial_weight is not None else 4.0 * np.sin(gamma / 2) ** 2
    xb, wb = np.polynomial.legendre.leggauss(n_beta)
    alpha = TWO_PI * np.arange(n_alpha) / n_alpha
    G, B, A = np.meshgrid(gamma, xb, alpha, indexing="ij")
    sb = np.sqrt(1.0 - B**2)
    vec = np.stack([G * np.cos(A) * sb, G * np.sin(A) * sb, G * B], axis=-1).reshape(-1, 3)
    W = (wg * rw)[:, None, None] * wb[None, :, None] * (TWO_PI / n_alpha)
    W = np.broadcast_to(W, G.shape).ravel().copy()
    return QuadratureGrid("exponential", vec, W, (n_gamma, n_beta, n_alpha))


def so3_quadrature(chart: str = "euler", resolution=None) -> QuadratureGrid:
    """Quadrature over SO(3) in the Euler or exponential chart.

    ``resolution`` is either a 3-tuple of node counts or an integer band
    limit ``L``; the Euler grid is then exact for products of Wigner
    functions with total degree up to ``L``.
    """
    if chart == "euler":
        if resolution is None:
            resolution = 16
        if np.isscalar(resolution):
            L = int(resolution)
            if L <= 0:
                raise ValueError("resolution must be positive")
            resolution = (L + 1, L // 2 + 1, L + 1)
        return euler_grid(*resolution)
    if chart == "exponential":
        if resolution is None:
            resolution = (32, 24, 48)
        if np.isscalar(resolution):
            L = int(resolution)
            if L <= 0:
                raise ValueError("resolution must be positive")
            resolution = (L, L, 2 * L)
        return ball_grid(*resolution)
    raise ValueError(f"unknown chart {chart!r}")
