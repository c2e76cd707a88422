"""Classical rigid-body motion on T*SO(3).

The state is ``(R, rho)`` with ``rho`` the intrinsic angular momentum.
Euler's equations read ``omega'_k = rho_k / I_k`` and
``rho_dot = rho x omega'``, while the orientation follows
``R_dot = R sum_i omega'_i xi_i``.  Orientation is integrated as a matrix
and pulled back onto SO(3) after every step by a polar (Newton) correction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StepTooLargeError
from .geometry import (
    EulerAngles,
    InertiaTensor,
    Rotation,
    axis_rotation,
    levi_civita_connection,
)

STEP_GUARD = 0.5


@dataclass(frozen=True)
class PhaseSpacePoint:
    """Orientation and intrinsic angular momentum."""

    R: Rotation
    rho: np.ndarray

    def __post_init__(self):
        if not isinstance(self.R, Rotation):
            object.__setattr__(self, "R", Rotation(np.asarray(self.R, dtype=float)))
        rho = np.asarray(self.rho, dtype=float)
        if rho.shape != (3,) or not np.all(np.isfinite(rho)):
            raise ValueError("rho must be a finite 3-vector")
        object.__setattr__(self, "rho", rho)

    @property
    def lab_momentum(self) -> np.ndarray:
        """Lab-frame components ``l_i = sum_k R_ik rho_k``."""
        return self.R.m @ self.rho


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step samples; ``R`` has shape (n, 3, 3) and ``rho`` (n, 3)."""

    t: np.ndarray
    R: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)

    def point(self, i: int) -> PhaseSpacePoint:
        return PhaseSpacePoint(Rotation(self.R[i]), self.rho[i])

    def energy(self, inertia: InertiaTensor) -> np.ndarray:
        return np.sum(self.rho**2 / (2 * inertia.as_array()), axis=-1)

    def casimir(self) -> np.ndarray:
        return np.sum(self.rho**2, axis=-1)


def euler_rhs(p: PhaseSpacePoint, inertia: InertiaTensor) -> tuple[np.ndarray, np.ndarray]:
    """Angular velocity ``omega'`` and ``rho_dot = rho x omega'``."""
    omega = p.rho / inertia.as_array()
    return omega, np.cross(p.rho, omega)


def _hat(w):
    # single-vector version of geometry.hat without the einsum overhead
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def _rk4(R, y, dt, rates):
    """One RK4 step for ``R_dot = R hat(a(y))`` and ``y_dot = b(y)``; ``rates(y) -> (a, b)``."""
    a1, b1 = rates(y)
    a2, b2 = rates(y + 0.5 * dt * b1)
    a3, b3 = rates(y + 0.5 * dt * b2)
    a4, b4 = rates(y + dt * b3)
    # the orientation stages reuse the same step structure on the matrix equation
    k1 = R @ _hat(a1)
    k2 = (R + 0.5 * dt * k1) @ _hat(a2)
    k3 = (R + 0.5 * dt * k2) @ _hat(a3)
    k4 = (R + dt * k3) @ _hat(a4)
    R_new = R + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    # one Newton step of the polar iteration; the drift per step is far below its radius of convergence
    R_new = 1.5 * R_new - 0.5 * R_new @ R_new.T @ R_new
    return R_new, y + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4)


def _run(R0, y0, t_end, dt, rates):
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(round(t_end / dt)) if t_end > 0 else 0
    ts = dt * np.arange(n + 1)
    Rs = np.empty((n + 1, 3, 3))
    ys = np.empty((n + 1, 3))
    Rs[0], ys[0] = R0, y0
    R, y = R0, y0
    for i in range(n):
        R, y = _rk4(R, y, dt, rates)
        Rs[i + 1], ys[i + 1] = R, y
    return ts, Rs, ys


def _check_step(rho, inertia: InertiaTensor, dt: float) -> None:
    if np.linalg.norm(rho) * dt / np.min(inertia.as_array()) > STEP_GUARD:
        raise StepTooLargeError(f"|rho| dt / min(I) exceeds {STEP_GUARD}")


def integrate(p0: PhaseSpacePoint, inertia: InertiaTensor, t_end: float, dt: float,
              scheme: str = "rk4") -> Trajectory:
    """Fixed-step integration of Euler's equations together with the orientation."""
    if scheme != "rk4":
        raise ValueError(f"unsupported scheme {scheme!r}")
    _check_step(p0.rho, inertia, dt)
    I = inertia.as_array()

    def rates(rho):
        w = rho / I
        cross = np.array([rho[1] * w[2] - rho[2] * w[1], rho[2] * w[0] - rho[0] * w[2],
                          rho[0] * w[1] - rho[1] * w[0]])
        return w, cross

    ts, Rs, rhos = _run(p0.R.m, p0.rho, t_end, dt, rates)
    return Trajectory(ts, Rs, rhos)


def geodesic_rhs(e: EulerAngles, omega_prime, inertia: InertiaTensor) -> np.ndarray:
    """``omega'_dot_i = -sum_jk C^i_jk omega'_j omega'_k`` with the Levi-Civita connection.

    The frame components do not depend on the orientation ``e`` for a
    left-invariant metric; it is accepted for interface symmetry.
    """
    w = np.asarray(omega_prime, dtype=float)
    return -np.einsum("ijk,j,k->i", levi_civita_connection(inertia), w, w)


def integrate_geodesic(p0: PhaseSpacePoint, inertia: InertiaTensor, t_end: float, dt: float) -> Trajectory:
    """Integrate the geodesic flow in ``(R, omega')`` and report ``rho = I omega'``."""
    _check_step(p0.rho, inertia, dt)
    I = inertia.as_array()
    C = levi_civita_connection(inertia)

    def rates(w):
        return w, -(C @ w) @ w

    ts, Rs, ws = _run(p0.R.m, p0.rho / I, t_end, dt, rates)
    return Trajectory(ts, Rs, ws * I)


PhaseField = Callable[[np.ndarray, np.ndarray], float]


def poisson_bracket(f: PhaseField, g: PhaseField, p: PhaseSpacePoint, h: float = 1e-5) -> float:
    """``{f,g} = sum_k (Z_k f d_rho_k g - Z_k g d_rho_k f) - rho . (grad_rho f x grad_rho g)``.

    ``f`` and ``g`` take ``(R matrix, rho)``.  ``Z_k`` acts by right
    translation differences; momentum derivatives use a step
    ``h max(1, |rho|)``.
    """
    m, rho = p.R.m, p.rho
    h_rho = h * max(1.0, float(np.linalg.norm(rho)))

    def z(fn, k):
        return (fn(m @ axis_rotation(k, h), rho) - fn(m @ axis_rotation(k, -h), rho)) / (2 * h)

    def d_rho(fn):
        out = np.zeros(3)
        for k in range(3):
            dr = np.zeros(3)
            dr[k] = h_rho
            out[k] = (fn(m, rho + dr) - fn(m, rho - dr)) / (2 * h_rho)
        return out

    zf = np.array([z(f, k) for k in (1, 2, 3)])
    zg = np.array([z(g, k) for k in (1, 2, 3)])
    df, dg = d_rho(f), d_rho(g)
    return float(zf @ dg - zg @ df - rho @ np.cross(df, dg))


def hamiltonian_field(inertia: InertiaTensor) -> PhaseField:
    I = inertia.as_array()
    return lambda m, rho: float(np.sum(np.asarray(rho) ** 2 / (2 * I)))


def symmetric_top_solution(rho0, I1: float, I3: float, t) -> np.ndarray:
    """Closed-form ``rho(t)`` for ``I_1 = I_2``: rho_3 fixed, (rho_1, rho_2) rotating at ``rho_3 (1/I_3 - 1/I_1)``."""
    rho0 = np.asarray(rho0, dtype=float)
    t = np.asarray(t, dtype=float)
    Om = rho0[2] * (1 / I3 - 1 / I1)
    c, s = np.cos(Om * t), np.sin(Om * t)
    r1 = c * rho0[0] + s * rho0[1]
    r2 = -s * rho0[0] + c * rho0[1]
    return np.stack([r1, r2, np.full_like(t, rho0[2])], axis=-1)


__all__ = [
    "PhaseSpacePoint", "Trajectory", "euler_rhs", "integrate", "geodesic_rhs", "integrate_geodesic",
    "poisson_bracket", "hamiltonian_field", "symmetric_top_solution",
]
