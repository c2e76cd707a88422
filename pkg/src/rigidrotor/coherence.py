"""Transformed Wigner distribution and the Liouville/Schroedinger residual.

With ``gamma_vec = hbar r`` the momentum transform of f_W is

    f~_W(R, gamma) = j0^2(gamma/2) psi(R e^{gamma.xi/2}) psi*(R e^{-gamma.xi/2}),

and the Liouville equation becomes ``(d_t - i hbar a.b) f~_W = 0`` with
``a_i = I_i^-1 d_{gamma_i}`` and ``b_i = Z_i - sum eps_ijk gamma_j d_{gamma_k}``.
The residual here is computed from the exact ``a.b`` action; the small-gamma
approximation is never substituted in.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .geometry import (
    LEVI_CIVITA,
    InertiaTensor,
    _as_matrix,
    axis_rotation,
    exp_so3,
    matrix_to_rotvec,
)
from .wavefunctions import (
    WaveFunction,
    apply_Z,
    evaluate,
    hamiltonian,
    right_translate,
    schrodinger_evolve,
)

GAMMA_FD_STEP = 1e-4
Z_FD_STEP = 1e-4


def f_curly(gamma):
    """``f(gamma) = (gamma/2) cot(gamma/2)`` on ``[0, 2 pi)``."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or np.any(g >= 2 * np.pi):
        raise DomainError("f(gamma) needs 0 <= gamma < 2 pi")
    small = g < 1e-4
    safe = np.where(small, 1.0, g)
    out = np.where(small, 1.0 - g**2 / 12 - g**4 / 720, 0.5 * safe / np.tan(0.5 * safe))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- exponential-chart generators


@dataclass(frozen=True)
class GammaChartOperators:
    """Derivatives of a function ``F(gamma_vec)`` in the exponential chart.

    ``d_{gamma_i} = g_i d_gamma + nabla^A_i / gamma``; the Cartesian stencil is
    used directly (smooth at the origin) and ``nabla^A`` is derived from it.
    """

    h: float = GAMMA_FD_STEP

    def gradient(self, F: Callable, gamma_vec) -> np.ndarray:
        v = np.asarray(gamma_vec, dtype=float)
        eye = np.eye(3)
        return np.array([(F(v + self.h * eye[i]) - F(v - self.h * eye[i])) / (2 * self.h)
                         for i in range(3)])

    def angular(self, F: Callable, gamma_vec) -> np.ndarray:
        """``nabla^A F = gamma (grad F - g (g . grad F))``."""
        v = np.asarray(gamma_vec, dtype=float)
        grad = self.gradient(F, v)
        gam = np.linalg.norm(v)
        if gam == 0:
            return np.zeros(3, dtype=grad.dtype)
        g = v / gam
        return gam * (grad - g * (g @ grad))

    def lam(self, F: Callable, gamma_vec) -> np.ndarray:
        """``lambda = g x nabla^A``, equal to ``gamma_vec x grad F``."""
        v = np.asarray(gamma_vec, dtype=float)
        return np.cross(v, self.gradient(F, v))

    def _assemble(self, F, gamma_vec, sign: float) -> np.ndarray:
        v = np.asarray(gamma_vec, dtype=float)
        gam = np.linalg.norm(v)
        grad = self.gradient(F, v)
        if gam == 0:
            return grad
        g = v / gam
        nab = gam * (grad - g * (g @ grad))
        return grad + (f_curly(gam) - 1) / gam * nab + sign * 0.5 * np.cross(g, nab)

    def Y(self, F: Callable, gamma_vec) -> np.ndarray:
        """Left-translation generators in the exponential chart."""
        return self._assemble(F, gamma_vec, +1.0)

    def Z(self, F: Callable, gamma_vec) -> np.ndarray:
        """Right-translation generators in the exponential chart."""
        return self._assemble(F, gamma_vec, -1.0)


def chart_generator_by_definition(F: Callable, gamma_vec, side: str, h: float = 1e-6) -> np.ndarray:
    """``d/dt F(log(e^{t xi_i} e^{gamma.xi}))`` (left) or with the factor on the right."""
    m = exp_so3(np.asarray(gamma_vec, dtype=float))
    out = []
    for k in (1, 2, 3):
        if side == "left":
            plus, minus = axis_rotation(k, h) @ m, axis_rotation(k, -h) @ m
        elif side == "right":
            plus, minus = m @ axis_rotation(k, h), m @ axis_rotation(k, -h)
        else:
            raise ValueError("side must be 'left' or 'right'")
        out.append((F(matrix_to_rotvec(plus)) - F(matrix_to_rotvec(minus))) / (2 * h))
    return np.array(out)


# ---------------------------------------------------------------- f~_W and the a, b operators


def _translate(psi: WaveFunction, m: np.ndarray, gamma_vec, sign: float) -> complex:
    """``(U_{sign gamma} psi)(R) = psi(R e^{sign gamma.xi/2})``."""
    return evaluate(right_translate(psi, sign * 0.5 * np.asarray(gamma_vec, dtype=float)), m)


def f_tilde_w(psi: WaveFunction, R, gamma_vec) -> complex:
    """``j0^2(gamma/2) psi(R e^{gamma.xi/2}) psi*(R e^{-gamma.xi/2})``."""
    v = np.asarray(gamma_vec, dtype=float)
    if np.linalg.norm(v) > np.pi + 1e-12:
        raise DomainError("|gamma| must not exceed pi")
    m = _as_matrix(R)
    j0 = np.sinc(np.linalg.norm(v) / (2 * np.pi))
    return j0**2 * _translate(psi, m, v, 1) * np.conj(_translate(psi, m, v, -1))


def apply_b(psi: WaveFunction, R, gamma_vec, route: str = "finite_difference",
            h_z: float = Z_FD_STEP, h_gamma: float = GAMMA_FD_STEP) -> np.ndarray:
    """``(b_1, b_2, b_3) f~_W`` at ``(R, gamma)``.

    ``route='finite_difference'`` applies ``Z_i`` and ``d_gamma`` by differences;
    ``route='product_rule'`` uses ``b_i f~ = j0^2 [(U_g Z_i psi)(U_-g psi*) + (U_g psi)(U_-g Z_i psi*)]``.
    """
    m = _as_matrix(R)
    v = np.asarray(gamma_vec, dtype=float)
    if route == "product_rule":
        j0 = np.sinc(np.linalg.norm(v) / (2 * np.pi))
        plus, minus = _translate(psi, m, v, 1), np.conj(_translate(psi, m, v, -1))
        out = []
        for k in (1, 2, 3):
            z = apply_Z(psi, k)
            out.append(j0**2 * (_translate(z, m, v, 1) * minus + plus * np.conj(_translate(z, m, v, -1))))
        return np.array(out)
    if route != "finite_difference":
        raise ValueError(f"unknown route {route!r}")
    ops = GammaChartOperators(h_gamma)
    lam = ops.lam(lambda u: f_tilde_w(psi, m, u), v)
    zf = np.array([(f_tilde_w(psi, m @ axis_rotation(k, h_z), v)
                    - f_tilde_w(psi, m @ axis_rotation(k, -h_z), v)) / (2 * h_z) for k in (1, 2, 3)])
    return zf - lam


def apply_ab(psi: WaveFunction, inertia: InertiaTensor, R, gamma_vec, route: str = "product_rule",
             h_gamma: float = GAMMA_FD_STEP) -> complex:
    """``sum_i I_i^-1 d_{gamma_i} (b_i f~_W)`` with the outer derivative by central differences."""
    v = np.asarray(gamma_vec, dtype=float)
    if np.linalg.norm(v) + h_gamma >= np.pi:
        raise DomainError("|gamma| must stay below pi")
    I = inertia.as_array()
    eye = np.eye(3)
    total = 0.0
    for i in range(3):
        up = apply_b(psi, R, v + h_gamma * eye[i], route)[i]
        dn = apply_b(psi, R, v - h_gamma * eye[i], route)[i]
        total += (up - dn) / (2 * h_gamma) / I[i]
    return complex(total)


def lambda_intertwining_residual(psi: WaveFunction, R, gamma_vec, sign: float = 1.0,
                                 h: float = 1e-5) -> float:
    """``max_i |lambda_i U psi - (Z_i U psi - U Z_i psi)|`` with ``U = U_{sign gamma}``."""
    m = _as_matrix(R)
    v = np.asarray(gamma_vec, dtype=float)
    ops = GammaChartOperators(h)
    lam = ops.lam(lambda u: _translate(psi, m, u, sign), v)
    worst = 0.0
    for k in (1, 2, 3):
        z_of_u = (_translate(psi, m @ axis_rotation(k, h), v, sign)
                  - _translate(psi, m @ axis_rotation(k, -h), v, sign)) / (2 * h)
        u_of_z = _translate(apply_Z(psi, k), m, v, sign)
        worst = max(worst, abs(lam[k - 1] - (z_of_u - u_of_z)))
    return worst


# ---------------------------------------------------------------- residuals


@dataclass(frozen=True)
class TimeTriple:
    """States at ``t - dt``, ``t`` and ``t + dt``."""

    minus: WaveFunction
    center: WaveFunction
    plus: WaveFunction
    dt: float


def evolved_triple(psi0: WaveFunction, inertia: InertiaTensor, t: float = 0.0, dt: float = 1e-3,
                   include_zero_point: bool = True) -> TimeTriple:
    """Sample exact Schroedinger evolution under ``inertia`` around time ``t``."""
    ev = lambda s: schrodinger_evolve(psi0, inertia, s, include_zero_point)
    return TimeTriple(ev(t - dt), ev(t), ev(t + dt), dt)


def frozen_triple(psi: WaveFunction, dt: float = 1e-3) -> TimeTriple:
    return TimeTriple(psi, psi, psi, dt)


def liouville_residual(psi_t: TimeTriple, inertia: InertiaTensor, R, gamma_vec,
                       route: str = "product_rule") -> complex:
    """``(d_t - i hbar a.b) f~_W`` at ``(R, gamma)`` with a central time difference."""
    hbar = psi_t.center.hbar
    dft = (f_tilde_w(psi_t.plus, R, gamma_vec) - f_tilde_w(psi_t.minus, R, gamma_vec)) / (2 * psi_t.dt)
    return complex(dft - 1j * hbar * apply_ab(psi_t.center, inertia, R, gamma_vec, route))


def stable_liouville_residual(psi0: WaveFunction, inertia: InertiaTensor, R, gamma_vec,
                              evolve_inertia: Optional[InertiaTensor] = None, dt: float = 1e-2,
                              rtol: float = 1e-3, max_halvings: int = 8) -> complex:
    """Halve the time step until the residual is stable to ``rtol`` (or an absolute 1e-12)."""
    ev = evolve_inertia or inertia
    prev = liouville_residual(evolved_triple(psi0, ev, 0.0, dt), inertia, R, gamma_vec)
    for _ in range(max_halvings):
        dt /= 2
        cur = liouville_residual(evolved_triple(psi0, ev, 0.0, dt), inertia, R, gamma_vec)
        if abs(cur - prev) <= max(rtol * abs(cur), 1e-12):
            return cur
        prev = cur
    return prev


def schrodinger_residual(psi_t: TimeTriple, inertia: InertiaTensor, include_zero_point: bool = True,
                         project_out_state: bool = False) -> float:
    """``||d_t psi + i H psi / hbar||`` in the coefficient norm.

    With ``project_out_state`` the component along ``psi`` is removed first,
    which makes the value blind to global phase rates such as the zero-point term.
    """
    c = psi_t.center
    H = hamiltonian(inertia, c.hbar, include_zero_point, c.jmax)
    dpsi = (psi_t.plus - psi_t.minus).scaled(1 / (2 * psi_t.dt))
    res = dpsi + H.apply(c).scaled(1j / c.hbar)
    if project_out_state:
        nrm = c.norm2()
        overlap = sum(np.vdot(x, y) for x, y in zip(c.blocks, res.blocks)) / nrm
        res = res - c.scaled(overlap)
    return float(np.sqrt(res.norm2()))


@dataclass(frozen=True)
class ScanRow:
    gamma: float
    max_abs: float
    mean_abs: float
    samples: int


def scan(psi0: WaveFunction, inertia: InertiaTensor, gammas: Sequence[float], rng: np.random.Generator,
         n_points: int = 4, dt: float = 1e-3, evolve_inertia: Optional[InertiaTensor] = None) -> list[ScanRow]:
    """Residual statistics over random (R, direction) pairs at each |gamma|."""
    from scipy.spatial.transform import Rotation as _R

    triple = evolved_triple(psi0, evolve_inertia or inertia, 0.0, dt)
    mats = _R.random(n_points, random_state=rng).as_matrix()
    dirs = rng.normal(size=(n_points, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rows = []
    for gam in gammas:
        vals = np.array([abs(liouville_residual(triple, inertia, m, gam * d)) for m, d in zip(mats, dirs)])
        rows.append(ScanRow(float(gam), float(vals.max()), float(vals.mean()), n_points))
    return rows


def crossover(rows: Sequence[ScanRow], threshold: float) -> Optional[float]:
    """Smallest scanned |gamma| whose worst residual exceeds ``threshold`` (None if never)."""
    for row in rows:
        if row.max_abs > threshold:
            return row.gamma
    return None


__all__ = [
    "f_curly", "GammaChartOperators", "chart_generator_by_definition", "f_tilde_w", "apply_b",
    "apply_ab", "lambda_intertwining_residual", "TimeTriple", "evolved_triple", "frozen_triple",
    "liouville_residual", "stable_liouville_residual", "schrodinger_residual", "ScanRow", "scan",
    "crossover",
]
