"""Reduction of the Wigner transform on T*R^4 to T*SU(2) and T*SO(3).

Spherical coordinates on R^4:

    x1 = r cos(theta/2) cos(nu),  x2 = r cos(theta/2) sin(nu),
    x3 = r sin(theta/2) cos(eta), x4 = r sin(theta/2) sin(eta),

with ``d^4X = r^3 sin(theta) dtheta dnu deta dr / 4``.  Canonical momenta are
the cotangent lift ``p_q = P . dX/dq``; since the coordinates are
orthogonal with scale factors ``h_r = 1, h_theta = r/2, h_nu = r cos(theta/2),
h_eta = r sin(theta/2)``, the Cartesian momentum is
``P = p_r e_r + sum_q (p_q / h_q) e_q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NotOnSphereError, UnderResolvedError
from .geometry import SO3_VOLUME

SPHERE_TOL = 1e-9


@dataclass(frozen=True)
class R4Point:
    """A point of R^4 with derived spherical coordinates ``(r, theta, nu, eta)``."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.shape != (4,):
            raise ValueError("x must be a 4-vector")
        object.__setattr__(self, "x", x)

    @classmethod
    def from_spherical(cls, r: float, theta: float, nu: float, eta: float) -> "R4Point":
        return cls(spherical_to_cartesian(r, theta, nu, eta))

    @property
    def spherical(self) -> tuple[float, float, float, float]:
        x1, x2, x3, x4 = self.x
        a, b = math.hypot(x1, x2), math.hypot(x3, x4)
        return (math.hypot(a, b), 2 * math.atan2(b, a),
                math.atan2(x2, x1) % (2 * math.pi), math.atan2(x4, x3) % (2 * math.pi))


@dataclass(frozen=True)
class ReducedPoint:
    """Coordinates on T*SU(2): angles and their conjugate momenta."""

    theta: float
    nu: float
    eta: float
    p_theta: float
    p_nu: float
    p_eta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.nu, self.eta, self.p_theta, self.p_nu, self.p_eta])


def spherical_to_cartesian(r, theta, nu, eta) -> np.ndarray:
    c, s = np.cos(np.asarray(theta) / 2), np.sin(np.asarray(theta) / 2)
    return np.stack(np.broadcast_arrays(r * c * np.cos(nu), r * c * np.sin(nu),
                                        r * s * np.cos(eta), r * s * np.sin(eta)), axis=-1)


def spherical_frame(theta, nu, eta) -> np.ndarray:
    """Unit vectors ``(e_r, e_theta, e_nu, e_eta)`` as rows, shape (..., 4, 4)."""
    theta, nu, eta = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (theta, nu, eta)))
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    z = np.zeros_like(theta)
    e_r = np.stack([c * np.cos(nu), c * np.sin(nu), s * np.cos(eta), s * np.sin(eta)], axis=-1)
    e_t = np.stack([-s * np.cos(nu), -s * np.sin(nu), c * np.cos(eta), c * np.sin(eta)], axis=-1)
    e_n = np.stack([-np.sin(nu), np.cos(nu), z, z], axis=-1)
    e_e = np.stack([z, z, -np.sin(eta), np.cos(eta)], axis=-1)
    return np.stack([e_r, e_t, e_n, e_e], axis=-2)


def scale_factors(r, theta) -> np.ndarray:
    """``(h_r, h_theta, h_nu, h_eta) = (1, r/2, r cos(theta/2), r sin(theta/2))``."""
    r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
    return np.stack([np.ones_like(r), r / 2, r * np.cos(theta / 2), r * np.sin(theta / 2)], axis=-1)


def cartesian_momentum(r, theta, nu, eta, p) -> np.ndarray:
    """Cartesian ``P`` from canonical ``p = (p_r, p_theta, p_nu, p_eta)``."""
    frame = spherical_frame(theta, nu, eta)
    return np.einsum("...a,...ab->...b", np.asarray(p) / scale_factors(r, theta), frame)


def su2_from_point(x) -> np.ndarray:
    """``[[x1 + i x2, x3 - i x4], [-x3 - i x4, x1 - i x2]]`` for a unit 4-vector."""
    x = x.x if isinstance(x, R4Point) else np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > SPHERE_TOL:
        raise NotOnSphereError(f"|x| = {np.linalg.norm(x):.12g} is not 1")
    x1, x2, x3, x4 = x
    return np.array([[x1 + 1j * x2, x3 - 1j * x4], [-x3 - 1j * x4, x1 - 1j * x2]])


def su2_to_so3(U: np.ndarray) -> np.ndarray:
    """Adjoint image of ``U`` acting on traceless Hermitian 2x2 matrices (Pauli basis)."""
    sig = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    return np.array([[0.5 * np.trace(sig[a] @ U @ sig[b] @ U.conj().T).real for b in range(3)]
                     for a in range(3)])


def volume_su2(n_theta: int = 32) -> float:
    """Area of the unit S^3 by quadrature of ``sin(theta)/4`` over the angles."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = 0.5 * np.pi * (x + 1)
    w = 0.5 * np.pi * w
    # the integrand does not depend on nu or eta, so their integrals are exact
    return float(np.sum(w * np.sin(theta) / 4) * (2 * np.pi) ** 2)


def ball_volume(radius: float, n_r: int = 16, n_theta: int = 32) -> float:
    """Volume of the 4-ball by quadrature of ``r^3 sin(theta)/4``."""
    if radius <= 0:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (x + 1)
    w = 0.5 * radius * w
    return float(np.sum(w * r**3) * volume_su2(n_theta))


# ---------------------------------------------------------------- extended state


@dataclass(frozen=True)
class GaussianState:
    """``psi_e(X) = (2 pi sigma^2)^-1 exp(-|X - X0|^2 / 4 sigma^2 + i P0.X / hbar)``."""

    sigma: float
    X0: np.ndarray = field(default_factory=lambda: np.zeros(4))
    P0: np.ndarray = field(default_factory=lambda: np.zeros(4))
    hbar: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0 or self.hbar <= 0:
            raise ValueError("sigma and hbar must be positive")
        object.__setattr__(self, "X0", np.asarray(self.X0, dtype=float))
        object.__setattr__(self, "P0", np.asarray(self.P0, dtype=float))

    @property
    def momentum_width(self) -> float:
        """Standard deviation of each Cartesian momentum component."""
        return self.hbar / (2 * self.sigma)

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        d = X - self.X0
        return (np.exp(-np.sum(d**2, axis=-1) / (4 * self.sigma**2) + 1j * (X @ self.P0) / self.hbar)
                / (2 * np.pi * self.sigma**2))

    def wigner(self, X, P) -> np.ndarray:
        """Closed-form Wigner function."""
        X, P = np.asarray(X, dtype=float), np.asarray(P, dtype=float)
        s2, hb = self.sigma**2, self.hbar
        dx = np.sum((X - self.X0) ** 2, axis=-1)
        dp = np.sum((P - self.P0) ** 2, axis=-1)
        return np.exp(-dx / (2 * s2) - 2 * s2 * dp / hb**2) / (np.pi * hb) ** 4


def extended_wigner(state: GaussianState, X, P, method: str = "closed_form", n_nodes: int = 20) -> float:
    """``(2 pi)^-4 int d^4K e^{-i K.P} psi_e(X + hbar K/2) psi_e*(X - hbar K/2)``.

    ``method='quadrature'`` integrates over K with a tensor Gauss-Hermite rule
    scaled to the state's coherence length.
    """
    if method == "closed_form":
        return float(state.wigner(X, P))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    X, P = np.asarray(X, dtype=float), np.asarray(P, dtype=float)
    # the product psi(X+hK/2) psi*(X-hK/2) carries exp(-hbar^2 K^2 / 8 sigma^2)
    scale = 2 * math.sqrt(2) * state.sigma / state.hbar
    phase_extent = scale * np.max(np.abs(P - state.P0))
    if phase_extent > n_nodes:
        raise UnderResolvedError("momentum offset too large for the Gauss-Hermite rule")
    x, w = np.polynomial.hermite.hermgauss(n_nodes)
    K1 = scale * x
    grids = np.meshgrid(K1, K1, K1, K1, indexing="ij")
    K = np.stack([g.ravel() for g in grids], axis=-1)
    W = np.einsum("a,b,c,d->abcd", w, w, w, w).ravel() * scale**4
    gauss = np.exp(-np.sum(K**2, axis=-1) / scale**2)
    vals = np.exp(-1j * K @ P) * state(X + 0.5 * state.hbar * K) * np.conj(state(X - 0.5 * state.hbar * K))
    return float(np.real(np.sum(W * vals / gauss)) / (2 * np.pi) ** 4)


# ---------------------------------------------------------------- reduction


def _radial_rule(state: GaussianState, n_r: int) -> tuple[np.ndarray, np.ndarray]:
    c = np.linalg.norm(state.X0)
    lo, hi = max(0.0, c - 6 * state.sigma), c + 6 * state.sigma
    x, w = np.polynomial.legendre.leggauss(n_r)
    return 0.5 * (hi - lo) * (x + 1) + lo, 0.5 * (hi - lo) * w


def reduced_density(state: GaussianState, theta, nu, eta, p_theta, p_nu, p_eta,
                    n_r: int = 96, n_pr: int = 12) -> np.ndarray:
    """``f_SU2 = int dr int dp_r f_e(X, P)``, vectorised over broadcastable inputs."""
    theta, nu, eta, p_theta, p_nu, p_eta = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (theta, nu, eta, p_theta, p_nu, p_eta)))
    r, wr = _radial_rule(state, n_r)
    xh, wh = np.polynomial.hermite.hermgauss(n_pr)
    shape = theta.shape
    frame = spherical_frame(theta, nu, eta)  # (..., 4, 4)
    e_r = frame[..., 0, :]
    width = state.hbar / (math.sqrt(2) * state.sigma)  # f_e ~ exp(-(p_r - c)^2 / width^2)
    centre = np.einsum("...a,a->...", e_r, state.P0)
    total = np.zeros(shape)
    for ri, wri in zip(r, wr):
        X = ri * e_r
        h = scale_factors(ri, theta)
        for xk, wk in zip(xh, wh):
            p_r = centre + width * xk
            p = np.stack([p_r, p_theta, p_nu, p_eta], axis=-1)
            P = np.einsum("...a,...ab->...b", p / h, frame)
            total += wri * wk * width * np.exp(xk**2) * state.wigner(X, P)
    return total


def reduce_to_su2(state: GaussianState, q: ReducedPoint, n_r: int = 96, n_pr: int = 12) -> float:
    """Reduced distribution on T*SU(2) at one point."""
    return float(reduced_density(state, q.theta, q.nu, q.eta, q.p_theta, q.p_nu, q.p_eta, n_r, n_pr))


def reduced_total(state: GaussianState, n_theta: int = 24, n_angle: int = 24, n_r: int = 24,
                  n_p: int = 3, fold_to_so3: bool = False) -> float:
    """``int dtheta dnu deta dp_theta dp_nu dp_eta f_SU2``.

    The order is angles, then r, then the four momenta by Gauss-Hermite
    centred and scaled at each (angles, r).  With ``fold_to_so3`` the angular
    sum runs over the Euler fundamental domain and adds both SU(2)
    preimages of each rotation, with ``dnu deta = dphi dpsi / 2``.
    """
    xt, wt = np.polynomial.legendre.leggauss(n_theta)
    theta = 0.5 * np.pi * (xt + 1)
    wt = 0.5 * np.pi * wt
    a = 2 * np.pi * np.arange(n_angle) / n_angle
    wa = 2 * np.pi / n_angle
    if fold_to_so3:
        T, PHI, PSI = np.meshgrid(theta, a, a, indexing="ij")
        nu, eta = (PHI + PSI) / 2, (PHI - PSI) / 2
        pre = [(nu, eta), (nu + np.pi, eta + np.pi)]
        weight = wt[:, None, None] * wa * wa * 0.5
    else:
        T, NU, ETA = np.meshgrid(theta, a, a, indexing="ij")
        pre = [(NU, ETA)]
        weight = wt[:, None, None] * wa * wa
    r, wr = _radial_rule(state, n_r)
    xh, wh = np.polynomial.hermite.hermgauss(n_p)
    width = state.hbar / (math.sqrt(2) * state.sigma)
    nodes = np.stack(np.meshgrid(xh, xh, xh, xh, indexing="ij"), axis=-1).reshape(-1, 4)
    wnodes = np.prod(np.stack(np.meshgrid(wh, wh, wh, wh, indexing="ij"), axis=-1).reshape(-1, 4), axis=-1)
    total = 0.0
    for nu_, eta_ in pre:
        frame = spherical_frame(T, nu_, eta_)
        centre_cart = np.einsum("...ab,b->...a", frame, state.P0)  # P0 in the local frame
        for ri, wri in zip(r, wr):
            h = scale_factors(ri, T)  # (..., 4)
            X = ri * frame[..., 0, :]
            # momenta p_q = h_q P_q with P_q the local-frame components; the
            # Gauss-Hermite rule is centred on P0 and scaled to the state's width
            Ploc = centre_cart[..., None, :] + width * nodes
            P = Ploc @ frame
            fe = state.wigner(X[..., None, :], P)
            acc = fe @ (wnodes * np.exp(np.sum(nodes**2, axis=-1)))
            jac = np.prod(h, axis=-1) * width**4  # dp_q = h_q dP_q
            total += float(np.sum(weight * wri * jac * acc))
    return total


# ---------------------------------------------------------------- projection to SO(3)


PROJECTION_MATRIX = np.array([[1.0, 1.0, 0.0, 0.0],
                              [1.0, -1.0, 0.0, 0.0],
                              [0.0, 0.0, 0.5, 0.5],
                              [0.0, 0.0, 0.5, -0.5]])


def project_to_so3(samples) -> np.ndarray:
    """Map ``(theta, nu, eta, p_theta, p_nu, p_eta)`` rows to ``(phi, theta, psi, p_phi, p_theta, p_psi)``.

    ``phi = nu + eta``, ``psi = nu - eta``, ``p_phi = (p_nu + p_eta)/2``,
    ``p_psi = (p_nu - p_eta)/2``; angles are reduced mod 2 pi.
    """
    s = np.asarray(samples, dtype=float)
    theta, nu, eta, pt, pn, pe = np.moveaxis(s, -1, 0)
    mapped = np.einsum("ab,b...->a...", PROJECTION_MATRIX, np.stack([nu, eta, pn, pe]))
    phi, psi, p_phi, p_psi = mapped
    two_pi = 2 * np.pi
    return np.stack([np.mod(phi, two_pi), theta, np.mod(psi, two_pi), p_phi, pt, p_psi], axis=-1)


def projection_jacobian() -> float:
    """Determinant of the linear map on ``(nu, eta, p_nu, p_eta)``."""
    return float(np.linalg.det(PROJECTION_MATRIX))


def box_volume_after_projection(lo, hi) -> tuple[float, float]:
    """Volume of a box in ``(nu, eta, p_nu, p_eta)`` and of its image (a parallelepiped)."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    edges = PROJECTION_MATRIX * (hi - lo)[None, :]
    return float(np.prod(hi - lo)), float(abs(np.linalg.det(edges)))


@dataclass(frozen=True)
class VolumeBookkeeping:
    """Configuration volumes along S^3 -> Euler chart -> SO(3)."""

    s3_round: float          # sin(theta)/4 dtheta dnu deta
    euler_image: float       # sin(theta) dtheta dphi dpsi over the image of the (nu, eta) torus
    identification: float    # U ~ -U halves the volume
    so3: float

    def as_dict(self) -> dict:
        return {"s3_round": self.s3_round, "euler_image": self.euler_image,
                "identification": self.identification, "so3": self.so3}


def volume_bookkeeping(n_theta: int = 32) -> VolumeBookkeeping:
    s3 = volume_su2(n_theta)
    # sin(theta) dtheta dphi dpsi = |det d(phi,psi)/d(nu,eta)| sin(theta) dtheta dnu deta = 8 * (round measure)
    jac = abs(np.linalg.det(PROJECTION_MATRIX[:2, :2]))
    image = 4 * jac * s3
    return VolumeBookkeeping(s3, image, 0.5, 0.5 * image)


def periodicity_residual(state: GaussianState, points: np.ndarray, n_r: int = 96) -> float:
    """``max |f_SU2(q) - f_SU2(q with nu, eta shifted by pi)| / max f_SU2``.

    Zero when f_SU2 already descends to SO(3) without folding the two preimages.
    """
    q = np.asarray(points, dtype=float)
    a = reduced_density(state, *q.T, n_r=n_r)
    shifted = q.copy()
    shifted[:, 1] += np.pi
    shifted[:, 2] += np.pi
    b = reduced_density(state, *shifted.T, n_r=n_r)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))


__all__ = [
    "R4Point", "ReducedPoint", "GaussianState", "VolumeBookkeeping", "spherical_to_cartesian",
    "spherical_frame", "scale_factors", "cartesian_momentum", "su2_from_point", "su2_to_so3",
    "volume_su2", "ball_volume", "extended_wigner", "reduced_density", "reduce_to_su2",
    "reduced_total", "project_to_so3", "projection_jacobian", "box_volume_after_projection",
    "volume_bookkeeping", "periodicity_residual", "SO3_VOLUME",
]
