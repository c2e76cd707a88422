"""Phase-space distributions on T*SO(3).

Two families live here.  Classical action waves ``f0 = n delta(rho - Z S)``
are handled through the pushforward integral, so the delta is never
sampled.  The Wigner-type distribution

    f_W(R, rho) = (2 pi hbar)^-3 int_{|gamma| <= pi} d^3gamma j0^2(gamma/2)
                  exp(-i gamma.rho / hbar) psi(R e^{gamma.xi/2}) psi*(R e^{-gamma.xi/2})

is evaluated by a product quadrature over the gamma ball.

Momentum moments of f_W are distributional (f_W decays only like
``|rho|^-2`` because the gamma integral stops at the ball boundary), so the
phase-space quadrature route integrates against a smooth momentum window
``W(u) = exp(-s) sum_{n<=N} s^n / n!`` with ``s = sigma^2 u^2 / 2`` and
``u = rho / hbar``.  ``W = 1 - O(u^{2N+2})``, so polynomial moments of low
degree are reproduced up to a bias that vanishes as sigma -> 0, and its
Fourier transform is known in closed form (a Gaussian times a generalised
Laguerre polynomial), which moves the momentum integral onto the ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import eval_genlaguerre, gammainccinv

from .errors import DomainError, UnderResolvedError
from .geometry import (
    SO3_VOLUME,
    InertiaTensor,
    Rotation,
    ScalarField,
    _as_matrix,
    axis_rotation,
    ball_grid,
    euler_grid,
    euler_matrix,
    generator_coefficients,
    QuadratureGrid,
)
from .wavefunctions import (
    WaveFunction,
    _field_on_grid,
    evaluate,
    expectation_Lk,
    expectation_Lk2,
    from_action_wave,
    hamiltonian,
    inner_product,
    norm_factor,
    rep_axis,
    rep_matrix,
    right_translate,
)

DEFAULT_GAMMA_RESOLUTION = (32, 24, 48)
DEFAULT_WINDOW_ORDER = 8
DEFAULT_NYQUIST = 1.0


# ---------------------------------------------------------------- action waves


@dataclass(frozen=True)
class ActionWave:
    """Classical coherent data ``(n, S)`` with optional time derivatives."""

    n: ScalarField
    S: ScalarField
    dn_dt: Optional[ScalarField] = None
    dS_dt: Optional[ScalarField] = None

    def density_integral(self, grid: Optional[QuadratureGrid] = None) -> float:
        grid = grid or euler_grid(48, 32, 48)
        P, T, Sg = (grid.coords[:, a].reshape(grid.shape) for a in range(3))
        return float(np.real(grid.integrate(_field_on_grid(self.n, P, T, Sg).ravel())))

    def validate(self, grid: Optional[QuadratureGrid] = None, tol: float = 1e-6) -> None:
        total = self.density_integral(grid)
        if abs(total - 1.0) > tol:
            raise DomainError(f"density must integrate to 1, got {total:.8g}")


def reference_action_wave(amplitude: float = 0.5) -> ActionWave:
    """``n = (1 + amplitude R_11) / 8 pi^2`` and ``S = R_12``: smooth on all of SO(3).

    Used for classical-limit runs; ``<rho_3>_{f0} = -amplitude / 3``.
    """
    if not abs(amplitude) < 1:
        raise DomainError("amplitude must lie in (-1, 1) to keep n positive")
    n = ScalarField.from_matrix(lambda m: (1 + amplitude * np.asarray(m)[..., 0, 0]) / SO3_VOLUME)
    S = ScalarField.from_matrix(lambda m: np.asarray(m)[..., 0, 1])
    return ActionWave(n, S)


def _gradient_on_grid(f: ScalarField, P, T, Sg, h: float = 1e-6) -> np.ndarray:
    """Chart partials (d_phi, d_theta, d_psi) of a field on arrays of Euler angles."""
    if f.grad_euler is not None:
        try:
            g = np.asarray(f.grad_euler(P, T, Sg), dtype=float)
            if g.shape == (3,) + P.shape:
                return g
        except (TypeError, ValueError):
            pass
        return np.moveaxis(np.vectorize(lambda a, b, c: tuple(f.grad_euler(a, b, c)))(P, T, Sg), 0, 0)
    out = []
    for shift in ((h, 0, 0), (0, h, 0), (0, 0, h)):
        dp, dt, ds = shift
        plus = np.real(_field_on_grid(f, P + dp, T + dt, Sg + ds))
        minus = np.real(_field_on_grid(f, P - dp, T - dt, Sg - ds))
        out.append((plus - minus) / (2 * h))
    return np.array(out)


def intrinsic_gradient_on_grid(f: ScalarField, P, T, Sg, h: float = 1e-6) -> np.ndarray:
    """``(Z_1 f, Z_2 f, Z_3 f)`` on arrays of Euler angles (away from sin(theta) = 0)."""
    grad = _gradient_on_grid(f, P, T, Sg, h)
    st, ct = np.sin(T), np.cos(T)
    sp, cp = np.sin(Sg), np.cos(Sg)
    z1 = sp / st * grad[0] + cp * grad[1] - sp * ct / st * grad[2]
    z2 = cp / st * grad[0] - sp * grad[1] - cp * ct / st * grad[2]
    z3 = grad[2]
    return np.stack([z1, z2, z3], axis=-1)


def observable(name: str, inertia: Optional[InertiaTensor] = None) -> Callable:
    """Phase-space observable ``A(R, rho)`` by name: '1', 'rho1'..'rho3', 'rho1^2'.., 'H'."""
    if name == "1":
        return lambda m, rho: np.ones(rho.shape[:-1])
    if name in ("rho1", "rho2", "rho3"):
        k = int(name[-1]) - 1
        return lambda m, rho: rho[..., k]
    if name in ("rho1^2", "rho2^2", "rho3^2"):
        k = int(name[3]) - 1
        return lambda m, rho: rho[..., k] ** 2
    if name == "H":
        if inertia is None:
            raise ValueError("observable 'H' needs an inertia tensor")
        I = inertia.as_array()
        return lambda m, rho: np.sum(rho**2 / (2 * I), axis=-1)
    raise ValueError(f"unknown observable {name!r}")


def f0_expectation(a: ActionWave, A, grid: Optional[QuadratureGrid] = None,
                   inertia: Optional[InertiaTensor] = None) -> float:
    """``int dv_R n(R) A(R, Z S(R))``: the delta of f0 consumed analytically.

    ``A`` is a vectorised callable ``A(matrices (N,3,3), rho (N,3))`` or an
    observable name understood by :func:`observable`.
    """
    if isinstance(A, str):
        A = observable(A, inertia)
    grid = grid or euler_grid(65, 33, 65)
    P, T, Sg = (grid.coords[:, a] for a in range(3))
    nv = np.real(_field_on_grid(a.n, P, T, Sg))
    rho = intrinsic_gradient_on_grid(a.S, P, T, Sg)
    vals = np.asarray(A(euler_matrix(P, T, Sg), rho), dtype=float)
    return float(grid.integrate(nv * vals))


def _z_derivative(fn: Callable[[np.ndarray], float], m: np.ndarray, k: int, h: float) -> float:
    return (fn(m @ axis_rotation(k, h)) - fn(m @ axis_rotation(k, -h))) / (2 * h)


def _intrinsic_gradient(f: ScalarField, m: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """``Z_k f`` at one rotation by right-translation differences (chart free)."""
    fn = lambda x: float(np.real(f.on_rotation(x)))
    return np.array([_z_derivative(fn, m, k, h) for k in (1, 2, 3)])


def hj_residual(a: ActionWave, inertia: InertiaTensor, at, h_outer: float = 1e-4,
                h_inner: float = 1e-5) -> tuple[float, float]:
    """Pointwise residuals of the continuity and Hamilton-Jacobi equations.

    Returns ``(d_t n + sum_k Z_k(n Z_k S / I_k),  max_k |Z_k[d_t S + sum_l (Z_l S)^2 / 2 I_l]|)``.
    """
    if a.dn_dt is None or a.dS_dt is None:
        raise ValueError("time-derivative fields are required")
    I = inertia.as_array()
    m = _as_matrix(at)

    def current(k):
        def fn(x):
            return float(np.real(a.n.on_rotation(x))) * _intrinsic_gradient(a.S, x, h_inner)[k - 1] / I[k - 1]
        return fn

    def hj_density(x):
        zs = _intrinsic_gradient(a.S, x, h_inner)
        return float(np.real(a.dS_dt.on_rotation(x))) + float(np.sum(zs**2 / (2 * I)))

    cont = float(np.real(a.dn_dt.on_rotation(m)))
    cont += sum(_z_derivative(current(k), m, k, h_outer) for k in (1, 2, 3))
    hj = max(abs(_z_derivative(hj_density, m, k, h_outer)) for k in (1, 2, 3))
    return cont, hj


# ---------------------------------------------------------------- half translates


def f_tilde(psi: WaveFunction, R, r) -> complex:
    """``psi(R e^{hbar r.xi/2}) psi*(R e^{-hbar r.xi/2})``."""
    g = psi.hbar * np.asarray(r, dtype=float)
    if np.linalg.norm(g) > np.pi + 1e-12:
        raise DomainError("hbar |r| must not exceed pi")
    m = _as_matrix(R)
    return evaluate(right_translate(psi, g / 2), m) * np.conj(evaluate(right_translate(psi, -g / 2), m))


@dataclass
class _BallFactorization:
    """Radius x direction layout of a product ball grid, with cached direction rotations.

    ``U^j(e^{gamma g.xi}) = V_g expm(-i gamma J_3) V_g^dagger`` with
    ``V_g = U^j(e^{alpha xi_3}) U^j(e^{beta xi_2})``, so every function of
    the form ``tr(X U^j(e^{t gamma g.xi}))`` reduces to a diagonal per
    direction followed by radial phases.
    """

    grid: QuadratureGrid
    radii: np.ndarray = field(init=False)
    alpha: np.ndarray = field(init=False)
    beta: np.ndarray = field(init=False)
    _V: dict = field(init=False, default_factory=dict)

    def __post_init__(self):
        n_g, n_b, n_a = self.grid.shape
        c = self.grid.coords.reshape(n_g, n_b * n_a, 3)
        self.radii = np.linalg.norm(c[:, 0, :], axis=-1)
        g = c[0] / self.radii[0]
        self.beta = np.arccos(np.clip(g[:, 2], -1.0, 1.0))
        self.alpha = np.arctan2(g[:, 1], g[:, 0])

    def V(self, j: int) -> np.ndarray:
        if j not in self._V:
            self._V[j] = rep_axis(j, 2, self.alpha) @ rep_axis(j, 1, self.beta)
        return self._V[j]

    def diagonal(self, j: int, X: np.ndarray) -> np.ndarray:
        """``(V_g^dagger X V_g)_{aa}`` for every direction, shape (n_dir, d)."""
        V = self.V(j)
        return np.einsum("nba,bc,nca->na", V.conj(), X, V)

    def radial_sum(self, diag: np.ndarray, j: int, scale: float) -> np.ndarray:
        """``sum_a diag[n, a] exp(i scale gamma a)`` on all nodes, flattened like the grid."""
        a = np.arange(-j, j + 1)
        ph = np.exp(1j * scale * self.radii[:, None] * a[None, :])  # (n_g, d)
        return np.einsum("ga,na->gn", ph, diag).ravel()

    def half_translates(self, psi: WaveFunction, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``psi(R e^{gamma.xi/2})`` and ``psi(R e^{-gamma.xi/2})`` on every node."""
        plus = np.zeros(self.grid.size, dtype=complex)
        minus = np.zeros(self.grid.size, dtype=complex)
        for j, C in enumerate(psi.blocks):
            if not np.any(C):
                continue
            # psi(R A) = N sum_{k'k} (U(R)^dag C)_{k'k} conj(U(A))_{k'k}
            D = rep_matrix(j, m).conj().T @ C
            diag = self.diagonal(j, D)
            plus += norm_factor(j) * self.radial_sum(diag, j, 0.5)
            minus += norm_factor(j) * self.radial_sum(diag, j, -0.5)
        return plus, minus

    def autocorrelation(self, psi: WaveFunction, sign: float = -1.0) -> np.ndarray:
        """``int dv_R psi(R e^{gamma.xi/2}) psi*(R e^{-gamma.xi/2}) = sum_j tr(C^dag C U^j(e^{-gamma.xi}))``."""
        out = np.zeros(self.grid.size, dtype=complex)
        for j, C in enumerate(psi.blocks):
            if not np.any(C):
                continue
            diag = self.diagonal(j, C.conj().T @ C)
            # U^j(e^{-gamma.xi}) = V expm(+i gamma J_3) V^dag
            out += self.radial_sum(diag, j, -sign)
        return out


def _top_j(psi: WaveFunction) -> int:
    nz = [j for j, C in enumerate(psi.blocks) if np.any(C)]
    return max(nz) if nz else 0


# ---------------------------------------------------------------- Wigner distribution


@dataclass
class WignerDistribution:
    """Wigner-type distribution of ``psi`` on a gamma-ball quadrature grid."""

    psi: WaveFunction
    gamma_grid: QuadratureGrid = None
    nyquist: float = DEFAULT_NYQUIST

    def __post_init__(self):
        if self.gamma_grid is None:
            self.gamma_grid = ball_grid(*DEFAULT_GAMMA_RESOLUTION)
        if self.gamma_grid.chart != "exponential":
            raise ValueError("Wigner evaluation needs an exponential-chart ball grid")
        self._fact = _BallFactorization(self.gamma_grid)
        self._cache: dict = {}

    @property
    def hbar(self) -> float:
        return self.psi.hbar

    def max_resolved_momentum(self) -> float:
        n_g, n_b, n_a = self.gamma_grid.shape
        return self.nyquist * self.hbar * min(n_g, n_b, n_a // 2) / np.pi

    def integrand_product(self, R) -> np.ndarray:
        """``psi(R e^{gamma.xi/2}) psi*(R e^{-gamma.xi/2})`` on the grid nodes."""
        m = _as_matrix(R)
        key = m.tobytes()
        if key not in self._cache:
            plus, minus = self._fact.half_translates(self.psi, m)
            self._cache = {key: plus * np.conj(minus)}
        return self._cache[key]

    def evaluate(self, R, rho) -> tuple[float, float]:
        """Real part and imaginary residue of f_W at ``(R, rho)``; rho may be (N, 3)."""
        rho = np.asarray(rho, dtype=float)
        if np.max(np.linalg.norm(np.atleast_2d(rho), axis=-1)) > self.max_resolved_momentum():
            raise UnderResolvedError(
                f"|rho| beyond {self.max_resolved_momentum():.4g} needs a finer gamma grid")
        prod = self.integrand_product(R)
        phase = np.exp(-1j * (np.atleast_2d(rho) @ self.gamma_grid.coords.T) / self.hbar)
        val = (phase * self.gamma_grid.weights) @ prod / (2 * np.pi * self.hbar) ** 3
        if rho.ndim == 1:
            return float(val[0].real), float(val[0].imag)
        return val.real, val.imag


def wigner_eval(w: WignerDistribution, p, return_imag: bool = False):
    """f_W at a phase-space point (anything with ``R`` and ``rho``) or an ``(R, rho)`` pair."""
    R, rho = (p.R, p.rho) if hasattr(p, "rho") else p
    re, im = w.evaluate(R, rho)
    return (re, im) if return_imag else re


def wigner_radial_oracle(rho_norm: float, hbar: float = 1.0) -> float:
    """f_W of the j=0 state at momentum magnitude ``rho_norm`` by a 1-D integral."""
    from scipy.integrate import quad

    x = rho_norm / hbar
    val = quad(lambda g: 4 * np.sin(g / 2) ** 2 * np.sinc(g * x / np.pi), 0.0, np.pi, limit=200)[0]
    return 4 * np.pi * val / ((2 * np.pi * hbar) ** 3 * SO3_VOLUME)


# ---------------------------------------------------------------- momentum windows


def window(u, sigma: float, order: int = DEFAULT_WINDOW_ORDER):
    """``W(u) = exp(-s) sum_{n<=order} s^n/n!`` with ``s = sigma^2 |u|^2 / 2``."""
    s = 0.5 * sigma**2 * np.asarray(u, dtype=float) ** 2
    total = np.zeros_like(s)
    term = np.ones_like(s)
    for n in range(order + 1):
        total = total + term
        term = term * s / (n + 1)
    return np.exp(-s) * total


def window_kernel(gamma_vec, sigma: float, order: int = DEFAULT_WINDOW_ORDER) -> dict:
    """Fourier transform ``h`` of the window and the derivatives needed for moments.

    ``h(gamma) = (2 pi)^-3 int d^3u W(u) e^{-i gamma.u}
               = (2 pi sigma^2)^{-3/2} e^{-q} L_N^{(3/2)}(q)``, ``q = |gamma|^2 / 2 sigma^2``.
    Returns ``h``, its gradient (..., 3) and its diagonal second derivatives (..., 3).
    """
    g = np.asarray(gamma_vec, dtype=float)
    q = np.sum(g**2, axis=-1) / (2 * sigma**2)
    c = (2 * np.pi * sigma**2) ** -1.5 * np.exp(-q)
    L0 = eval_genlaguerre(order, 1.5, q)
    L1 = -eval_genlaguerre(order - 1, 2.5, q) if order >= 1 else 0.0 * q
    L2 = eval_genlaguerre(order - 2, 3.5, q) if order >= 2 else 0.0 * q
    H0 = c * L0
    H1 = c * (L1 - L0)
    H2 = c * (L2 - 2 * L1 + L0)
    grad = H1[..., None] * g / sigma**2
    hess_diag = H1[..., None] / sigma**2 + H2[..., None] * g**2 / sigma**4
    return {"h": H0, "grad": grad, "hess_diag": hess_diag}


def default_sigma(psi: WaveFunction) -> float:
    return min(0.25, 0.8 / (_top_j(psi) + 1))


@dataclass(frozen=True)
class MomentumGrid:
    """Momentum nodes and weights with extent ``rho_max``.

    The extent also sets the smooth window used by :func:`momentum_marginal`:
    ``W >= 1 - window_tol`` on ``|rho| <= rho_max``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    rho_max: float
    resolution: tuple
    spacing: float
    hbar: float = 1.0
    order: int = DEFAULT_WINDOW_ORDER
    window_tol: float = 1e-2

    @classmethod
    def cartesian(cls, rho_max: float, n: int = 33, hbar: float = 1.0, **kw) -> "MomentumGrid":
        """Uniform cube ``[-rho_max, rho_max]^3`` with ``n`` nodes per axis (rectangle rule)."""
        x = np.linspace(-rho_max, rho_max, n)
        d = x[1] - x[0]
        X = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
        return cls(X, np.full(len(X), d**3), rho_max, (n, n, n), d, hbar, **kw)

    @classmethod
    def for_state(cls, psi: WaveFunction, scale: float = 1.0, n: int = 33) -> "MomentumGrid":
        """Default extent ``rho_max = hbar (jmax + 2)``, times ``scale``."""
        return cls.cartesian(scale * psi.hbar * (_top_j(psi) + 2), n, psi.hbar)

    @property
    def window_sigma(self) -> float:
        s_star = gammainccinv(self.order + 1, 1.0 - self.window_tol)
        return math.sqrt(2 * s_star) * self.hbar / self.rho_max


def momentum_marginal(w: WignerDistribution, R, grid: MomentumGrid,
                      n_radial: int = 48) -> float:
    """``int d^3rho W(rho/hbar) f_W(R, rho)`` for the window set by ``grid``; tends to |psi(R)|^2."""
    sigma = grid.window_sigma
    _, n_b, n_a = w.gamma_grid.shape
    bg = ball_grid(n_radial, n_b, n_a, gamma_max=min(np.pi, 12 * sigma))
    fact = _BallFactorization(bg)
    plus, minus = fact.half_translates(w.psi, _as_matrix(R))
    h = window_kernel(bg.coords, sigma, grid.order)["h"]
    return float(np.real(np.sum(bg.weights * h * plus * np.conj(minus))))


def fourier_momentum(values, grid: MomentumGrid, r) -> complex:
    """``int d^3rho e^{i r.rho} f(rho)`` from samples of ``f`` on the grid nodes."""
    r = np.asarray(r, dtype=float)
    if np.max(np.abs(r)) * grid.spacing > np.pi:
        raise UnderResolvedError("|r| exceeds the Nyquist limit of the momentum grid")
    return complex(np.sum(grid.weights * np.asarray(values) * np.exp(1j * grid.nodes @ r)))


def fourier_point_mass(rho0, r) -> complex:
    """Transform of a unit point mass at ``rho0``: ``exp(i r.rho0)``."""
    return complex(np.exp(1j * np.dot(r, rho0)))


# ---------------------------------------------------------------- phase-space moments


@dataclass(frozen=True)
class PhaseSpaceMoments:
    norm: float
    rho: np.ndarray
    rho2: np.ndarray
    sigma: float
    order: int


def phase_space_moments(psi: WaveFunction, sigma: Optional[float] = None,
                        order: int = DEFAULT_WINDOW_ORDER, resolution=(48, 24, 48),
                        r_integration: str = "coefficients",
                        so3_grid: Optional[QuadratureGrid] = None) -> PhaseSpaceMoments:
    """Windowed moments ``int dv_R d^3rho W(rho/hbar) {1, rho_k, rho_k^2} f_W``.

    The rho integral is done exactly against the window, leaving
    ``int_ball d^3gamma j0^2(gamma/2) K(gamma) kappa(gamma)`` with the
    autocorrelation ``K(gamma) = int dv_R psi(R e^{gamma.xi/2}) psi*(R e^{-gamma.xi/2})``.
    ``r_integration='quadrature'`` computes K by an explicit SO(3) sum
    instead of the coefficient formula.
    """
    sigma = default_sigma(psi) if sigma is None else sigma
    hbar = psi.hbar
    n_g, n_b, n_a = resolution
    bg = ball_grid(n_g, n_b, n_a, gamma_max=min(np.pi, 12 * sigma))
    fact = _BallFactorization(bg)
    if r_integration == "coefficients":
        K = fact.autocorrelation(psi)
    elif r_integration == "quadrature":
        L = 2 * _top_j(psi) + 2
        so3_grid = so3_grid or euler_grid(L + 1, L // 2 + 1, L + 1)
        K = np.zeros(bg.size, dtype=complex)
        for m, wR in zip(so3_grid.rotations(), so3_grid.weights):
            plus, minus = fact.half_translates(psi, m)
            K += wR * plus * np.conj(minus)
    else:
        raise ValueError(f"unknown r_integration {r_integration!r}")
    ker = window_kernel(bg.coords, sigma, order)
    wk = bg.weights * K
    norm = np.sum(wk * ker["h"])
    rho = np.array([np.sum(wk * 1j * hbar * ker["grad"][:, k]) for k in range(3)])
    rho2 = np.array([np.sum(wk * -(hbar**2) * ker["hess_diag"][:, k]) for k in range(3)])
    return PhaseSpaceMoments(float(norm.real), rho.real, rho2.real, sigma, order)


@dataclass(frozen=True)
class ExpectationReport:
    """Both computation routes of a phase-space expectation value."""

    operator: float
    quadrature: float

    @property
    def gap(self) -> float:
        return abs(self.operator - self.quadrature)

    def as_dict(self) -> dict:
        return {"operator": self.operator, "quadrature": self.quadrature, "gap": self.gap}


def expect_rho(psi: WaveFunction, k: int, moments: Optional[PhaseSpaceMoments] = None) -> ExpectationReport:
    """``<rho_k>_{f_W}`` against ``<psi|L'_k|psi>``."""
    moments = moments or phase_space_moments(psi)
    return ExpectationReport(expectation_Lk(psi, k), float(moments.rho[k - 1]))


def expect_rho2(psi: WaveFunction, k: int, moments: Optional[PhaseSpaceMoments] = None) -> ExpectationReport:
    """``<rho_k^2>_{f_W}`` against ``<psi|L'_k^2|psi> + hbar^2/6``."""
    moments = moments or phase_space_moments(psi)
    op = expectation_Lk2(psi, k) + psi.hbar**2 / 6
    return ExpectationReport(op, float(moments.rho2[k - 1]))


def expect_H(psi: WaveFunction, inertia: InertiaTensor,
             moments: Optional[PhaseSpaceMoments] = None) -> ExpectationReport:
    """``<H>_{f_W}`` against the Hamiltonian including the zero-point term."""
    moments = moments or phase_space_moments(psi)
    I = inertia.as_array()
    op = hamiltonian(inertia, psi.hbar, include_zero_point=True, jmax=psi.jmax).expectation(psi)
    return ExpectationReport(float(op), float(np.sum(moments.rho2 / (2 * I))))


# ---------------------------------------------------------------- overlap


@dataclass(frozen=True)
class OverlapReport:
    lhs: float
    rhs: float
    lhs_haar_pairing: float

    @property
    def difference(self) -> float:
        return self.lhs - self.rhs

    @property
    def relative(self) -> float:
        return abs(self.difference) / max(abs(self.rhs), 1e-300)

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "difference": self.difference,
                "relative": self.relative, "lhs_haar_pairing": self.lhs_haar_pairing}


def overlap(psi1: WaveFunction, psi2: WaveFunction, resolution=DEFAULT_GAMMA_RESOLUTION,
            so3_grid: Optional[QuadratureGrid] = None) -> OverlapReport:
    """Both sides of ``<f_W1>_{f_W2} = |<psi1|psi2>|^2 / (2 pi hbar)^3``.

    The left side integrates ``f_W1 f_W2`` over phase space; the momentum
    integral is exact (a delta pairing gamma with -gamma), which leaves

        (2 pi hbar)^-3 int dv_R int_ball d^3gamma j0^4(gamma/2) F1(R, gamma) F2(R, -gamma)

    evaluated by quadrature.  ``lhs_haar_pairing`` is the same integral with
    a single ``j0^2`` (the Haar density of the exponential chart).
    """
    if psi1.hbar != psi2.hbar:
        from .errors import HbarMismatchError

        raise HbarMismatchError("states must share hbar")
    hbar = psi1.hbar
    bg = ball_grid(*resolution)
    fact = _BallFactorization(bg)
    extra = np.sinc(np.linalg.norm(bg.coords, axis=-1) / (2 * np.pi)) ** 2
    if so3_grid is None:
        L = 2 * (_top_j(psi1) + _top_j(psi2)) + 2
        so3_grid = euler_grid(L + 1, L // 2 + 1, L + 1)
    acc = np.zeros(bg.size, dtype=complex)
    for m, wR in zip(so3_grid.rotations(), so3_grid.weights):
        a_plus, a_minus = fact.half_translates(psi1, m)
        b_plus, b_minus = fact.half_translates(psi2, m)
        acc += wR * (a_plus * np.conj(a_minus)) * (b_minus * np.conj(b_plus))
    pref = (2 * np.pi * hbar) ** -3
    lhs = pref * np.sum(bg.weights * extra * acc)
    pairing = pref * np.sum(bg.weights * acc)
    rhs = abs(inner_product(psi1, psi2)) ** 2 * pref
    return OverlapReport(float(lhs.real), float(rhs), float(pairing.real))


# ---------------------------------------------------------------- classical limit


@dataclass(frozen=True)
class LimitRow:
    hbar: float
    jmax: int
    truncation_loss: float
    quantum: float
    classical: float

    @property
    def gap(self) -> float:
        return abs(self.quantum - self.classical)


def classical_limit_gap(a: ActionWave, hbar_list: Sequence[float], A: str = "rho3",
                        c: float = 2.0, inertia: Optional[InertiaTensor] = None,
                        subtract_zero_point: bool = False, max_loss: float = 1e-3,
                        oversample: int = 4) -> list[LimitRow]:
    """``|<A>_{f_W} - <A>_{f0}|`` for each hbar, with ``jmax = ceil(c / hbar)``.

    ``A`` is one of the named observables.  For ``A = 'H'`` the zero-point
    offset can be subtracted from the quantum side.
    """
    classical = f0_expectation(a, A, inertia=inertia)
    rows = []
    for hbar in hbar_list:
        jmax = int(math.ceil(c / hbar))
        proj = from_action_wave(a.n, a.S, hbar, jmax, max_loss=max_loss, oversample=oversample)
        mom = phase_space_moments(proj.state)
        if A == "1":
            q = mom.norm
        elif A in ("rho1", "rho2", "rho3"):
            q = float(mom.rho[int(A[-1]) - 1])
        elif A in ("rho1^2", "rho2^2", "rho3^2"):
            q = float(mom.rho2[int(A[3]) - 1])
        elif A == "H":
            I = inertia.as_array()
            q = float(np.sum(mom.rho2 / (2 * I)))
            if subtract_zero_point:
                q -= float(np.sum(hbar**2 / (12 * I)))
        else:
            raise ValueError(f"unknown observable {A!r}")
        rows.append(LimitRow(hbar, jmax, proj.truncation_loss, q, classical))
    return rows


# ---------------------------------------------------------------- momentum Fourier equation


def f_tilde_0(a: ActionWave, m: np.ndarray, r, h: float = 1e-5) -> complex:
    """``n(R) exp(i r . Z S(R))``."""
    zs = _intrinsic_gradient(a.S, m, h)
    return complex(np.real(a.n.on_rotation(m)) * np.exp(1j * np.dot(r, zs)))


def fle_residual(a: ActionWave, inertia: InertiaTensor, R, r, h_r: float = 1e-3,
                 h_z: float = 1e-4, h_inner: float = 1e-5) -> float:
    """``|d_t f~ - i sum_i Z_i d_{r_i} f~ / I_i + i sum eps_ijk r_i/I_k d_{r_j} d_{r_k} f~|`` for ``f~ = n e^{i r.ZS}``."""
    if a.dn_dt is None or a.dS_dt is None:
        raise ValueError("time-derivative fields are required")
    from .geometry import LEVI_CIVITA

    I = inertia.as_array()
    m = _as_matrix(R)
    r = np.asarray(r, dtype=float)
    zs = _intrinsic_gradient(a.S, m, h_inner)
    phase = np.exp(1j * np.dot(r, zs))
    dt = (np.real(a.dn_dt.on_rotation(m)) + np.real(a.n.on_rotation(m)) * 1j
          * np.dot(r, _intrinsic_gradient(a.dS_dt, m, h_inner))) * phase
    eye = np.eye(3)

    def ft(x, rr):
        return f_tilde_0(a, x, rr, h_inner)

    def d_r(x, i):
        return (ft(x, r + h_r * eye[i]) - ft(x, r - h_r * eye[i])) / (2 * h_r)

    transport = 0.0
    for i in range(3):
        fn_re = lambda x, i=i: d_r(x, i).real
        fn_im = lambda x, i=i: d_r(x, i).imag
        z = _z_derivative(fn_re, m, i + 1, h_z) + 1j * _z_derivative(fn_im, m, i + 1, h_z)
        transport += z / I[i]
    f00 = ft(m, r)
    second = np.zeros((3, 3), dtype=complex)
    for j in range(3):
        for k in range(3):
            if j == k:
                second[j, k] = (ft(m, r + h_r * eye[j]) - 2 * f00 + ft(m, r - h_r * eye[j])) / h_r**2
            else:
                second[j, k] = (ft(m, r + h_r * (eye[j] + eye[k])) - ft(m, r + h_r * (eye[j] - eye[k]))
                                - ft(m, r - h_r * (eye[j] - eye[k])) + ft(m, r - h_r * (eye[j] + eye[k]))) / (4 * h_r**2)
    rotation = np.einsum("ijk,i,k,jk->", LEVI_CIVITA, r, 1 / I, second)
    return float(abs(dt - 1j * transport + 1j * rotation))


__all__ = [
    "ActionWave", "WignerDistribution", "MomentumGrid", "PhaseSpaceMoments", "ExpectationReport",
    "OverlapReport", "LimitRow", "observable", "reference_action_wave", "f0_expectation", "hj_residual", "f_tilde",
    "wigner_eval", "wigner_radial_oracle", "window", "window_kernel", "momentum_marginal",
    "fourier_momentum", "fourier_point_mass", "phase_space_moments", "expect_rho", "expect_rho2",
    "expect_H", "overlap", "classical_limit_gap", "f_tilde_0", "fle_residual",
    "intrinsic_gradient_on_grid",
]
