"""Wave functions on SO(3) in the Wigner D-function basis.

Phase convention
----------------
``U^j(R)`` is the unitary representation with ``U^j(expm(t xi_k)) =
expm(-i t J_k)``, where ``J_k`` are the standard spin matrices (index
order ``-j..j``).  The basis functions are

    phi^j_{mk}(R) = sqrt((2j+1)/8pi^2) * conj(U^j(R)_{mk})

so that the intrinsic operators ``L'_k = -i hbar Z_k`` act on the second
(``k``) index:  ``L'_k C = hbar * C @ J_k`` for the coefficient block ``C``
with rows ``m`` and columns ``k``.  In particular ``L'_3 phi^j_{mk} = hbar k
phi^j_{mk}``.  In Euler angles
``U^j(R^e) = expm(-i phi J_3) expm(-i theta J_1) expm(-i psi J_3)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, HbarMismatchError, TruncationLossError
from .geometry import (
    SO3_VOLUME,
    InertiaTensor,
    Rotation,
    ScalarField,
    _as_matrix,
    euler_grid,
    matrix_to_rotvec,
)

# ---------------------------------------------------------------- representations


@lru_cache(maxsize=None)
def spin_matrices(j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standard (Condon-Shortley) spin matrices J_1, J_2, J_3 for spin ``j``."""
    k = np.arange(-j, j + 1, dtype=float)
    jp = np.zeros((2 * j + 1, 2 * j + 1), dtype=complex)
    for idx in range(2 * j):
        jp[idx + 1, idx] = math.sqrt(j * (j + 1) - k[idx] * (k[idx] + 1))
    jm = jp.conj().T
    J1 = (jp + jm) / 2
    J2 = (jp - jm) / 2j
    J3 = np.diag(k).astype(complex)
    for M in (J1, J2, J3):
        M.setflags(write=False)
    return J1, J2, J3


@lru_cache(maxsize=None)
def _eig_J(j: int, axis: int):
    w, v = np.linalg.eigh(spin_matrices(j)[axis])
    # eigenvalues of spin matrices are exactly the integers -j..j
    w = np.round(w)
    return w, v


def rep_axis(j: int, axis: int, angle) -> np.ndarray:
    """``U^j(expm(angle xi_{axis+1}))`` for an array of angles, shape (..., d, d)."""
    angle = np.asarray(angle, dtype=float)
    if axis == 2:
        k = np.arange(-j, j + 1)
        ph = np.exp(-1j * angle[..., None] * k)
        out = np.zeros(angle.shape + (2 * j + 1, 2 * j + 1), dtype=complex)
        idx = np.arange(2 * j + 1)
        out[..., idx, idx] = ph
        return out
    w, v = _eig_J(j, axis)
    ph = np.exp(-1j * angle[..., None] * w)
    return np.einsum("ab,...b,cb->...ac", v, ph, v.conj())


def rep_euler(j: int, phi, theta, psi) -> np.ndarray:
    """``U^j`` of Euler-angle rotations, vectorised."""
    phi, theta, psi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (phi, theta, psi)))
    k = np.arange(-j, j + 1)
    mid = rep_axis(j, 0, theta)
    return np.exp(-1j * phi[..., None, None] * k[:, None]) * mid * np.exp(-1j * psi[..., None, None] * k[None, :])


def rep_exp(j: int, v) -> np.ndarray:
    """``U^j(expm(v . xi)) = expm(-i v . J)`` for vectors ``v`` (..., 3)."""
    v = np.asarray(v, dtype=float)
    J1, J2, J3 = spin_matrices(j)
    gen = (v[..., 0, None, None] * J1 + v[..., 1, None, None] * J2 + v[..., 2, None, None] * J3)
    w, vec = np.linalg.eigh(gen)
    return np.einsum("...ab,...b,...cb->...ac", vec, np.exp(-1j * w), vec.conj())


def rep_matrix(j: int, R) -> np.ndarray:
    """``U^j(R)`` for rotation matrices via the exponential chart (no chart singularities)."""
    return rep_exp(j, matrix_to_rotvec(_as_matrix(R)))


def wigner_small_d(j: int, beta: float) -> np.ndarray:
    """Wigner's explicit sum for ``d^j_{mk}(beta) = <jm| expm(-i beta J_2) |jk>``."""
    d = np.zeros((2 * j + 1, 2 * j + 1))
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    for mi, m in enumerate(range(-j, j + 1)):
        for ki, k in enumerate(range(-j, j + 1)):
            pref = math.sqrt(math.factorial(j + m) * math.factorial(j - m)
                             * math.factorial(j + k) * math.factorial(j - k))
            total = 0.0
            for n in range(max(0, k - m), min(j + k, j - m) + 1):
                num = (-1) ** (m - k + n) * c ** (2 * j + k - m - 2 * n) * s ** (m - k + 2 * n)
                den = (math.factorial(j + k - n) * math.factorial(n)
                       * math.factorial(m - k + n) * math.factorial(j - m - n))
                total += num / den
            d[mi, ki] = pref * total
    return d


def norm_factor(j: int) -> float:
    return math.sqrt((2 * j + 1) / SO3_VOLUME)


# ---------------------------------------------------------------- states


@dataclass(frozen=True)
class WaveFunction:
    """Coefficients ``c^j_{mk}`` for integer ``j <= jmax``; ``blocks[j][m+j, k+j]``."""

    hbar: float
    jmax: int
    blocks: tuple

    def __post_init__(self):
        if self.hbar <= 0:
            raise DomainError("hbar must be positive")
        if len(self.blocks) != self.jmax + 1:
            raise ValueError("need one coefficient block per j = 0..jmax")
        frozen = []
        for j, b in enumerate(self.blocks):
            b = np.array(b, dtype=complex)
            if b.shape != (2 * j + 1, 2 * j + 1):
                raise ValueError(f"block {j} has shape {b.shape}")
            if not np.all(np.isfinite(b)):
                raise ValueError("coefficients must be finite")
            b.setflags(write=False)
            frozen.append(b)
        object.__setattr__(self, "blocks", tuple(frozen))

    # constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, jmax: int, hbar: float = 1.0) -> "WaveFunction":
        return cls(hbar, jmax, tuple(np.zeros((2 * j + 1, 2 * j + 1)) for j in range(jmax + 1)))

    @classmethod
    def basis(cls, j: int, m: int, k: int, hbar: float = 1.0, jmax: int | None = None) -> "WaveFunction":
        jmax = j if jmax is None else jmax
        if not (0 <= j <= jmax and abs(m) <= j and abs(k) <= j):
            raise DomainError(f"invalid basis labels j={j}, m={m}, k={k}")
        blocks = [np.zeros((2 * l + 1, 2 * l + 1), dtype=complex) for l in range(jmax + 1)]
        blocks[j][m + j, k + j] = 1.0
        return cls(hbar, jmax, tuple(blocks))

    @classmethod
    def random(cls, rng: np.random.Generator, jmax: int, hbar: float = 1.0) -> "WaveFunction":
        blocks = [rng.normal(size=(2 * j + 1, 2 * j + 1)) + 1j * rng.normal(size=(2 * j + 1, 2 * j + 1))
                  for j in range(jmax + 1)]
        return cls(hbar, jmax, tuple(blocks)).normalize()

    def with_blocks(self, blocks) -> "WaveFunction":
        return WaveFunction(self.hbar, len(blocks) - 1, tuple(blocks))

    # basic algebra --------------------------------------------------------
    def norm2(self) -> float:
        return float(sum(np.vdot(b, b).real for b in self.blocks))

    def normalize(self) -> "WaveFunction":
        n = math.sqrt(self.norm2())
        if n == 0:
            raise ValueError("cannot normalise the zero state")
        return self.with_blocks([b / n for b in self.blocks])

    def padded(self, jmax: int) -> "WaveFunction":
        if jmax < self.jmax:
            raise ValueError("cannot pad to a smaller jmax")
        extra = [np.zeros((2 * j + 1, 2 * j + 1)) for j in range(self.jmax + 1, jmax + 1)]
        return self.with_blocks(list(self.blocks) + extra)

    def __add__(self, other: "WaveFunction") -> "WaveFunction":
        a, b = _align(self, other)
        return a.with_blocks([x + y for x, y in zip(a.blocks, b.blocks)])

    def __sub__(self, other: "WaveFunction") -> "WaveFunction":
        return self + other.scaled(-1.0)

    def scaled(self, factor: complex) -> "WaveFunction":
        return self.with_blocks([factor * b for b in self.blocks])

    def coefficient_vector(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self.blocks])

    # serialisation -------------------------------------------------------
    def to_json(self) -> dict:
        rows = []
        for j, b in enumerate(self.blocks):
            for mi in range(2 * j + 1):
                for ki in range(2 * j + 1):
                    c = b[mi, ki]
                    if c != 0:
                        rows.append([j, mi - j, ki - j, float(c.real), float(c.imag)])
        return {"hbar": self.hbar, "jmax": self.jmax, "coefficients": rows}

    @classmethod
    def from_json(cls, data: dict) -> "WaveFunction":
        jmax = int(data["jmax"])
        blocks = [np.zeros((2 * j + 1, 2 * j + 1), dtype=complex) for j in range(jmax + 1)]
        for j, m, k, re, im in data["coefficients"]:
            j, m, k = int(j), int(m), int(k)
            if j > jmax or abs(m) > j or abs(k) > j:
                raise ValueError(f"invalid coefficient row {(j, m, k)}")
            blocks[j][m + j, k + j] = complex(re, im)
        return cls(float(data["hbar"]), jmax, tuple(blocks))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "WaveFunction":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _align(a: WaveFunction, b: WaveFunction):
    if a.hbar != b.hbar:
        raise HbarMismatchError(f"hbar differs: {a.hbar} vs {b.hbar}")
    jmax = max(a.jmax, b.jmax)
    return a.padded(jmax), b.padded(jmax)


# ---------------------------------------------------------------- evaluation


def evaluate(psi: WaveFunction, R) -> complex | np.ndarray:
    """Value of the wave function at a rotation, or at a stack of matrices (N, 3, 3)."""
    m = _as_matrix(R)
    v = matrix_to_rotvec(m)
    out = 0.0
    for j, C in enumerate(psi.blocks):
        if not np.any(C):
            continue
        U = rep_exp(j, v)
        out = out + norm_factor(j) * np.einsum("mk,...mk->...", C, U.conj())
    if np.ndim(out) == 0:
        return complex(out)
    return out


def evaluate_euler(psi: WaveFunction, phi, theta, psi_angle) -> np.ndarray:
    """Evaluate on arrays of Euler angles via the Euler-route representation."""
    out = 0.0
    for j, C in enumerate(psi.blocks):
        if not np.any(C):
            continue
        U = rep_euler(j, phi, theta, psi_angle)
        out = out + norm_factor(j) * np.einsum("mk,...mk->...", C, U.conj())
    return np.asarray(out, dtype=complex)


def inner_product(psi1: WaveFunction, psi2: WaveFunction) -> complex:
    """``<psi1|psi2>`` by coefficient contraction."""
    a, b = _align(psi1, psi2)
    return complex(sum(np.vdot(x, y) for x, y in zip(a.blocks, b.blocks)))


def inner_product_quadrature(psi1: WaveFunction, psi2: WaveFunction, grid=None) -> complex:
    """``<psi1|psi2>`` by SO(3) quadrature of the evaluated functions."""
    a, b = _align(psi1, psi2)
    if grid is None:
        L = 2 * a.jmax + 2
        grid = euler_grid(L + 1, L // 2 + 1, L + 1)
    p, t, s = grid.coords.T
    return complex(grid.integrate(np.conj(evaluate_euler(a, p, t, s)) * evaluate_euler(b, p, t, s)))


# ---------------------------------------------------------------- operators


def apply_Lk(psi: WaveFunction, k: int) -> WaveFunction:
    """Intrinsic angular momentum ``L'_k = -i hbar Z_k``, k in {1, 2, 3}."""
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    return psi.with_blocks([psi.hbar * C @ spin_matrices(j)[k - 1] for j, C in enumerate(psi.blocks)])


def apply_Z(psi: WaveFunction, k: int) -> WaveFunction:
    """Right generator ``Z_k`` acting on the state."""
    return apply_Lk(psi, k).scaled(1j / psi.hbar)


@dataclass(frozen=True)
class OperatorMatrix:
    """Block-diagonal operator acting on the intrinsic index: ``C_j -> C_j @ blocks[j]``."""

    blocks: tuple
    hbar: float

    @property
    def jmax(self) -> int:
        return len(self.blocks) - 1

    def apply(self, psi: WaveFunction) -> WaveFunction:
        if psi.hbar != self.hbar:
            raise HbarMismatchError("operator and state use different hbar")
        if psi.jmax > self.jmax:
            raise ValueError("state exceeds operator jmax")
        return psi.with_blocks([C @ self.blocks[j] for j, C in enumerate(psi.blocks)])

    def eigenvalues(self, j: int) -> np.ndarray:
        return np.linalg.eigvalsh(self.blocks[j])

    def expectation(self, psi: WaveFunction) -> float:
        return inner_product(psi, self.apply(psi)).real

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(np.allclose(b, b.conj().T, atol=tol) for b in self.blocks)


def zero_point_energy(inertia: InertiaTensor, hbar: float) -> float:
    return float(sum(hbar**2 / (12.0 * I) for I in inertia.as_array()))


def hamiltonian(inertia: InertiaTensor, hbar: float = 1.0, include_zero_point: bool = True,
                jmax: int = 8) -> OperatorMatrix:
    """``H = sum_k L'_k^2 / 2I_k`` (+ ``eps_0 = sum_k hbar^2/12 I_k`` when requested)."""
    I = inertia.as_array()
    eps0 = zero_point_energy(inertia, hbar) if include_zero_point else 0.0
    blocks = []
    for j in range(jmax + 1):
        Js = spin_matrices(j)
        h = sum(hbar**2 * (Js[a] @ Js[a]) / (2.0 * I[a]) for a in range(3))
        h = 0.5 * (h + h.conj().T) + eps0 * np.eye(2 * j + 1)
        h.setflags(write=False)
        blocks.append(h)
    return OperatorMatrix(tuple(blocks), hbar)


def casimir(hbar: float, jmax: int) -> OperatorMatrix:
    blocks = []
    for j in range(jmax + 1):
        Js = spin_matrices(j)
        blocks.append(hbar**2 * sum(M @ M for M in Js))
    return OperatorMatrix(tuple(blocks), hbar)


def right_translate(psi: WaveFunction, gamma_vec) -> WaveFunction:
    """The state ``R -> psi(R expm(gamma_vec . xi))``."""
    v = np.asarray(gamma_vec, dtype=float)
    if np.linalg.norm(v) > 2 * np.pi + 1e-12:
        raise DomainError("translation angle must not exceed 2 pi")
    return psi.with_blocks([C @ rep_exp(j, v).conj().T for j, C in enumerate(psi.blocks)])


def schrodinger_evolve(psi: WaveFunction, inertia: InertiaTensor, t: float,
                       include_zero_point: bool = True) -> WaveFunction:
    """Exact evolution ``exp(-i H t / hbar)`` by dense diagonalisation of each j-block."""
    H = hamiltonian(inertia, psi.hbar, include_zero_point, psi.jmax)
    blocks = []
    for j, C in enumerate(psi.blocks):
        w, v = np.linalg.eigh(H.blocks[j])
        prop = (v * np.exp(-1j * w * t / psi.hbar)) @ v.conj().T
        blocks.append(C @ prop)
    return psi.with_blocks(blocks)


# ---------------------------------------------------------------- projection


def _field_on_grid(f: ScalarField, P, T, S) -> np.ndarray:
    fn = f.on_euler
    if fn is None:
        from .geometry import euler_matrix

        mats = euler_matrix(P, T, S)
        return np.array([f.on_rotation(m) for m in mats.reshape(-1, 3, 3)]).reshape(P.shape)
    try:
        vals = np.asarray(fn(P, T, S))
        if vals.shape == P.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.vectorize(fn)(P, T, S)


def project_samples(samples: np.ndarray, jmax: int, n_phi: int, n_theta: int, n_psi: int,
                    hbar: float = 1.0) -> WaveFunction:
    """Coefficients ``c_{mk} = <phi_{mk}|f>`` from samples on an :func:`euler_grid` layout.

    Uses an FFT over (phi, psi) and Gauss-Legendre in cos(theta).
    """
    if n_phi <= 2 * jmax or n_psi <= 2 * jmax:
        raise ValueError("phi/psi resolution must exceed 2*jmax to avoid aliasing")
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x[::-1])
    wx = wx[::-1]
    samples = np.asarray(samples).reshape(n_phi, n_theta, n_psi)
    F = np.fft.fft(np.fft.fft(samples, axis=0), axis=2) * (2 * np.pi / n_phi) * (2 * np.pi / n_psi)
    blocks = []
    for j in range(jmax + 1):
        ks = np.arange(-j, j + 1)
        mid = rep_axis(j, 0, theta)  # (n_theta, d, d)
        Fj = F[np.ix_(ks % n_phi, np.arange(n_theta), ks % n_psi)]  # (d, n_theta, d)
        c = norm_factor(j) * np.einsum("t,tmk,mtk->mk", wx, mid, Fj)
        blocks.append(c)
    return WaveFunction(hbar, jmax, tuple(blocks))


@dataclass(frozen=True)
class Projection:
    state: WaveFunction
    truncation_loss: float
    density_integral: float


def from_action_wave(n: ScalarField, S: ScalarField, hbar: float = 1.0, jmax: int = 8,
                     max_loss: float = 1e-3, oversample: int = 4, normalize: bool = True) -> Projection:
    """Project ``sqrt(n) exp(i S / hbar)`` onto the truncated Wigner basis."""
    L = oversample * (jmax + 1)
    n_phi = n_psi = 2 * L + 2
    n_theta = L + 2
    grid = euler_grid(n_phi, n_theta, n_psi)
    P, T, Sg = (grid.coords[:, a].reshape(grid.shape) for a in range(3))
    nv = np.real(_field_on_grid(n, P, T, Sg))
    if np.any(nv < -1e-14):
        raise DomainError("density n must be non-negative")
    total = float(grid.integrate(nv.ravel()))
    if abs(total - 1.0) > 1e-6:
        raise DomainError(f"density must integrate to 1 over SO(3), got {total:.8g}")
    sv = np.real(_field_on_grid(S, P, T, Sg))
    values = np.sqrt(np.clip(nv, 0.0, None)) * np.exp(1j * sv / hbar)
    psi = project_samples(values, jmax, n_phi, n_theta, n_psi, hbar)
    loss = 1.0 - psi.norm2()
    if loss > max_loss:
        raise TruncationLossError(f"truncation loss {loss:.3e} exceeds bound {max_loss:.1e}")
    if normalize:
        psi = psi.normalize()
    return Projection(psi, float(loss), total)


def expectation_Lk(psi: WaveFunction, k: int) -> float:
    return inner_product(psi, apply_Lk(psi, k)).real


def expectation_Lk2(psi: WaveFunction, k: int) -> float:
    v = apply_Lk(psi, k)
    return inner_product(v, v).real


def random_rotation_stack(rng: np.random.Generator, n: int) -> np.ndarray:
    from scipy.spatial.transform import Rotation as _R

    return _R.random(n, random_state=rng).as_matrix()


__all__: Sequence[str] = [
    "WaveFunction", "OperatorMatrix", "Projection", "spin_matrices", "rep_axis", "rep_euler",
    "rep_exp", "rep_matrix", "wigner_small_d", "evaluate", "evaluate_euler", "inner_product",
    "inner_product_quadrature", "apply_Lk", "apply_Z", "hamiltonian", "casimir", "right_translate",
    "schrodinger_evolve", "from_action_wave", "project_samples", "zero_point_energy",
    "expectation_Lk", "expectation_Lk2", "Rotation",
]
