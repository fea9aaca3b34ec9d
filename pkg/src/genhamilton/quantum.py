"""1D wavepacket propagation under H = -hbar^2/(2m) d2/dx2 + V(x) - i hbar D k / m.

The dissipative term is a constant multiple of the identity, so it commutes
with everything else: the exact solution is exp(-D k t / m) times the
solution of the Hermitian (k = 0) problem.  Two propagators are provided:

``cayley``
    Crank-Nicolson applied to the full non-Hermitian operator.
``factored``
    Crank-Nicolson for the Hermitian part followed by the exact scalar decay.

Both use Dirichlet edges: amplitudes outside the grid are zero.  Natural
units (hbar = m = 1) are the default.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import PropagationError

PROPAGATORS = ("cayley", "factored")


@dataclass(frozen=True)
class SpatialGrid:
    x0: float
    dx: float
    n: int

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError(f"grid spacing must be positive, got {self.dx}")
        if self.n < 16:
            raise ValueError(f"grid needs at least 16 points, got {self.n}")

    @classmethod
    def from_bounds(cls, x_min, x_max, n):
        """Grid of ``n`` points spanning [x_min, x_max] inclusive."""
        return cls(float(x_min), (x_max - x_min) / (n - 1), int(n))

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.n)


@dataclass(frozen=True)
class Wavefunction:
    grid: SpatialGrid
    amps: np.ndarray
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).copy()
        if amps.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        if not (self.mass > 0 and self.hbar > 0):
            raise ValueError("mass and hbar must be positive")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def norm(self):
        """sqrt(sum |psi|^2 dx)"""
        return math.sqrt(float(np.sum(np.abs(self.amps) ** 2)) * self.grid.dx)

    def with_amps(self, amps):
        return Wavefunction(self.grid, amps, self.mass, self.hbar)


def _zero_potential(x):
    return np.zeros_like(x)


def harmonic_potential(mass=1.0, omega=1.0):
    def V(x):
        return 0.5 * mass * omega**2 * x**2
    return V


@dataclass(frozen=True)
class QuantumConfig:
    """Propagation settings.  ``potential`` maps an array of x to V(x)."""

    potential: object = _zero_potential
    k: float = 0.0
    dim_factor: int = 3
    dt: float = 1e-3
    steps: int = 1000
    boundary: str = "dirichlet"
    propagator: str = "cayley"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.k >= 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if int(self.dim_factor) != self.dim_factor or self.dim_factor < 1:
            raise ValueError(f"dim_factor must be a positive integer, got {self.dim_factor}")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.boundary != "dirichlet":
            raise ValueError(f"unsupported boundary {self.boundary!r}")
        if self.propagator not in PROPAGATORS:
            raise ValueError(f"propagator must be one of {PROPAGATORS}, got {self.propagator!r}")

    def decay_rate(self, mass):
        """D k / m, the amplitude decay rate."""
        return self.dim_factor * self.k / mass


@dataclass(frozen=True)
class Tridiagonal:
    """Complex tridiagonal matrix stored by diagonals."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    @property
    def n(self):
        return self.diag.size

    def matvec(self, v):
        out = self.diag * v
        out[1:] += self.lower * v[:-1]
        out[:-1] += self.upper * v[1:]
        return out

    def to_dense(self):
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def conj_transpose(self):
        return Tridiagonal(np.conj(self.upper), np.conj(self.diag), np.conj(self.lower))

    def scaled_shift(self, scale, shift):
        """shift * I + scale * self"""
        return Tridiagonal(scale * self.lower, shift + scale * self.diag, scale * self.upper)

    def banded(self):
        ab = np.zeros((3, self.n), dtype=complex)
        ab[0, 1:] = self.upper
        ab[1] = self.diag
        ab[2, :-1] = self.lower
        return ab


def build_hamiltonian(config, grid, mass=1.0, hbar=1.0, dissipative=True):
    """Finite-difference Hamiltonian on ``grid``.

    Kinetic part is the three-point stencil, the diagonal carries
    V(x_i) - i hbar D k / m.  Amplitudes beyond the edges are taken as zero.
    ``dissipative=False`` drops the imaginary shift (the Hermitian part H0).
    """
    x = grid.x
    c = hbar**2 / (2.0 * mass * grid.dx**2)
    V = np.asarray(config.potential(x), dtype=float)
    if V.shape != x.shape:
        V = np.broadcast_to(V, x.shape)
    diag = (2.0 * c + V).astype(complex)
    if dissipative:
        diag = diag - 1j * hbar * config.decay_rate(mass)
    off = np.full(grid.n - 1, -c, dtype=complex)
    return Tridiagonal(off, diag, off.copy())


class CrankNicolson:
    """Cached Cayley map (1 + i dt H / 2 hbar)^-1 (1 - i dt H / 2 hbar)."""

    def __init__(self, hamiltonian, dt, hbar=1.0):
        a = 1j * dt / (2.0 * hbar)
        self.lhs = hamiltonian.scaled_shift(a, 1.0)
        self.rhs = hamiltonian.scaled_shift(-a, 1.0)
        self._ab = self.lhs.banded()

    def __call__(self, amps, step=None):
        b = self.rhs.matvec(amps)
        try:
            out = solve_banded((1, 1), self._ab, b, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise PropagationError(f"singular Crank-Nicolson system ({exc})", step=step) from exc
        if not np.all(np.isfinite(out)):
            raise PropagationError("non-finite amplitudes", step=step)
        return out


class Propagator:
    """Steps a wavefunction with the configured scheme, reusing the factorised
    operators between steps.
    """

    def __init__(self, config, grid, mass=1.0, hbar=1.0):
        self.config = config
        self.grid = grid
        self.mass = mass
        self.hbar = hbar
        if config.propagator == "cayley":
            H = build_hamiltonian(config, grid, mass, hbar, dissipative=True)
            self.decay = 1.0
        else:
            H = build_hamiltonian(config, grid, mass, hbar, dissipative=False)
            self.decay = decay_oracle(config.dt, config.k, mass, config.dim_factor)
        self._cn = CrankNicolson(H, config.dt, hbar)

    def step(self, amps, step=None):
        out = self._cn(amps, step)
        if self.decay != 1.0:
            out *= self.decay
        return out


def _check_compatible(psi, config, propagator):
    if config.propagator != propagator:
        raise ValueError(f"config.propagator is {config.propagator!r}, expected {propagator!r}")


def step_cayley(psi, config):
    """One Crank-Nicolson step of the full non-Hermitian equation."""
    _check_compatible(psi, config, "cayley")
    prop = Propagator(config, psi.grid, psi.mass, psi.hbar)
    return psi.with_amps(prop.step(psi.amps))


def step_factored(psi, config):
    """Hermitian Crank-Nicolson step times exp(-D k dt / m)."""
    _check_compatible(psi, config, "factored")
    prop = Propagator(config, psi.grid, psi.mass, psi.hbar)
    return psi.with_amps(prop.step(psi.amps))


def decay_oracle(t, k, m, D=3):
    """Exact amplitude ratio norm(t) / norm(0) = exp(-D k t / m)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return math.exp(-D * k * t / m)


def gaussian_packet(grid, x0, p0, sigma, mass=1.0, hbar=1.0):
    """Normalised packet proportional to exp(-(x-x0)^2 / 4 sigma^2 + i p0 x / hbar).

    ``sigma`` is the position standard deviation of |psi|^2.
    """
    if sigma < 4 * grid.dx:
        raise ValueError(f"sigma={sigma} is under-resolved: need sigma >= 4 dx = {4 * grid.dx}")
    x = grid.x
    if not x[0] < x0 < x[-1]:
        raise ValueError(f"x0={x0} lies outside the grid interior ({x[0]}, {x[-1]})")
    amps = np.exp(-((x - x0) ** 2) / (4.0 * sigma**2) + 1j * p0 * x / hbar)
    psi = Wavefunction(grid, amps, mass, hbar)
    return psi.with_amps(psi.amps / psi.norm)


@dataclass(frozen=True)
class Observables:
    t: float
    norm: float
    x: float
    p: float
    energy: float


def _central_derivative(amps, dx):
    padded = np.concatenate(([0.0], amps, [0.0]))
    return (padded[2:] - padded[:-2]) / (2.0 * dx)


def observables(psi, config, t=0.0):
    """Norm and normalised <x>, <p>, <H0> of ``psi``.

    <p> uses the central difference, which is the momentum consistent with the
    three-point kinetic stencil (d<x>/dt = <p>/m holds exactly in space).
    """
    dx = psi.grid.dx
    rho = np.abs(psi.amps) ** 2
    norm2 = float(np.sum(rho)) * dx
    if not norm2 > 0:
        raise ValueError("zero-norm wavefunction has no expectation values")
    x_mean = float(np.sum(psi.grid.x * rho)) * dx / norm2
    dpsi = _central_derivative(psi.amps, dx)
    p_mean = psi.hbar * float(np.imag(np.sum(np.conj(psi.amps) * dpsi))) * dx / norm2
    H0 = build_hamiltonian(config, psi.grid, psi.mass, psi.hbar, dissipative=False)
    e_mean = float(np.real(np.sum(np.conj(psi.amps) * H0.matvec(psi.amps)))) * dx / norm2
    return Observables(float(t), math.sqrt(norm2), x_mean, p_mean, e_mean)


@dataclass
class ObservableSeries:
    t: list = field(default_factory=list)
    norm: list = field(default_factory=list)
    x: list = field(default_factory=list)
    p: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    def append(self, obs):
        self.t.append(obs.t)
        self.norm.append(obs.norm)
        self.x.append(obs.x)
        self.p.append(obs.p)
        self.energy.append(obs.energy)

    def arrays(self):
        return {name: np.asarray(getattr(self, name)) for name in ("t", "norm", "x", "p", "energy")}

    def __len__(self):
        return len(self.t)


def propagate(psi, config, record_every=1, edge_tolerance=None):
    """Run ``config.steps`` steps.  Returns ``(final_psi, series)``.

    ``edge_tolerance``, when set, asserts that the boundary amplitudes of the
    normalised wavefunction stay below it at every step.
    """
    prop = Propagator(config, psi.grid, psi.mass, psi.hbar)
    series = ObservableSeries()
    H0 = build_hamiltonian(config, psi.grid, psi.mass, psi.hbar, dissipative=False)
    x = psi.grid.x
    dx = psi.grid.dx

    def record(amps, t):
        rho = np.abs(amps) ** 2
        norm2 = float(np.sum(rho)) * dx
        if not norm2 > 0:
            raise PropagationError("wavefunction norm vanished")
        p = psi.hbar * float(np.imag(np.sum(np.conj(amps) * _central_derivative(amps, dx)))) * dx
        e = float(np.real(np.sum(np.conj(amps) * H0.matvec(amps)))) * dx
        series.append(Observables(t, math.sqrt(norm2), float(np.sum(x * rho)) * dx / norm2,
                                  p / norm2, e / norm2))

    amps = np.array(psi.amps)
    record(amps, 0.0)
    for i in range(config.steps):
        amps = prop.step(amps, step=i)
        if edge_tolerance is not None:
            edge = max(abs(amps[0]), abs(amps[-1])) / math.sqrt(np.sum(np.abs(amps) ** 2) * dx)
            if edge > edge_tolerance:
                raise PropagationError(f"boundary amplitude {edge:.3e} exceeds {edge_tolerance:.1e}", step=i)
        if (i + 1) % record_every == 0 or i + 1 == config.steps:
            record(amps, (i + 1) * config.dt)
    return psi.with_amps(amps), series


def free_gaussian_variance(t, sigma, mass=1.0, hbar=1.0):
    """Position variance of a free Gaussian packet: sigma^2 (1 + (hbar t / 2 m sigma^2)^2)."""
    return sigma**2 * (1.0 + (hbar * t / (2.0 * mass * sigma**2)) ** 2)


def position_variance(psi):
    rho = np.abs(psi.amps) ** 2
    x = psi.grid.x
    w = rho / np.sum(rho)
    mean = np.sum(x * w)
    return float(np.sum((x - mean) ** 2 * w))
