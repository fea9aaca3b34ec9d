"""Level entropies, the temperature eigenproblem and temperature-corrected spectra.

Entropies are returned in units of k_B.  Energies are in joules, temperatures
in kelvin, frequencies in hertz.  Hydrogen base energies are the Bohr values
-R_y / n^2; each of the n^2 degenerate states of level n is occupied with
probability 1 / n^2.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy import constants
from scipy.integrate import trapezoid
from scipy.special import xlogy

K_B = constants.k
H_PLANCK = constants.h
RYDBERG_ENERGY = constants.physical_constants["Rydberg constant times hc in J"][0]

STATISTICS = ("fermi", "bose")


def _scalar_or_array(values):
    return float(values) if np.ndim(values) == 0 else values


def entropy_fermi(ni):
    """-[n ln n + (1 - n) ln(1 - n)], with 0 ln 0 = 0."""
    n = np.asarray(ni, dtype=float)
    if np.any(~np.isfinite(n)) or np.any(n < 0) or np.any(n > 1):
        raise ValueError(f"Fermi occupation must lie in [0, 1], got {ni}")
    return _scalar_or_array(-(xlogy(n, n) + xlogy(1.0 - n, 1.0 - n)))


def entropy_bose(ni):
    """-[n ln n - (1 + n) ln(1 + n)] for n > 0."""
    n = np.asarray(ni, dtype=float)
    if np.any(~np.isfinite(n)) or np.any(n <= 0):
        raise ValueError(f"Bose occupation must be > 0, got {ni}")
    return _scalar_or_array(-(xlogy(n, n) - (1.0 + n) * np.log1p(n)))


def level_entropy(ni, statistics="fermi"):
    if statistics == "fermi":
        return entropy_fermi(ni)
    if statistics == "bose":
        return entropy_bose(ni)
    raise ValueError(f"statistics must be one of {STATISTICS}, got {statistics!r}")


@dataclass(frozen=True)
class OccupationSpec:
    statistics: str
    ni: float

    def __post_init__(self):
        # validates range as a side effect
        level_entropy(self.ni, self.statistics)


@dataclass(frozen=True)
class ThermoLevel:
    """An energy level with its degeneracy and per-state average occupation."""

    n: int
    base_energy: float
    degeneracy: float
    occupation: float

    def __post_init__(self):
        if not self.degeneracy >= 1:
            raise ValueError(f"degeneracy must be >= 1, got {self.degeneracy}")

    @classmethod
    def hydrogen(cls, n, rydberg=RYDBERG_ENERGY):
        if int(n) != n or n < 1:
            raise ValueError(f"principal quantum number must be a positive integer, got {n}")
        n = int(n)
        return cls(n, -rydberg / n**2, n * n, 1.0 / (n * n))


@dataclass(frozen=True)
class TemperatureWave:
    """phi(T) = A exp(-T0 / T)"""

    T0: float
    A: float = 1.0

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"normalisation A must be positive, got {self.A}")

    def __call__(self, T):
        return temp_wavefunction(self, T)


@dataclass(frozen=True)
class TGrid:
    Tmin: float
    Tmax: float
    n: int

    def __post_init__(self):
        if not 0 < self.Tmin < self.Tmax:
            raise ValueError(f"need 0 < Tmin < Tmax, got {self.Tmin}, {self.Tmax}")
        if self.n < 16:
            raise ValueError(f"grid needs at least 16 points, got {self.n}")

    @property
    def T(self):
        return np.linspace(self.Tmin, self.Tmax, self.n)

    @property
    def dT(self):
        return (self.Tmax - self.Tmin) / (self.n - 1)

    def refined(self):
        """Same interval, half the spacing."""
        return TGrid(self.Tmin, self.Tmax, 2 * self.n - 1)


def temp_wavefunction(wave, T):
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("temperature must be positive")
    return _scalar_or_array(wave.A * np.exp(-wave.T0 / T))


def temp_eigen_residual(wave, grid, phi=None):
    """max |T^2 phi'(T) - T0 phi(T)| over interior grid points.

    phi' is the central difference on the grid, so for the exact
    eigenfunction the residual is O(dT^2).  ``phi`` substitutes another
    trial function (a callable of T) for ``wave``.
    """
    if not 0 <= wave.T0 <= grid.Tmax:
        raise ValueError(f"T0={wave.T0} outside [0, Tmax={grid.Tmax}]")
    T = grid.T
    values = np.asarray(phi(T) if phi is not None else temp_wavefunction(wave, T), dtype=float)
    dphi = (values[2:] - values[:-2]) / (2.0 * grid.dT)
    Ti = T[1:-1]
    return float(np.max(np.abs(Ti * Ti * dphi - wave.T0 * values[1:-1])))


def integrate_temperature_ode(T0, grid, phi0):
    """RK4 solution of phi' = T0 phi / T^2 on ``grid`` starting from phi(Tmin) = phi0."""
    T = grid.T
    h = grid.dT
    out = np.empty_like(T)
    out[0] = phi0

    def f(t, y):
        return T0 * y / (t * t)

    for i in range(T.size - 1):
        t, y = T[i], out[i]
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        out[i + 1] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return out


def energy_correction(level, statistics, T0):
    """Thermal eigenenergy f_n S(n_i) k_B T0 of a level, in joules."""
    return level.degeneracy * level_entropy(level.occupation, statistics) * K_B * T0


def corrected_level(level, T0):
    """E_n(T) = E_n - k_B f_n [n ln n + (1 - n) ln(1 - n)] T0."""
    ni = level.occupation
    if not 0 <= ni <= 1:
        raise ValueError(f"occupation must lie in [0, 1], got {ni}")
    bracket = xlogy(ni, ni) + xlogy(1.0 - ni, 1.0 - ni)
    return float(level.base_energy - K_B * level.degeneracy * bracket * T0)


def uncorrected_frequency(upper, lower):
    return (upper.base_energy - lower.base_energy) / H_PLANCK


def transition_frequency(upper, lower, T0):
    """(E_m(T) - E_n(T)) / h for a jump from ``upper`` down to ``lower``."""
    if not upper.base_energy > lower.base_energy:
        raise ValueError("upper level must lie above lower level")
    return (corrected_level(upper, T0) - corrected_level(lower, T0)) / H_PLANCK


def t0_denominator(m, n):
    """ln(m^2/n^2) - (m^2-1) ln(1-1/m^2) + (n^2-1) ln(1-1/n^2), k_B units.

    The n = 1 term is 0 ln 0 = 0.
    """
    if int(m) != m or int(n) != n or not m > n >= 1:
        raise ValueError(f"need integers m > n >= 1, got m={m}, n={n}")
    m2, n2 = float(m * m), float(n * n)
    return float(math.log(m2 / n2) - xlogy(m2 - 1.0, 1.0 - 1.0 / m2) + xlogy(n2 - 1.0, 1.0 - 1.0 / n2))


def extract_T0(nu_exp, nu_th, m, n):
    """Temperature constant from the measured shift of the hydrogen m -> n line."""
    return H_PLANCK * (nu_exp - nu_th) / (K_B * t0_denominator(m, n))


# -- operator identities ---------------------------------------------------


def _values(f, T):
    return np.asarray(f(T) if callable(f) else f)


def apply_temperature_operator(values, T):
    """T d/dT by central differences (one-sided second order at the ends)."""
    return T * np.gradient(values, T, edge_order=2)


def _inner(a, b, T):
    return complex(trapezoid(np.conj(a) * b, T))


def adjoint_defect(f, g, grid, edge_tolerance=1e-12):
    """<f, A g> + <A f, g> + <f, g> with A = T d/dT.

    Integration by parts gives A^dagger = -A - 1 for functions vanishing at
    the ends, so the defect tends to zero with the grid spacing while A
    itself is not self-adjoint.
    """
    T = grid.T
    fv, gv = _values(f, T), _values(g, T)
    for name, v in (("f", fv), ("g", gv)):
        if max(abs(v[0]), abs(v[-1])) >= edge_tolerance:
            raise ValueError(f"{name} must vanish at the grid edges (|{name}| < {edge_tolerance})")
    Af, Ag = apply_temperature_operator(fv, T), apply_temperature_operator(gv, T)
    defect = _inner(fv, Ag, T) + _inner(Af, gv, T) + _inner(fv, gv, T)
    return defect.real if defect.imag == 0 else defect


def symmetric_part(f, grid):
    """<f, A f> + <A f, f>; equals -<f, f> up to discretisation error."""
    T = grid.T
    fv = _values(f, T)
    Af = apply_temperature_operator(fv, T)
    return (_inner(fv, Af, T) + _inner(Af, fv, T)).real


def hermiticity_gap(f, grid):
    """<f, A f> - <A f, f>.  Zero for every f iff A were Hermitian."""
    T = grid.T
    fv = _values(f, T)
    Af = apply_temperature_operator(fv, T)
    return _inner(fv, Af, T) - _inner(Af, fv, T)


def bump(center, half_width):
    """Smooth compactly supported test function exp(-1 / (1 - u^2))."""
    def f(T):
        u = (np.asarray(T, dtype=float) - center) / half_width
        out = np.zeros_like(u)
        inside = np.abs(u) < 1
        out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
        return out
    return f


def commutator_check(f, T):
    """(T f'(T) - d/dT[T f(T)]) + f(T) for a polynomial ``f``.

    Derivatives are exact polynomial derivatives, so the result is zero up
    to round-off whenever [T, d/dT] = -1.
    """
    f = f if isinstance(f, Polynomial) else Polynomial(f)
    t_poly = Polynomial([0.0, 1.0])
    lhs = t_poly * f.deriv()
    rhs = (t_poly * f).deriv()
    T = np.asarray(T, dtype=float)
    return _scalar_or_array(lhs(T) - rhs(T) + f(T))


def plane_wave_residual(p, E, T0, x, t, T, mass=1.0, hbar=1.0, A=1.0):
    """Largest |i hbar d/dt psi + hbar^2/(2m) psi''| for
    psi = A exp(i (p x - E t) / hbar) exp(-T0 / T) at the sample points.

    The entropy term is absent (determinate state).  Derivatives of the
    plane wave are taken analytically.
    """
    x, t, T = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, t, T)))
    psi = A * np.exp(1j * (p * x - E * t) / hbar) * np.exp(-T0 / T)
    dt_psi = (-1j * E / hbar) * psi
    dxx_psi = (1j * p / hbar) ** 2 * psi
    residual = 1j * hbar * dt_psi - (-(hbar**2) / (2.0 * mass) * dxx_psi)
    return float(np.max(np.abs(residual)))


def hydrogen_levels(n_max, rydberg=RYDBERG_ENERGY):
    return [ThermoLevel.hydrogen(n, rydberg) for n in range(1, n_max + 1)]
