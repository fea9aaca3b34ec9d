"""Classical conservative, dissipative and heat-exchange dynamics.

Systems are described by per-coordinate masses, a potential U(q) and a
nonconservative force law F2(qdot).  The equations of motion integrated here
are the generalized Lagrange equations

    m_i qddot_i = -dU/dq_i + F2_i                  (force systems)
    m_i qddot_i = -dU/dq_i - S dT/dq_i             (heat exchange)

and every trajectory carries the bookkeeping needed to check that the
generalized energies H - w2 and H + T(q) S stay constant.

All values are SI.  States and systems are immutable; stepping returns new
objects.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import PropagationError

FORCE_KINDS = ("none", "linear-drag", "radiant")


def _vector(values, name):
    arr = np.atleast_1d(np.asarray(values, dtype=float)).copy()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GeneralizedState:
    """Time, generalized coordinates and generalized velocities."""

    t: float
    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        q = _vector(self.q, "q")
        qdot = _vector(self.qdot, "qdot")
        if q.size == 0:
            raise ValueError("a state needs at least one coordinate")
        if q.shape != qdot.shape:
            raise ValueError(f"q has {q.size} entries but qdot has {qdot.size}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qdot)) and math.isfinite(self.t)):
            raise ValueError("state entries must be finite")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qdot)

    @property
    def dim(self):
        return self.q.size


# --------------------------------------------------------------------------
# scalar fields


class Potential:
    """Scalar potential energy U(q) with an analytic gradient.

    ``value`` and ``gradient`` accept a single point of shape ``(d,)`` or a
    stack of points of shape ``(n, d)``.
    """

    def value(self, q):
        raise NotImplementedError

    def gradient(self, q):
        raise NotImplementedError

    def linear_form(self):
        """Return ``(K, f)`` with ``gradient(q) == K @ q - f``, or None."""
        return None


class QuadraticPotential(Potential):
    """U(q) = 1/2 sum_i spring_i (q_i - center_i)^2.

    Zero springs are allowed; a coordinate with zero spring is cyclic.
    """

    def __init__(self, springs, center=0.0):
        self.springs = _vector(springs, "springs")
        self.center = np.broadcast_to(np.asarray(center, dtype=float), self.springs.shape).copy()

    @classmethod
    def zero(cls, dim=1):
        return cls(np.zeros(dim))

    def value(self, q):
        dq = np.asarray(q, dtype=float) - self.center
        return 0.5 * np.sum(self.springs * dq * dq, axis=-1)

    def gradient(self, q):
        return self.springs * (np.asarray(q, dtype=float) - self.center)

    def linear_form(self):
        return np.diag(self.springs), self.springs * self.center

    def __repr__(self):
        return f"QuadraticPotential(springs={self.springs.tolist()}, center={self.center.tolist()})"


class CallablePotential(Potential):
    """Wrap user functions ``func(q)`` and ``grad(q)``."""

    def __init__(self, func, grad):
        self.func = func
        self.grad = grad

    def value(self, q):
        q = np.asarray(q, dtype=float)
        if q.ndim == 1:
            return float(self.func(q))
        return np.array([self.func(row) for row in q])

    def gradient(self, q):
        q = np.asarray(q, dtype=float)
        if q.ndim == 1:
            return np.asarray(self.grad(q), dtype=float)
        return np.array([self.grad(row) for row in q])


class TemperatureField:
    """Temperature T(q) in kelvin with an analytic gradient."""

    def value(self, q):
        raise NotImplementedError

    def gradient(self, q):
        raise NotImplementedError

    def constant_gradient(self):
        """Gradient vector if it does not depend on q, else None."""
        return None


class LinearTemperature(TemperatureField):
    """T(q) = base + slope . q"""

    def __init__(self, base, slope):
        self.base = float(base)
        self.slope = _vector(slope, "slope")

    def value(self, q):
        return self.base + np.asarray(q, dtype=float) @ self.slope

    def gradient(self, q):
        q = np.asarray(q, dtype=float)
        return np.broadcast_to(self.slope, q.shape).copy()

    def constant_gradient(self):
        return self.slope

    def __repr__(self):
        return f"LinearTemperature(base={self.base}, slope={self.slope.tolist()})"


class CallableTemperature(TemperatureField):
    def __init__(self, func, grad):
        self.func = func
        self.grad = grad

    def value(self, q):
        q = np.asarray(q, dtype=float)
        if q.ndim == 1:
            return float(self.func(q))
        return np.array([self.func(row) for row in q])

    def gradient(self, q):
        q = np.asarray(q, dtype=float)
        if q.ndim == 1:
            return np.asarray(self.grad(q), dtype=float)
        return np.array([self.grad(row) for row in q])


def gradient_error(field_, points, step=1e-6):
    """Largest relative mismatch between the analytic gradient of ``field_``
    and a central finite difference of its value, over ``points`` (n, d).
    """
    worst = 0.0
    for q in np.atleast_2d(np.asarray(points, dtype=float)):
        analytic = np.asarray(field_.gradient(q), dtype=float)
        numeric = np.empty_like(q)
        for i in range(q.size):
            e = np.zeros_like(q)
            h = step * max(1.0, abs(q[i]))
            e[i] = h
            numeric[i] = (field_.value(q + e) - field_.value(q - e)) / (2 * h)
        scale = max(np.max(np.abs(analytic)), 1.0)
        worst = max(worst, float(np.max(np.abs(analytic - numeric)) / scale))
    return worst


# --------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class ForceLaw:
    """Velocity-linear nonconservative force.

    ``linear-drag`` is F = -k v.  ``radiant`` is the heat-exchange force:
    F = -k v while the particle absorbs heat and F = +k v while it delivers
    heat (``absorbing=False``).
    """

    kind: str = "none"
    k: float = 0.0
    absorbing: bool = True

    def __post_init__(self):
        if self.kind not in FORCE_KINDS:
            raise ValueError(f"unknown force kind {self.kind!r}; expected one of {FORCE_KINDS}")
        if not (math.isfinite(self.k) and self.k >= 0):
            raise ValueError(f"drag coefficient k must be finite and >= 0, got {self.k}")

    @property
    def coefficient(self):
        """c such that F2 = c * qdot."""
        if self.kind == "none":
            return 0.0
        if self.kind == "radiant" and not self.absorbing:
            return self.k
        return -self.k

    def __call__(self, qdot):
        return self.coefficient * np.asarray(qdot, dtype=float)


@dataclass(frozen=True)
class MechanicalSystem:
    masses: np.ndarray
    potential: Potential
    force: ForceLaw = field(default_factory=ForceLaw)

    def __post_init__(self):
        masses = _vector(self.masses, "masses")
        if masses.size == 0:
            raise ValueError("zero-dimensional systems are not supported")
        if not np.all(masses > 0):
            raise ValueError("masses must be strictly positive")
        object.__setattr__(self, "masses", masses)

    @classmethod
    def harmonic(cls, mass=1.0, spring=1.0, force=None):
        """One-dimensional oscillator U = spring q^2 / 2."""
        return cls(np.array([mass]), QuadraticPotential([spring]), force or ForceLaw())

    @classmethod
    def free(cls, masses, force=None):
        masses = _vector(masses, "masses")
        return cls(masses, QuadraticPotential.zero(masses.size), force or ForceLaw())

    @property
    def dim(self):
        return self.masses.size

    def kinetic(self, qdot):
        qdot = np.asarray(qdot, dtype=float)
        return 0.5 * np.sum(self.masses * qdot * qdot, axis=-1)

    def acceleration(self, q, qdot):
        return (self.force(qdot) - self.potential.gradient(q)) / self.masses

    def generalized_force(self, q, qdot):
        """Right-hand side of m qddot = ... excluding inertia."""
        return self.force(qdot) - self.potential.gradient(q)

    def affine_form(self):
        """(A, b) with d/dt [q, qdot] = A [q, qdot] + b, or None if nonlinear."""
        lin = self.potential.linear_form()
        if lin is None:
            return None
        K, f = lin
        d = self.dim
        A = np.zeros((2 * d, 2 * d))
        A[:d, d:] = np.eye(d)
        A[d:, :d] = -K / self.masses[:, None]
        A[d:, d:] = np.eye(d) * self.force.coefficient / self.masses[:, None]
        b = np.concatenate([np.zeros(d), f / self.masses])
        return A, b


@dataclass(frozen=True)
class HeatExchangeSystem:
    """Conservative base system coupled to a temperature field at fixed entropy.

    The thermal potential T(q) S acts like an extra potential energy term, so
    the particle is pushed down the temperature gradient with force -S dT/dq.
    """

    base: MechanicalSystem
    entropy: float
    temperature: TemperatureField

    def __post_init__(self):
        if self.base.force.kind != "none":
            raise ValueError("the base system of a heat-exchange system must have force kind 'none'")
        if not math.isfinite(self.entropy):
            raise ValueError("entropy must be finite")
        object.__setattr__(self, "entropy", float(self.entropy))

    @property
    def masses(self):
        return self.base.masses

    @property
    def potential(self):
        return self.base.potential

    @property
    def dim(self):
        return self.base.dim

    def kinetic(self, qdot):
        return self.base.kinetic(qdot)

    def _check_temperature(self, q):
        T = self.temperature.value(q)
        if not np.all(np.asarray(T) > 0):
            raise ValueError(f"temperature field is non-positive (T={T})")
        return T

    def generalized_force(self, q, qdot):
        self._check_temperature(q)
        return -self.potential.gradient(q) - self.entropy * self.temperature.gradient(q)

    def acceleration(self, q, qdot):
        return self.generalized_force(q, qdot) / self.masses

    def affine_form(self):
        lin = self.base.affine_form()
        slope = self.temperature.constant_gradient()
        if lin is None or slope is None:
            return None
        A, b = lin
        b = b.copy()
        b[self.dim:] -= self.entropy * slope / self.masses
        return A, b


# --------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Sample:
    state: GeneralizedState
    kinetic: float
    potential: float
    H: float
    w2: float
    Hbar: float


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled trajectory, stored column-wise.

    ``w2`` is the accumulated nonconservative work.  For heat-exchange runs it
    holds -Q = -T(q) S, so ``Hbar == H - w2`` in both cases.
    """

    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    kinetic: np.ndarray
    potential: np.ndarray
    H: np.ndarray
    w2: np.ndarray
    Hbar: np.ndarray
    heat: bool = False

    def __post_init__(self):
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self):
        return self.t.size

    def state(self, i):
        return GeneralizedState(self.t[i], self.q[i], self.qdot[i])

    def sample(self, i):
        return Sample(self.state(i), float(self.kinetic[i]), float(self.potential[i]),
                      float(self.H[i]), float(self.w2[i]), float(self.Hbar[i]))

    @property
    def samples(self):
        return [self.sample(i) for i in range(len(self))]


def _work_trapezoid(force, t, qdot):
    power = np.sum(force(qdot) * qdot, axis=-1)
    return cumulative_trapezoid(power, t, initial=0.0)


def accumulate_work(system, trajectory):
    """Work w2(t) = int_0^t F2 . qdot dtau of the nonconservative force,
    by the trapezoid rule on the stored samples.  w2[0] == 0.
    """
    if len(trajectory) == 0:
        raise ValueError("cannot accumulate work over an empty trajectory")
    return _work_trapezoid(system.force, trajectory.t, trajectory.qdot)


def make_record(system, t, q, qdot):
    """Assemble a TrajectoryRecord (energies, work, Hbar) from raw samples."""
    t = np.asarray(t, dtype=float)
    q = np.atleast_2d(np.asarray(q, dtype=float))
    qdot = np.atleast_2d(np.asarray(qdot, dtype=float))
    kin = system.kinetic(qdot)
    pot = system.potential.value(q)
    H = kin + pot
    if isinstance(system, HeatExchangeSystem):
        heat = system.temperature.value(q) * system.entropy
        w2 = -heat
        Hbar = H + heat
        is_heat = True
    else:
        w2 = _work_trapezoid(system.force, t, qdot) if t.size else np.zeros(0)
        Hbar = H - w2
        is_heat = False
    for arr in (t, q, qdot, kin, pot, H, w2, Hbar):
        arr.setflags(write=False)
    return TrajectoryRecord(t, q, qdot, kin, pot, H, w2, Hbar, heat=is_heat)


# --------------------------------------------------------------------------
# stepping


def _rk4(system, q, v, dt):
    a1 = system.acceleration(q, v)
    q2, v2 = q + 0.5 * dt * v, v + 0.5 * dt * a1
    a2 = system.acceleration(q2, v2)
    q3, v3 = q + 0.5 * dt * v2, v + 0.5 * dt * a2
    a3 = system.acceleration(q3, v3)
    q4, v4 = q + dt * v3, v + dt * a3
    a4 = system.acceleration(q4, v4)
    q_new = q + dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4)
    v_new = v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return q_new, v_new


def _step(system, state, dt, step):
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if state.dim != system.dim:
        raise ValueError(f"state has {state.dim} coordinates, system has {system.dim}")
    try:
        with np.errstate(all="raise"):
            q, v = _rk4(system, state.q, state.qdot, dt)
    except (FloatingPointError, ValueError) as exc:
        raise PropagationError(f"derivative evaluation failed ({exc})", step=step) from exc
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
        raise PropagationError("non-finite state", step=step)
    return GeneralizedState(state.t + dt, q, v)


def step_dissipative(system, state, dt, step=0):
    """One classical RK4 step of m qddot = -grad U + F2(qdot)."""
    return _step(system, state, dt, step)


def step_heat(system, state, dt, step=0):
    """One classical RK4 step of m qddot = -grad U - S grad T."""
    if not isinstance(system, HeatExchangeSystem):
        raise TypeError("step_heat needs a HeatExchangeSystem")
    return _step(system, state, dt, step)


def _rk4_matrix(A, b, dt):
    # RK4 applied to the affine ODE y' = A y + b, written as one augmented
    # linear map; this is algebraically the same scheme as _rk4.
    n = A.shape[0]
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = A
    M[:n, n] = b
    hM = dt * M
    R = np.eye(n + 1)
    term = np.eye(n + 1)
    for j in range(1, 5):
        term = term @ hM / j
        R = R + term
    return R


def integrate(system, state, dt, steps):
    """Integrate ``steps`` RK4 steps and return the full TrajectoryRecord.

    Works for both MechanicalSystem and HeatExchangeSystem.  Systems with a
    quadratic potential and (for heat exchange) a linear temperature field
    are stepped with the equivalent RK4 propagation matrix, which is much
    faster than stage-by-stage evaluation.
    """
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if state.dim != system.dim:
        raise ValueError(f"state has {state.dim} coordinates, system has {system.dim}")
    d = system.dim
    t = state.t + dt * np.arange(steps + 1)
    Y = np.empty((steps + 1, 2 * d))
    Y[0, :d], Y[0, d:] = state.q, state.qdot

    affine = system.affine_form()
    if affine is not None:
        R = _rk4_matrix(*affine, dt)
        Rl, r = R[:-1, :-1].T.copy(), R[:-1, -1].copy()
        y = Y[0]
        for i in range(steps):
            y = y @ Rl + r
            Y[i + 1] = y
        if not np.all(np.isfinite(Y)):
            bad = int(np.argmax(~np.all(np.isfinite(Y), axis=1)))
            raise PropagationError("non-finite state", step=bad)
        if isinstance(system, HeatExchangeSystem):
            T = system.temperature.value(Y[:, :d])
            if not np.all(T > 0):
                raise PropagationError("temperature field is non-positive",
                                       step=int(np.argmax(T <= 0)))
    else:
        current = state
        for i in range(steps):
            current = _step(system, current, dt, i)
            Y[i + 1, :d], Y[i + 1, d:] = current.q, current.qdot
    return make_record(system, t, Y[:, :d], Y[:, d:])


# --------------------------------------------------------------------------
# energies and identities


def kinetic_energy(system, state):
    return float(system.kinetic(state.qdot))


def eval_lagrangian(system, state):
    """L = sum_i m_i qdot_i^2 / 2 - U(q)."""
    if state.dim != system.dim:
        raise ValueError(f"state has {state.dim} coordinates, system has {system.dim}")
    return float(system.kinetic(state.qdot) - system.potential.value(state.q))


def generalized_energy(system, sample):
    """Hbar = H - w2 for a force system."""
    return sample.H - sample.w2


def heat_generalized_energy(system, sample):
    """Hbar = T_kin + U + T(q) S, recomputed from the sample's state."""
    s = sample.state if isinstance(sample, Sample) else sample
    kin = system.kinetic(s.qdot)
    pot = system.potential.value(s.q)
    return float(kin + pot + system.temperature.value(s.q) * system.entropy)


def relative_drift(series, reference=None):
    """max |x - x[0]| / |reference| (reference defaults to x[0])."""
    series = np.asarray(series, dtype=float)
    ref = series[0] if reference is None else reference
    return float(np.max(np.abs(series - series[0])) / abs(ref))


def analytic_damped_oscillator(m, spring, k, q0, v0, t):
    """Closed-form underdamped solution of m qddot = -spring q - k qdot.

    Negative ``k`` (energy gain) is accepted as long as k^2 < 4 m spring.
    Returns ``(q, qdot)``; ``t`` may be an array.
    """
    if not (m > 0 and spring > 0):
        raise ValueError("mass and spring must be positive")
    if k * k >= 4.0 * m * spring:
        raise ValueError("analytic oracle covers only the underdamped regime k^2 < 4 m spring")
    t = np.asarray(t, dtype=float)
    gamma = k / (2.0 * m)
    wd = math.sqrt(spring / m - gamma * gamma)
    a = q0
    b = (v0 + gamma * q0) / wd
    decay = np.exp(-gamma * t)
    c, s = np.cos(wd * t), np.sin(wd * t)
    q = decay * (a * c + b * s)
    qdot = decay * ((b * wd - gamma * a) * c - (gamma * b + a * wd) * s)
    if q.ndim == 0:
        return float(q), float(qdot)
    return q, qdot


def damped_period(m, spring, k=0.0):
    """2 pi / omega_d of the underdamped oscillator."""
    gamma = k / (2.0 * m)
    return 2.0 * math.pi / math.sqrt(spring / m - gamma * gamma)


def el_residual(system, trajectory, index):
    """Discrete Euler-Lagrange residual at an interior sample.

    Velocity and acceleration come from three-point differences of the
    stored coordinates only, so a path that is not a solution shows up even
    if its stored velocities are consistent with it.  For a force system the
    residual is m qddot + dU/dq - F2(qdot); for a heat-exchange system it is
    m qddot + dU/dq + S dT/dq.
    """
    n = len(trajectory)
    if not 1 <= index <= n - 2:
        raise ValueError(f"index {index} needs neighbours on both sides (1 <= index <= {n - 2})")
    return _el_residuals(system, trajectory.t, trajectory.q, index, index + 1)[0]


def el_residuals(system, trajectory):
    """el_residual at every interior sample, shape (len - 2, d)."""
    n = len(trajectory)
    if n < 3:
        raise ValueError("need at least three samples")
    return _el_residuals(system, trajectory.t, trajectory.q, 1, n - 1)


def _el_residuals(system, t, q, lo, hi):
    h1 = (t[lo:hi] - t[lo - 1:hi - 1])[:, None]
    h2 = (t[lo + 1:hi + 1] - t[lo:hi])[:, None]
    qm, q0, qp = q[lo - 1:hi - 1], q[lo:hi], q[lo + 1:hi + 1]
    denom = h1 * h2 * (h1 + h2)
    qdot = (h1 * h1 * qp - h2 * h2 * qm - (h1 * h1 - h2 * h2) * q0) / denom
    qddot = 2.0 * (h1 * qp - (h1 + h2) * q0 + h2 * qm) / denom
    inertia = system.masses * qddot
    if isinstance(system, HeatExchangeSystem):
        return inertia + system.potential.gradient(q0) + system.entropy * system.temperature.gradient(q0)
    return inertia + system.potential.gradient(q0) - system.force(qdot)


def power_balance(trajectory, system):
    """Central-difference dH/dt minus F2 . qdot at interior samples."""
    t, H = trajectory.t, trajectory.H
    dHdt = (H[2:] - H[:-2]) / (t[2:] - t[:-2])
    qdot = trajectory.qdot[1:-1]
    return dHdt - np.sum(system.force(qdot) * qdot, axis=-1)
