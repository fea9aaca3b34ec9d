"""Invariant suite over mechanics, quantum and thermoq at pinned parameters.

Every check returns a :class:`Check` carrying the measured value, the
tolerance it was compared against and the library functions it exercised.
Checks look functions up through their modules at call time, so a patched
function (e.g. in a mutation test) is what gets validated.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from . import mechanics as mech
from . import quantum as qm
from . import thermoq as tq


@dataclass
class Check:
    name: str
    module: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""
    uses: tuple = ()
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.module:9s} {self.name}: {self.detail}"


@dataclass
class Report:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __iter__(self):
        return iter(self.checks)

    def __len__(self):
        return len(self.checks)


@dataclass(frozen=True)
class ValidationSettings:
    classical_dt: float = 1e-3
    quantum_dt: float = 0.01
    quantum_n: int = 1024
    seed: int = 0


def _ratio_ok(ratio, lo=3.6, hi=4.4):
    return lo <= ratio <= hi


# --------------------------------------------------------------------------
# mechanics


def _damped_run(dt, k=0.1, periods=10.0):
    system = mech.MechanicalSystem.harmonic(1.0, 1.0, mech.ForceLaw("linear-drag", k))
    steps = int(round(periods * mech.damped_period(1.0, 1.0, k) / dt))
    state = mech.GeneralizedState(0.0, [1.0], [0.0])
    return system, mech.integrate(system, state, dt, steps)


def check_conservative_energy(s):
    system = mech.MechanicalSystem.harmonic(1.0, 1.0)
    dt = mech.damped_period(1.0, 1.0) / 1000
    rec = mech.integrate(system, mech.GeneralizedState(0.0, [1.0], [0.0]), dt, 10_000)
    drift = mech.relative_drift(rec.H)
    return Check("conservative H drift over 1e4 steps", "mechanics", drift, 1e-8, drift < 1e-8,
                 f"relative drift {drift:.2e} < 1e-8", ("integrate",))


def check_generalized_energy(s):
    system, rec = _damped_run(s.classical_dt)
    hbar = np.array([mech.generalized_energy(system, rec.sample(i)) for i in range(0, len(rec), 97)])
    drift = max(mech.relative_drift(rec.Hbar), mech.relative_drift(hbar))
    return Check("H - w2 conserved (damped oscillator, 10 periods)", "mechanics", drift, 1e-6,
                 drift < 1e-6, f"relative drift {drift:.2e} < 1e-6",
                 ("integrate", "accumulate_work", "generalized_energy"))


def check_work_bookkeeping(s):
    system, rec = _damped_run(s.classical_dt)
    w2 = mech.accumulate_work(system, rec)
    err = float(np.max(np.abs(w2 - (rec.H - rec.H[0]))) / rec.H[0])
    return Check("w2(t) equals H(t) - H(0)", "mechanics", err, 1e-6, err < 1e-6,
                 f"max relative mismatch {err:.2e} < 1e-6", ("accumulate_work",))


def _heat_system(slope=1.0, entropy=1.0):
    base = mech.MechanicalSystem.free([1.0])
    return mech.HeatExchangeSystem(base, entropy, mech.LinearTemperature(300.0, [slope]))


def check_heat_energy(s):
    system = _heat_system()
    rec = mech.integrate(system, mech.GeneralizedState(0.0, [0.0], [0.5]), 1e-3, 10_000)
    hbar = np.array([mech.heat_generalized_energy(system, rec.sample(i)) for i in range(0, len(rec), 101)])
    drift = max(mech.relative_drift(rec.Hbar), mech.relative_drift(hbar))
    return Check("H + T(q) S conserved over 1e4 steps", "mechanics", drift, 1e-8, drift < 1e-8,
                 f"relative drift {drift:.2e} < 1e-8",
                 ("integrate", "step_heat", "heat_generalized_energy"))


def check_cyclic_momentum(s):
    worst = 0.0
    pot = mech.QuadraticPotential([1.0, 0.0])
    sys_force = mech.MechanicalSystem(np.array([1.0, 2.0]), pot)
    state = mech.GeneralizedState(0.0, [1.0, 0.0], [0.0, 0.3])
    rec = mech.integrate(sys_force, state, 1e-3, 5000)
    worst = max(worst, float(np.max(np.abs(2.0 * rec.qdot[:, 1] - 0.6))))
    heat = mech.HeatExchangeSystem(mech.MechanicalSystem(np.array([1.0, 2.0]), pot), 1.0,
                                   mech.LinearTemperature(300.0, [0.5, 0.0]))
    rec = mech.integrate(heat, state, 1e-3, 5000)
    worst = max(worst, float(np.max(np.abs(2.0 * rec.qdot[:, 1] - 0.6))))
    return Check("cyclic-coordinate momentum conserved", "mechanics", worst, 1e-10, worst < 1e-10,
                 f"max |p_j - p_j(0)| {worst:.2e} < 1e-10", ("integrate",))


def check_oracle_match(s):
    _, rec = _damped_run(s.classical_dt)
    q_exact, _ = mech.analytic_damped_oscillator(1.0, 1.0, 0.1, 1.0, 0.0, rec.t)
    err = float(np.max(np.abs(rec.q[:, 0] - q_exact)))
    errs = []
    for dt in (0.1, 0.05):
        _, r = _damped_run(dt)
        qe, _ = mech.analytic_damped_oscillator(1.0, 1.0, 0.1, 1.0, 0.0, r.t)
        errs.append(float(np.max(np.abs(r.q[:, 0] - qe))))
    ratio = errs[0] / errs[1]
    ok = err < 1e-6 and ratio >= 8.0
    return Check("RK4 vs closed-form underdamped solution", "mechanics", err, 1e-6, ok,
                 f"max error {err:.2e} < 1e-6 at dt={s.classical_dt}; halving ratio {ratio:.1f} >= 8",
                 ("integrate", "analytic_damped_oscillator"))


def check_radiant_sign(s):
    dt = 1e-3
    steps = int(round(10 * mech.damped_period(1.0, 1.0, -0.1) / dt))
    state = mech.GeneralizedState(0.0, [1.0], [0.0])
    deliver = mech.MechanicalSystem.harmonic(1.0, 1.0, mech.ForceLaw("radiant", 0.1, absorbing=False))
    rec = mech.integrate(deliver, state, dt, steps)
    q_exact, _ = mech.analytic_damped_oscillator(1.0, 1.0, -0.1, 1.0, 0.0, rec.t)
    err = float(np.max(np.abs(rec.q[:, 0] - q_exact)) / np.max(np.abs(q_exact)))
    return Check("radiant delivering force equals drag with k -> -k", "mechanics", err, 1e-6,
                 err < 1e-6, f"max relative deviation {err:.2e} < 1e-6", ("integrate", "ForceLaw"))


def check_el_residual(s):
    rng = np.random.default_rng(s.seed)
    system = mech.MechanicalSystem.harmonic(1.0, 1.0, mech.ForceLaw("linear-drag", 0.1))
    res = []
    for dt in (0.02, 0.01, 0.005):
        steps = int(round(20.0 / dt))
        rec = mech.integrate(system, mech.GeneralizedState(0.0, [1.0], [0.0]), dt, steps)
        res.append(float(np.max(np.abs(mech.el_residuals(system, rec)))))
    ratios = [res[0] / res[1], res[1] / res[2]]
    # perturbed path on the finest grid
    q = rec.q + np.concatenate([[0.0], 1e-3 * rng.standard_normal(len(rec) - 2), [0.0]])[:, None]
    perturbed = mech.make_record(system, rec.t, q, rec.qdot)
    bad = float(np.max(np.abs(mech.el_residuals(system, perturbed))))
    ok = all(_ratio_ok(r) for r in ratios) and bad > 10 * res[-1]
    return Check("discrete Euler-Lagrange residual: order 2, rejects perturbed paths", "mechanics",
                 min(ratios), 3.6, ok,
                 f"halving ratios {ratios[0]:.3f}, {ratios[1]:.3f} in [3.6, 4.4]; perturbed/solution "
                 f"{bad / res[-1]:.1e} > 10", ("el_residual", "integrate"))


def check_power_balance(s):
    errs = []
    for dt in (0.02, 0.01):
        system, rec = _damped_run(dt, periods=3)
        errs.append(float(np.max(np.abs(mech.power_balance(rec, system)))))
    ratio = errs[0] / errs[1]
    return Check("dH/dt = F2 . qdot at order 2", "mechanics", ratio, 3.6, _ratio_ok(ratio),
                 f"errors {errs[0]:.2e} -> {errs[1]:.2e}, ratio {ratio:.3f} in [3.6, 4.4]",
                 ("integrate",))


# --------------------------------------------------------------------------
# quantum


def _grid(s):
    return qm.SpatialGrid.from_bounds(-20.0, 20.0, s.quantum_n)


def _packet(s):
    return qm.gaussian_packet(_grid(s), -3.0, 1.0, 1.0)


def check_unitarity(s):
    cfg = qm.QuantumConfig(k=0.0, dt=s.quantum_dt, steps=1000, propagator="cayley")
    _, series = qm.propagate(_packet(s), cfg)
    drift = float(np.max(np.abs(np.asarray(series.norm) - 1.0)))
    return Check("k=0 Cayley norm drift over 1e3 steps", "quantum", drift, 1e-10, drift < 1e-10,
                 f"max |norm - 1| {drift:.2e} < 1e-10", ("step_cayley", "build_hamiltonian"))


def check_factored_decay(s, k=0.5):
    cfg = qm.QuantumConfig(k=k, dt=s.quantum_dt, steps=1000, propagator="factored")
    _, series = qm.propagate(_packet(s), cfg)
    norm = np.asarray(series.norm)
    oracle = np.array([qm.decay_oracle(t, k, 1.0, 3) for t in series.t])
    err = float(np.max(np.abs(norm / norm[0] - oracle) / oracle))
    return Check("factored norm(t) = exp(-3kt/m) norm(0)", "quantum", err, 1e-12, err < 1e-12,
                 f"max relative error {err:.2e} < 1e-12", ("step_factored", "decay_oracle"))


def cayley_decay_error(s, dt, k=0.5, t_end=1.0):
    steps = int(round(t_end / dt))
    cfg = qm.QuantumConfig(k=k, dt=dt, steps=steps, propagator="cayley")
    _, series = qm.propagate(_packet(s), cfg)
    return abs(series.norm[-1] / series.norm[0] - qm.decay_oracle(steps * dt, k, 1.0, 3))


def check_cayley_decay(s):
    e1 = cayley_decay_error(s, s.quantum_dt)
    e2 = cayley_decay_error(s, s.quantum_dt / 2)
    ratio = e1 / e2
    return Check("Cayley decay law converges at order 2", "quantum", ratio, 3.6, _ratio_ok(ratio),
                 f"error {e1:.3e} at dt={s.quantum_dt}, {e2:.3e} at dt/2, ratio {ratio:.3f} in [3.6, 4.4]",
                 ("step_cayley", "decay_oracle"))


def _normalized_final(s, dt, propagator, k=0.5, t_end=1.0):
    cfg = qm.QuantumConfig(k=k, dt=dt, steps=int(round(t_end / dt)), propagator=propagator)
    psi, _ = qm.propagate(_packet(s), cfg)
    return psi.amps / psi.norm


def check_propagator_equivalence(s):
    diffs = []
    for dt in (s.quantum_dt, s.quantum_dt / 2, s.quantum_dt / 4):
        a = _normalized_final(s, dt, "cayley")
        b = _normalized_final(s, dt, "factored")
        diffs.append(float(np.sqrt(np.sum(np.abs(a - b) ** 2) * _grid(s).dx)))
    ratios = [diffs[0] / diffs[1], diffs[1] / diffs[2]]
    return Check("cayley and factored agree at order 2", "quantum", min(ratios), 3.6,
                 all(_ratio_ok(r) for r in ratios),
                 f"differences {diffs[0]:.2e}, {diffs[1]:.2e}, {diffs[2]:.2e}; ratios "
                 f"{ratios[0]:.3f}, {ratios[1]:.3f}", ("step_cayley", "step_factored"))


def check_k_invariance(s, k=0.5):
    runs = {}
    for kk in (0.0, k):
        cfg = qm.QuantumConfig(k=kk, dt=s.quantum_dt, steps=500, propagator="factored")
        _, series = qm.propagate(_packet(s), cfg)
        runs[kk] = series.arrays()
    err = max(float(np.max(np.abs(runs[0.0][c] - runs[k][c]))) for c in ("x", "p", "energy"))
    return Check("normalised observables independent of k", "quantum", err, 1e-12, err < 1e-12,
                 f"max |difference| {err:.2e} < 1e-12", ("step_factored", "observables"))


def ehrenfest_error(s, dt, t_end=1.0):
    cfg = qm.QuantumConfig(k=0.0, dt=dt, steps=int(round(t_end / dt)))
    _, series = qm.propagate(_packet(s), cfg)
    x, p = np.asarray(series.x), np.asarray(series.p)
    return float(np.max(np.abs((x[2:] - x[:-2]) / (2 * dt) - p[1:-1])))


def check_ehrenfest(s):
    e1 = ehrenfest_error(s, 2 * s.quantum_dt)
    e2 = ehrenfest_error(s, s.quantum_dt)
    ratio = e1 / e2
    return Check("Ehrenfest d<x>/dt - <p>/m at order 2", "quantum", ratio, 3.6, _ratio_ok(ratio),
                 f"errors {e1:.2e} -> {e2:.2e}, ratio {ratio:.3f} in [3.6, 4.4]",
                 ("step_cayley", "observables"))


def check_anti_hermitian_part(s, k=0.5):
    cfg = qm.QuantumConfig(k=k)
    H = qm.build_hamiltonian(cfg, _grid(s))
    Hd = H.conj_transpose()
    expected = -2j * 3 * k
    err = max(float(np.max(np.abs(H.diag - Hd.diag - expected))),
              float(np.max(np.abs(H.lower - Hd.lower))), float(np.max(np.abs(H.upper - Hd.upper))))
    return Check("H - H^dagger = -2i hbar D k / m on the diagonal only", "quantum", err, 1e-14,
                 err < 1e-14, f"max deviation {err:.1e}", ("build_hamiltonian",))


# --------------------------------------------------------------------------
# thermoq


def check_entropy_values(s):
    errs = [abs(tq.entropy_fermi(0.5) - math.log(2)), abs(tq.entropy_fermi(0.0)),
            abs(tq.entropy_fermi(1.0)), abs(tq.entropy_bose(1.0) - 2 * math.log(2))]
    err = max(errs)
    return Check("entropy values S_F(1/2), S_F(0), S_F(1), S_B(1)", "thermoq", err, 1e-12,
                 err < 1e-12, f"max error {err:.1e} < 1e-12", ("entropy_fermi", "entropy_bose"))


def check_entropy_shapes(s):
    n = np.linspace(0.0, 1.0, 1001)
    S = tq.entropy_fermi(n)
    concave = bool(np.all(S[:-2] + S[2:] - 2 * S[1:-1] <= 1e-15))
    symmetric = float(np.max(np.abs(S - S[::-1])))
    peak = abs(float(S.max()) - math.log(2)) < 1e-12 and int(np.argmax(S)) == 500
    nb = np.geomspace(1e-6, 1e3, 1000)
    monotone = bool(np.all(np.diff(tq.entropy_bose(nb)) > 0))
    ok = concave and symmetric < 1e-12 and peak and monotone
    return Check("Fermi entropy concave/symmetric/max ln 2; Bose entropy increasing", "thermoq",
                 symmetric, 1e-12, ok,
                 f"concave={concave} asymmetry={symmetric:.1e} peak={peak} bose_monotone={monotone}",
                 ("entropy_fermi", "entropy_bose"))


def check_determinate_levels(s):
    ok = True
    for ni in (0.0, 1.0):
        level = tq.ThermoLevel(1, -1.0e-18, 3.0, ni)
        ok &= tq.corrected_level(level, 500.0) == level.base_energy
    ok &= tq.corrected_level(tq.ThermoLevel.hydrogen(1), 1e4) == tq.ThermoLevel.hydrogen(1).base_energy
    return Check("determinate states carry no thermal correction", "thermoq", 0.0 if ok else 1.0, 0.0,
                 ok, "corrected_level == base energy exactly for n_i in {0, 1}", ("corrected_level",))


def check_corrected_levels(s, T0=100.0):
    worst = 0.0
    for level in tq.hydrogen_levels(6):
        expected = level.base_energy + tq.energy_correction(level, "fermi", T0)
        got = tq.corrected_level(level, T0)
        worst = max(worst, abs(got - expected) / abs(level.base_energy))
    return Check("corrected_level = E_n + f_n S_F(n_i) k_B T0 (hydrogen n <= 6)", "thermoq", worst,
                 1e-14, worst < 1e-14, f"max relative deviation {worst:.1e}",
                 ("corrected_level", "energy_correction"))


def check_t0_roundtrip(s, T0=250.0):
    worst = 0.0
    levels = tq.hydrogen_levels(6)
    for m in range(2, 7):
        for n in range(1, m):
            up, lo = levels[m - 1], levels[n - 1]
            nu_exp = tq.transition_frequency(up, lo, T0)
            got = tq.extract_T0(nu_exp, tq.uncorrected_frequency(up, lo), m, n)
            worst = max(worst, abs(got - T0) / T0)
    return Check("extract_T0(transition_frequency(T0)) = T0 for 2 <= m <= 6", "thermoq", worst, 1e-10,
                 worst < 1e-10, f"max relative error {worst:.1e} < 1e-10",
                 ("transition_frequency", "corrected_level", "extract_T0"))


def check_denominator(s):
    exact = 4 * math.log(4) - 3 * math.log(3)
    err = abs(tq.t0_denominator(2, 1) - exact)
    tol = 4 * np.spacing(exact)
    return Check("(2,1) denominator equals 4 ln 4 - 3 ln 3", "thermoq", err, tol, err <= tol,
                 f"|difference| {err:.1e} <= 4 ulp", ("extract_T0",))


def check_temperature_eigen(s):
    wave = tq.TemperatureWave(100.0)
    grid = tq.TGrid(50.0, 500.0, 257)
    r1 = tq.temp_eigen_residual(wave, grid)
    r2 = tq.temp_eigen_residual(wave, grid.refined())
    ratio = r1 / r2
    bad = min(tq.temp_eigen_residual(wave, grid.refined(), phi=f)
              for f in (lambda T: T, lambda T: np.exp(-T / 100.0), lambda T: 1.0 + 0 * T))
    ok = _ratio_ok(ratio) and bad >= 1e3 * r2
    return Check("T^2 phi' = T0 phi residual: order 2, rejects non-solutions", "thermoq", ratio, 3.6, ok,
                 f"ratio {ratio:.3f} in [3.6, 4.4]; non-solution/solution {bad / r2:.1e} >= 1e3",
                 ("temp_eigen_residual", "temp_wavefunction"))


def check_temperature_ode(s):
    wave = tq.TemperatureWave(100.0, 2.0)
    grid = tq.TGrid(50.0, 500.0, 2001)
    numeric = tq.integrate_temperature_ode(wave.T0, grid, 1.0)
    ratio = numeric / tq.temp_wavefunction(wave, grid.T)
    spread = float(np.max(np.abs(ratio / ratio[0] - 1.0)))
    return Check("RK4 re-integration reproduces phi up to scale", "thermoq", spread, 1e-6, spread < 1e-6,
                 f"ratio variation {spread:.1e} < 1e-6", ("temp_wavefunction",))


def check_adjoint_defect(s):
    f = tq.bump(6.0, 3.0)
    defects = [abs(tq.adjoint_defect(f, f, tq.TGrid(1.0, 11.0, n))) for n in (1024, 2047, 4093)]
    ratio = defects[0] / defects[1]
    grid = tq.TGrid(1.0, 11.0, 4096)
    sym = tq.symmetric_part(f, grid)
    ff = float(tq._inner(f(grid.T), f(grid.T), grid.T).real)
    sym_err = abs(sym + ff)
    g = tq.bump(5.0, 2.5)
    cross = abs(tq.adjoint_defect(f, g, grid))
    fc = lambda T: tq.bump(6.0, 3.0)(T) * np.exp(2j * T)  # noqa: E731
    gap = abs(tq.hermiticity_gap(fc, grid))
    ok = (_ratio_ok(ratio) and max(abs(tq.adjoint_defect(f, f, grid)), cross) < 1e-6
          and sym_err < 1e-6 and gap > 1e-2)
    return Check("T d/dT is not self-adjoint: A^dagger = -A - 1", "thermoq", sym_err, 1e-6, ok,
                 f"defect ratio {ratio:.3f}; <f,Af>+<Af,f>+<f,f> = {sym_err:.1e}; "
                 f"|<f,Af>-<Af,f>| = {gap:.2f} for complex f", ("adjoint_defect",))


def check_commutator(s):
    rng = np.random.default_rng(s.seed + 1)
    worst = 0.0
    for degree in range(9):
        coeffs = rng.integers(-9, 10, size=degree + 1).astype(float)
        pts = rng.integers(-10, 11, size=100).astype(float)
        worst = max(worst, float(np.max(np.abs(tq.commutator_check(Polynomial(coeffs), pts)))))
    return Check("[T, d/dT] = -1 on polynomials up to degree 8", "thermoq", worst, 0.0, worst == 0.0,
                 f"max |result| {worst:.1e} (exact)", ("commutator_check",))


def check_plane_wave(s):
    x = np.linspace(-5, 5, 21)
    good = tq.plane_wave_residual(1.3, 1.3**2 / 2, 50.0, x, 0.7, 300.0)
    delta = 1e-3
    off = tq.plane_wave_residual(1.3, 1.3**2 / 2 + delta, 50.0, x, 0.7, 300.0)
    expected = delta * math.exp(-50.0 / 300.0)
    ok = good < 1e-12 and abs(off - expected) < 1e-12
    return Check("free plane wave solves the equation iff E = p^2/2m", "thermoq", good, 1e-12, ok,
                 f"residual {good:.1e}; detuned residual {off:.3e} vs {expected:.3e}",
                 ("plane_wave_residual",))


CHECKS = (
    ("mechanics", check_conservative_energy),
    ("mechanics", check_generalized_energy),
    ("mechanics", check_work_bookkeeping),
    ("mechanics", check_heat_energy),
    ("mechanics", check_cyclic_momentum),
    ("mechanics", check_oracle_match),
    ("mechanics", check_radiant_sign),
    ("mechanics", check_el_residual),
    ("mechanics", check_power_balance),
    ("quantum", check_unitarity),
    ("quantum", check_factored_decay),
    ("quantum", check_cayley_decay),
    ("quantum", check_propagator_equivalence),
    ("quantum", check_k_invariance),
    ("quantum", check_ehrenfest),
    ("quantum", check_anti_hermitian_part),
    ("thermoq", check_entropy_values),
    ("thermoq", check_entropy_shapes),
    ("thermoq", check_determinate_levels),
    ("thermoq", check_corrected_levels),
    ("thermoq", check_t0_roundtrip),
    ("thermoq", check_denominator),
    ("thermoq", check_temperature_eigen),
    ("thermoq", check_temperature_ode),
    ("thermoq", check_adjoint_defect),
    ("thermoq", check_commutator),
    ("thermoq", check_plane_wave),
)


def validate_suite(settings=None, modules=None, progress=None):
    """Run every check (optionally only those of ``modules``) in a fixed order.

    A check that raises is reported as a failure, not propagated.
    """
    settings = settings or ValidationSettings()
    report = Report()
    for module, fn in CHECKS:
        if modules is not None and module not in modules:
            continue
        start = time.perf_counter()
        try:
            check = fn(settings)
        except Exception as exc:  # a crashing check is a failed check
            check = Check(fn.__name__, module, float("nan"), float("nan"), False,
                          f"raised {type(exc).__name__}: {exc}")
        check.seconds = time.perf_counter() - start
        report.checks.append(check)
        if progress is not None:
            progress(check)
    return report
