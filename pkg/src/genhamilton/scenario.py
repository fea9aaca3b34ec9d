"""Scenario configuration, dispatch and result serialisation.

A scenario is a JSON document::

    {
      "kind": "classical",
      "output": "runs/damped",
      "seed": 0,
      "parameters": {"k": 0.1, "dt": 0.001}
    }

``parameters`` is a flat map whose allowed keys depend on ``kind`` (see
:data:`SCHEMA` or ``genhamilton schema``).  Unknown keys are errors.  Every
run produces one or more :class:`ResultTable` objects which
:func:`write_results` turns into CSV, a JSON metadata sidecar and plot-data
files.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import mechanics as mech
from . import quantum as qm
from . import thermoq as tq
from .errors import ConfigError, PropagationError

KINDS = ("classical", "classical-heat", "quantum", "thermo-spectrum", "t0-roundtrip", "validate")


@dataclass(frozen=True)
class Param:
    type: type
    default: object = None
    doc: str = ""
    choices: tuple = ()
    minimum: float = None
    exclusive: bool = False
    required: bool = False

    def describe(self):
        out = {"type": self.type.__name__, "doc": self.doc}
        if self.default is not None:
            out["default"] = self.default
        if self.choices:
            out["choices"] = list(self.choices)
        if self.minimum is not None:
            out["minimum"] = self.minimum
            out["exclusive_minimum"] = self.exclusive
        if self.required:
            out["required"] = True
        return out


def _pos(default, doc, **kw):
    return Param(float, default, doc, minimum=0.0, exclusive=True, **kw)


def _nonneg(default, doc, **kw):
    return Param(float, default, doc, minimum=0.0, **kw)


SCHEMA = {
    "classical": {
        "mass": _pos(1.0, "particle mass (kg)"),
        "spring": _nonneg(1.0, "spring constant of U = spring q^2 / 2 (N/m)"),
        "force": Param(str, "linear-drag", "nonconservative force kind", choices=mech.FORCE_KINDS),
        "k": _nonneg(0.1, "drag coefficient (kg/s)"),
        "heat_flow": Param(str, "absorb", "radiant force sign: absorb gives -k v, deliver gives +k v",
                           choices=("absorb", "deliver")),
        "q0": Param(float, 1.0, "initial coordinate (m)"),
        "v0": Param(float, 0.0, "initial velocity (m/s)"),
        "dt": _pos(None, "time step (s); default period / 1000"),
        "periods": _pos(10.0, "run length in damped periods"),
        "duration": _pos(None, "run length (s); overrides periods"),
        "record_every": Param(int, 1, "keep every n-th sample", minimum=1),
    },
    "classical-heat": {
        "mass": _pos(1.0, "particle mass (kg)"),
        "spring": _nonneg(0.0, "spring constant (N/m)"),
        "entropy": Param(float, 1.0, "constant entropy S (J/K)"),
        "T_base": _pos(300.0, "temperature at q = 0 (K)"),
        "T_slope": Param(float, 1.0, "temperature gradient dT/dq (K/m)"),
        "q0": Param(float, 0.0, "initial coordinate (m)"),
        "v0": Param(float, 0.5, "initial velocity (m/s)"),
        "dt": _pos(1e-3, "time step (s)"),
        "steps": Param(int, 10_000, "number of RK4 steps", minimum=1),
        "record_every": Param(int, 1, "keep every n-th sample", minimum=1),
    },
    "quantum": {
        "x_min": Param(float, -20.0, "left grid edge"),
        "x_max": Param(float, 20.0, "right grid edge"),
        "n": Param(int, 1024, "grid points", minimum=16),
        "mass": _pos(1.0, "particle mass"),
        "hbar": _pos(1.0, "reduced Planck constant"),
        "k": _nonneg(0.0, "dissipation coefficient"),
        "dim_factor": Param(int, 3, "integer factor D in the decay rate D k / m", minimum=1),
        "dt": _pos(0.01, "time step"),
        "steps": Param(int, 1000, "number of steps", minimum=0),
        "x0": Param(float, -3.0, "initial packet centre"),
        "p0": Param(float, 1.0, "initial packet momentum"),
        "sigma": _pos(1.0, "initial position spread"),
        "potential": Param(str, "free", "potential V(x)", choices=("free", "harmonic")),
        "omega": _pos(1.0, "harmonic frequency (potential = harmonic)"),
        "propagator": Param(str, "cayley", "time stepper", choices=qm.PROPAGATORS),
        "record_every": Param(int, 1, "record observables every n steps", minimum=1),
        "edge_tolerance": _pos(None, "fail if a boundary amplitude exceeds this"),
    },
    "thermo-spectrum": {
        "T0": _nonneg(250.0, "temperature constant (K)"),
        "n_max": Param(int, 6, "highest principal quantum number", minimum=2),
        "rydberg": _pos(tq.RYDBERG_ENERGY, "Rydberg energy (J)"),
        "statistics": Param(str, "fermi", "statistics of the level entropy column",
                            choices=tq.STATISTICS),
    },
    "t0-roundtrip": {
        "T0": _nonneg(250.0, "assumed temperature constant (K)"),
        "m_max": Param(int, 6, "highest upper level", minimum=2),
        "rydberg": _pos(tq.RYDBERG_ENERGY, "Rydberg energy (J)"),
        "m": Param(int, None, "upper level for a direct extraction", minimum=2),
        "n": Param(int, None, "lower level for a direct extraction", minimum=1),
        "nu_exp": _pos(None, "measured frequency (Hz) for a direct extraction"),
        "nu_th": _pos(None, "uncorrected frequency (Hz); default Bohr value"),
    },
    "validate": {
        "classical_dt": _pos(1e-3, "time step of the classical checks"),
        "quantum_dt": _pos(0.01, "base time step of the quantum checks"),
        "quantum_n": Param(int, 1024, "grid points of the quantum checks", minimum=16),
        "modules": Param(str, "mechanics,quantum,thermoq", "comma-separated modules to check"),
    },
}

TOP_LEVEL = {"kind", "parameters", "output", "seed"}


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    parameters: dict
    output: str = "results"
    seed: int = 0

    def get(self, key):
        """Parameter value with the schema default filled in."""
        if key in self.parameters:
            return self.parameters[key]
        return SCHEMA[self.kind][key].default

    def resolved(self):
        """All schema keys with defaults filled in (None for unset optionals)."""
        return {key: self.get(key) for key in SCHEMA[self.kind]}

    def echo(self):
        return {"kind": self.kind, "output": self.output, "seed": self.seed,
                "parameters": self.resolved()}


def _check_value(kind, key, value, errors):
    spec = SCHEMA[kind][key]
    if spec.type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"parameters.{key} must be a number, got {value!r}")
            return None
        value = float(value)
        if not math.isfinite(value):
            errors.append(f"parameters.{key} must be finite")
            return None
    elif spec.type is int:
        if isinstance(value, bool) or not (isinstance(value, int) or
                                           (isinstance(value, float) and value.is_integer())):
            errors.append(f"parameters.{key} must be an integer, got {value!r}")
            return None
        value = int(value)
    elif spec.type is str:
        if not isinstance(value, str):
            errors.append(f"parameters.{key} must be a string, got {value!r}")
            return None
    if spec.choices and value not in spec.choices:
        errors.append(f"parameters.{key} must be one of {list(spec.choices)}, got {value!r}")
    if spec.minimum is not None:
        if spec.exclusive and not value > spec.minimum:
            errors.append(f"{key} must be positive" if spec.minimum == 0
                          else f"{key} must be > {spec.minimum}")
        elif not spec.exclusive and not value >= spec.minimum:
            errors.append(f"{key} must be non-negative" if spec.minimum == 0
                          else f"{key} must be >= {spec.minimum}")
    return value


def _cross_checks(kind, p, errors):
    if kind == "classical":
        mass, spring = p.get("mass", 1.0), p.get("spring", 1.0)
        if spring == 0 and p.get("dt") is None:
            errors.append("dt is required when spring is 0 (no period to derive it from)")
        if spring == 0 and p.get("duration") is None:
            errors.append("duration is required when spring is 0")
        k = p.get("k", 0.1) if p.get("force", "linear-drag") != "none" else 0.0
        if spring > 0 and k * k >= 4 * mass * spring and (p.get("dt") is None or p.get("duration") is None):
            errors.append("dt and duration are required outside the underdamped regime")
    elif kind == "quantum":
        if not p.get("x_max", 20.0) > p.get("x_min", -20.0):
            errors.append("x_max must exceed x_min")
    elif kind == "t0-roundtrip":
        direct = [key for key in ("m", "n", "nu_exp") if key in p]
        if direct and len(direct) != 3:
            errors.append("direct extraction needs all of m, n and nu_exp")
        if "m" in p and "n" in p and not p["m"] > p["n"]:
            errors.append("m must be greater than n")
    elif kind == "validate":
        for name in p.get("modules", "").split(","):
            if name and name not in ("mechanics", "quantum", "thermoq"):
                errors.append(f"unknown module {name!r} in modules")


def config_from_dict(data, source=None):
    """Validate a decoded JSON document; raise ConfigError listing every problem."""
    errors = []
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object", source)
    for key in sorted(set(data) - TOP_LEVEL):
        errors.append(f"unknown top-level key {key!r}")
    kind = data.get("kind")
    if kind is None:
        errors.append("kind is required")
    elif kind not in KINDS:
        errors.append(f"kind: unknown scenario kind {kind!r}; expected one of {list(KINDS)}")
    output = data.get("output", "results")
    if not isinstance(output, str) or not output:
        errors.append("output must be a non-empty string")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        errors.append(f"seed must be a non-negative integer, got {seed!r}")
    raw = data.get("parameters", {})
    if not isinstance(raw, dict):
        errors.append("parameters must be an object")
        raw = {}
    params = {}
    if kind in SCHEMA:
        for key in sorted(raw):
            if key not in SCHEMA[kind]:
                errors.append(f"parameters.{key}: unknown key for kind {kind!r}")
                continue
            value = _check_value(kind, key, raw[key], errors)
            if value is not None:
                params[key] = value
        for key, spec in SCHEMA[kind].items():
            if spec.required and key not in raw:
                errors.append(f"parameters.{key} is required")
        _cross_checks(kind, params, errors)
    if errors:
        raise ConfigError(errors, source)
    return ScenarioConfig(kind, params, output, seed)


def read_document(path):
    """Decode a JSON scenario file without validating it."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config file: {exc}", str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}", str(path)) from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object", str(path))
    return data


def load_config(path):
    """Read and validate a JSON scenario file."""
    return config_from_dict(read_document(path), source=str(path))


def parse_override(kind, text):
    """Turn ``key=value`` into a (key, typed value) pair for ``kind``."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if key in ("output", "seed"):
        if key == "seed":
            try:
                return key, int(raw)
            except ValueError:
                raise ConfigError(f"seed must be an integer, got {raw!r}") from None
        return key, raw
    if kind not in SCHEMA or key not in SCHEMA[kind]:
        raise ConfigError(f"override {key!r} is not a known parameter of kind {kind!r}")
    spec = SCHEMA[kind][key]
    if spec.type is str:
        return key, raw
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"override {key}={raw!r} is not a number") from None
    if spec.type is int and value.is_integer():
        value = int(value)
    return key, value


def apply_overrides(config_dict, overrides):
    data = dict(config_dict)
    data["parameters"] = dict(data.get("parameters", {}))
    kind = data.get("kind")
    for text in overrides:
        key, value = parse_override(kind, text)
        if key in ("output", "seed"):
            data[key] = value
        else:
            data["parameters"][key] = value
    return data


def schema_document():
    """The full parameter schema as a JSON-serialisable dict."""
    return {
        "top_level": {
            "kind": {"type": "str", "choices": list(KINDS), "required": True},
            "output": {"type": "str", "default": "results", "doc": "output directory"},
            "seed": {"type": "int", "default": 0, "doc": "seed for randomised checks"},
            "parameters": {"type": "object", "doc": "kind-specific keys below"},
        },
        "kinds": {kind: {key: p.describe() for key, p in params.items()}
                  for kind, params in SCHEMA.items()},
    }


# --------------------------------------------------------------------------
# results


@dataclass
class ResultTable:
    name: str
    columns: dict
    metadata: dict = field(default_factory=dict)
    figures: list = field(default_factory=list)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"table {self.name!r} has columns of unequal length {sorted(lengths)}")

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0


def _fmt(value):
    if isinstance(value, (str, np.str_)):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _safe_name(name):
    if not name or os.sep in name or "/" in name or name in (".", "..") or name.startswith("."):
        raise ValueError(f"unsafe table name {name!r}")
    return name


def write_results(table, directory):
    """Write ``<name>.csv``, ``<name>.meta.json`` and one ``<name>.<y>_vs_<x>.dat``
    per declared figure into ``directory``.  Returns the written paths.
    """
    directory = Path(directory)
    name = _safe_name(table.name)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        csv_path = directory / f"{name}.csv"
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(list(table.columns))
            for row in zip(*table.columns.values()):
                writer.writerow([_fmt(v) for v in row])
        written.append(csv_path)

        meta_path = directory / f"{name}.meta.json"
        meta = dict(table.metadata)
        meta.setdefault("version", __version__)
        meta["table"] = name
        meta["columns"] = list(table.columns)
        meta["rows"] = len(table)
        meta["figures"] = [list(f) for f in table.figures]
        with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
        written.append(meta_path)

        for x_col, y_col in table.figures:
            plot_path = directory / f"{name}.{_safe_name(y_col)}_vs_{_safe_name(x_col)}.dat"
            with open(plot_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(f"# {x_col} {y_col}\n")
                for xv, yv in zip(table.columns[x_col], table.columns[y_col]):
                    fh.write(f"{_fmt(xv)} {_fmt(yv)}\n")
            written.append(plot_path)
    except OSError as exc:
        raise OSError(f"writing results to {directory}: {exc}") from exc
    return written


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def read_table(path):
    """Read a CSV written by :func:`write_results` back into float columns
    (non-numeric columns stay strings).
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    columns = {}
    for j, name in enumerate(header):
        values = [r[j] for r in body]
        try:
            columns[name] = np.array([float(v) for v in values], dtype=float)
        except ValueError:
            columns[name] = values
    return columns


# --------------------------------------------------------------------------
# dispatch


def _metadata(config, solver):
    return {"scenario": config.echo(), "solver": solver, "version": __version__}


def _classical(config):
    g = config.get
    force_kind = g("force")
    force = mech.ForceLaw(force_kind, g("k") if force_kind != "none" else 0.0,
                          absorbing=g("heat_flow") == "absorb")
    system = mech.MechanicalSystem.harmonic(g("mass"), g("spring"), force)
    c = force.coefficient  # F2 = c v, i.e. drag coefficient -c
    underdamped = g("spring") > 0 and c * c < 4 * g("mass") * g("spring")
    period = mech.damped_period(g("mass"), g("spring"), -c) if underdamped else None
    dt = g("dt") if g("dt") is not None else period / 1000
    duration = g("duration") if g("duration") is not None else g("periods") * period
    steps = int(round(duration / dt))
    rec = mech.integrate(system, mech.GeneralizedState(0.0, [g("q0")], [g("v0")]), dt, steps)
    keep = slice(None, None, g("record_every"))
    columns = {
        "t": rec.t[keep], "q": rec.q[keep, 0], "qdot": rec.qdot[keep, 0],
        "T_kin": rec.kinetic[keep], "U": rec.potential[keep],
        "H": rec.H[keep], "w2": rec.w2[keep], "Hbar": rec.Hbar[keep],
    }
    summary = {"dt": [dt], "steps": [steps], "Hbar_relative_drift": [mech.relative_drift(rec.Hbar)]}
    if underdamped:
        q_exact, v_exact = mech.analytic_damped_oscillator(g("mass"), g("spring"), -c, g("q0"), g("v0"), rec.t)
        columns["q_exact"] = q_exact[keep]
        summary["max_abs_error"] = [float(np.max(np.abs(rec.q[:, 0] - q_exact)))]
    solver = {"integrator": "rk4", "dt": dt, "steps": steps, "work_quadrature": "trapezoid"}
    meta = _metadata(config, solver)
    return {
        "trajectory": ResultTable("trajectory", columns, meta, [("t", "q"), ("t", "H"), ("t", "Hbar")]),
        "summary": ResultTable("summary", summary, meta),
    }


def _classical_heat(config):
    g = config.get
    base = mech.MechanicalSystem.harmonic(g("mass"), g("spring"))
    system = mech.HeatExchangeSystem(base, g("entropy"), mech.LinearTemperature(g("T_base"), [g("T_slope")]))
    rec = mech.integrate(system, mech.GeneralizedState(0.0, [g("q0")], [g("v0")]), g("dt"), g("steps"))
    keep = slice(None, None, g("record_every"))
    TS = -rec.w2
    columns = {
        "t": rec.t[keep], "q": rec.q[keep, 0], "qdot": rec.qdot[keep, 0],
        "T_kin": rec.kinetic[keep], "U": rec.potential[keep], "H": rec.H[keep],
        "TS": TS[keep], "Hbar": rec.Hbar[keep],
    }
    summary = {"dt": [g("dt")], "steps": [g("steps")],
               "Hbar_relative_drift": [mech.relative_drift(rec.Hbar)]}
    meta = _metadata(config, {"integrator": "rk4", "dt": g("dt"), "steps": g("steps")})
    return {
        "trajectory": ResultTable("trajectory", columns, meta, [("t", "q"), ("t", "Hbar")]),
        "summary": ResultTable("summary", summary, meta),
    }


def _quantum(config):
    g = config.get
    grid = qm.SpatialGrid.from_bounds(g("x_min"), g("x_max"), g("n"))
    potential = (qm.harmonic_potential(g("mass"), g("omega")) if g("potential") == "harmonic"
                 else qm._zero_potential)
    qcfg = qm.QuantumConfig(potential=potential, k=g("k"), dim_factor=g("dim_factor"), dt=g("dt"),
                            steps=g("steps"), propagator=g("propagator"))
    psi = qm.gaussian_packet(grid, g("x0"), g("p0"), g("sigma"), g("mass"), g("hbar"))
    _, series = qm.propagate(psi, qcfg, record_every=g("record_every"),
                             edge_tolerance=g("edge_tolerance"))
    arr = series.arrays()
    oracle = np.array([qm.decay_oracle(t, g("k"), g("mass"), g("dim_factor")) for t in arr["t"]])
    columns = {"t": arr["t"], "norm": arr["norm"], "x_mean": arr["x"], "p_mean": arr["p"],
               "H0_mean": arr["energy"], "decay_oracle": oracle}
    rel = np.abs(arr["norm"] / arr["norm"][0] - oracle) / oracle
    summary = {"final_norm": [arr["norm"][-1]], "decay_oracle": [oracle[-1]],
               "max_decay_relative_error": [float(np.max(rel))]}
    solver = {"scheme": "crank-nicolson", "propagator": g("propagator"), "dx": grid.dx,
              "dt": g("dt"), "steps": g("steps"), "boundary": "dirichlet"}
    meta = _metadata(config, solver)
    return {
        "observables": ResultTable("observables", columns, meta,
                                   [("t", "norm"), ("t", "x_mean"), ("t", "p_mean")]),
        "summary": ResultTable("summary", summary, meta),
    }


def _thermo_spectrum(config):
    g = config.get
    T0, stats = g("T0"), g("statistics")
    levels = tq.hydrogen_levels(g("n_max"), g("rydberg"))
    lv = {
        "n": [lvl.n for lvl in levels],
        "degeneracy": [lvl.degeneracy for lvl in levels],
        "occupation": [lvl.occupation for lvl in levels],
        "entropy_kB": [tq.level_entropy(lvl.occupation, stats) for lvl in levels],
        "E_base": [lvl.base_energy for lvl in levels],
        "E_correction": [tq.energy_correction(lvl, stats, T0) for lvl in levels],
        "E_corrected": [tq.corrected_level(lvl, T0) for lvl in levels],
    }
    tr = {"m": [], "n": [], "nu_th": [], "nu_T": [], "shift": []}
    for up in levels:
        for lo in levels:
            if up.n > lo.n:
                nu_th = tq.uncorrected_frequency(up, lo)
                nu_T = tq.transition_frequency(up, lo, T0)
                for key, v in zip(tr, (up.n, lo.n, nu_th, nu_T, nu_T - nu_th)):
                    tr[key].append(v)
    meta = _metadata(config, {"k_B": tq.K_B, "h": tq.H_PLANCK})
    return {
        "levels": ResultTable("levels", lv, meta, [("n", "E_corrected")]),
        "transitions": ResultTable("transitions", tr, meta),
    }


def _t0_roundtrip(config):
    g = config.get
    T0 = g("T0")
    levels = tq.hydrogen_levels(max(g("m_max"), g("m") or 0), g("rydberg"))
    rt = {"m": [], "n": [], "nu_th": [], "nu_exp": [], "T0_recovered": [], "relative_error": []}
    for m in range(2, g("m_max") + 1):
        for n in range(1, m):
            up, lo = levels[m - 1], levels[n - 1]
            nu_th = tq.uncorrected_frequency(up, lo)
            nu_exp = tq.transition_frequency(up, lo, T0)
            rec = tq.extract_T0(nu_exp, nu_th, m, n)
            err = abs(rec - T0) / T0 if T0 else abs(rec)
            for key, v in zip(rt, (m, n, nu_th, nu_exp, rec, err)):
                rt[key].append(v)
    meta = _metadata(config, {"k_B": tq.K_B, "h": tq.H_PLANCK})
    tables = {"roundtrip": ResultTable("roundtrip", rt, meta)}
    if g("nu_exp") is not None:
        m, n = g("m"), g("n")
        nu_th = g("nu_th")
        if nu_th is None:
            nu_th = tq.uncorrected_frequency(levels[m - 1], levels[n - 1])
        T0_fit = tq.extract_T0(g("nu_exp"), nu_th, m, n)
        tables["extraction"] = ResultTable(
            "extraction", {"m": [m], "n": [n], "nu_exp": [g("nu_exp")], "nu_th": [nu_th], "T0": [T0_fit]}, meta)
    return tables


def _validate(config, progress=None):
    from .validation import ValidationSettings, validate_suite

    g = config.get
    settings = ValidationSettings(classical_dt=g("classical_dt"), quantum_dt=g("quantum_dt"),
                                  quantum_n=g("quantum_n"), seed=config.seed)
    modules = [m for m in g("modules").split(",") if m]
    report = validate_suite(settings, modules=modules, progress=progress)
    cols = {
        "check": [c.name for c in report],
        "module": [c.module for c in report],
        "measured": [c.measured for c in report],
        "tolerance": [c.tolerance for c in report],
        "passed": [int(c.passed) for c in report],
    }
    meta = _metadata(config, {"settings": settings.__dict__})
    table = ResultTable("report", cols, meta)
    table.report = report
    return {"report": table}


RUNNERS = {
    "classical": _classical,
    "classical-heat": _classical_heat,
    "quantum": _quantum,
    "thermo-spectrum": _thermo_spectrum,
    "t0-roundtrip": _t0_roundtrip,
    "validate": _validate,
}


def run_scenario(config, progress=None):
    """Run a validated scenario and return its tables keyed by name.

    Runs are deterministic in (config, seed).  Propagation failures are
    re-raised with the scenario kind attached.  ``progress`` receives each
    validation check as it completes (validate scenarios only).
    """
    try:
        if config.kind == "validate":
            return _validate(config, progress)
        return RUNNERS[config.kind](config)
    except PropagationError as exc:
        raise PropagationError(f"scenario {config.kind!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"scenario {config.kind!r}: {exc}") from exc


def run_and_write(config, output=None):
    """Run ``config`` and write all tables below its output directory."""
    tables = run_scenario(config)
    directory = Path(output or config.output)
    paths = []
    for table in tables.values():
        paths.extend(write_results(table, directory))
    return tables, paths
