import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genhamilton import scenario as sc
from genhamilton.errors import ConfigError
from genhamilton.scenario import ResultTable, ScenarioConfig


def _write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestLoadConfig:
    def test_minimal_classical(self, tmp_path):
        cfg = sc.load_config(_write(tmp_path, {"kind": "classical"}))
        assert cfg == ScenarioConfig("classical", {}, "results", 0)
        assert cfg.get("k") == 0.1

    def test_unknown_kind_named(self, tmp_path):
        with pytest.raises(ConfigError) as exc:
            sc.load_config(_write(tmp_path, {"kind": "foo"}))
        assert any(e.startswith("kind") and "foo" in e for e in exc.value.errors)

    def test_negative_dt(self, tmp_path):
        with pytest.raises(ConfigError) as exc:
            sc.load_config(_write(tmp_path, {"kind": "classical", "parameters": {"dt": -1}}))
        assert "dt must be positive" in exc.value.errors

    def test_errors_aggregated(self, tmp_path):
        data = {"kind": "quantum", "bogus": 1,
                "parameters": {"dt": 0, "n": "many", "propagator": "euler", "typo": 3}}
        with pytest.raises(ConfigError) as exc:
            sc.load_config(_write(tmp_path, data))
        errs = exc.value.errors
        assert len(errs) == 5
        assert exc.value.source.endswith("cfg.json")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="missing.json"):
            sc.load_config(tmp_path / "missing.json")

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{kind: classical", encoding="utf-8")
        with pytest.raises(ConfigError, match="malformed"):
            sc.load_config(path)

    @pytest.mark.parametrize("data", [[], {"kind": "classical", "seed": -1},
                                      {"kind": "classical", "seed": True},
                                      {"kind": "classical", "parameters": []},
                                      {"parameters": {}}])
    def test_bad_top_level(self, data):
        with pytest.raises(ConfigError):
            sc.config_from_dict(data)

    def test_types(self):
        with pytest.raises(ConfigError, match="integer"):
            sc.config_from_dict({"kind": "quantum", "parameters": {"n": 10.5}})
        with pytest.raises(ConfigError, match="number"):
            sc.config_from_dict({"kind": "quantum", "parameters": {"dt": True}})
        assert sc.config_from_dict({"kind": "quantum", "parameters": {"n": 64.0}}).get("n") == 64

    def test_cross_checks(self):
        with pytest.raises(ConfigError, match="x_max"):
            sc.config_from_dict({"kind": "quantum", "parameters": {"x_min": 1, "x_max": 0}})
        with pytest.raises(ConfigError, match="all of m, n and nu_exp"):
            sc.config_from_dict({"kind": "t0-roundtrip", "parameters": {"m": 2}})
        with pytest.raises(ConfigError, match="duration"):
            sc.config_from_dict({"kind": "classical", "parameters": {"spring": 0, "dt": 0.01}})
        with pytest.raises(ConfigError, match="module"):
            sc.config_from_dict({"kind": "validate", "parameters": {"modules": "mechanics,optics"}})


class TestSchema:
    def test_every_key_documented(self):
        doc = sc.schema_document()
        assert set(doc["kinds"]) == set(sc.KINDS)
        for kind, params in doc["kinds"].items():
            for key, desc in params.items():
                assert desc["doc"], (kind, key)

    def test_resolved_covers_schema(self):
        for kind in sc.KINDS:
            cfg = ScenarioConfig(kind, {})
            assert set(cfg.resolved()) == set(sc.SCHEMA[kind])

    def test_defaults_validate(self):
        for kind, params in sc.SCHEMA.items():
            explicit = {k: p.default for k, p in params.items() if p.default is not None}
            cfg = sc.config_from_dict({"kind": kind, "parameters": explicit})
            assert cfg.parameters == explicit

    def test_overrides(self):
        data = sc.apply_overrides({"kind": "quantum"}, ["dt=0.02", "n=128", "propagator=factored", "seed=4"])
        cfg = sc.config_from_dict(data)
        assert cfg.get("dt") == 0.02 and cfg.get("n") == 128 and cfg.seed == 4
        assert cfg.get("propagator") == "factored"

    @pytest.mark.parametrize("text", ["dt", "typo=1", "dt=fast"])
    def test_bad_override(self, text):
        with pytest.raises(ConfigError):
            sc.parse_override("quantum", text)


class TestResults:
    def test_unequal_columns(self):
        with pytest.raises(ValueError):
            ResultTable("x", {"a": [1, 2], "b": [1]})

    def test_empty_table_header_only(self, tmp_path):
        sc.write_results(ResultTable("empty", {"t": [], "q": []}), tmp_path)
        assert (tmp_path / "empty.csv").read_bytes() == b"t,q\n"

    def test_files_and_format(self, tmp_path):
        table = ResultTable("tr", {"t": [0.0, 0.1], "q": [1.0, 1 / 3]}, {"solver": "x"}, [("t", "q")])
        paths = sc.write_results(table, tmp_path / "out")
        assert [p.name for p in paths] == ["tr.csv", "tr.meta.json", "tr.q_vs_t.dat"]
        raw = (tmp_path / "out" / "tr.csv").read_bytes()
        assert b"\r" not in raw
        assert raw.splitlines()[2] == b"0.10000000000000001,0.33333333333333331"
        meta = json.loads((tmp_path / "out" / "tr.meta.json").read_text())
        assert meta["columns"] == ["t", "q"] and meta["rows"] == 2 and "version" in meta
        dat = (tmp_path / "out" / "tr.q_vs_t.dat").read_text().splitlines()
        assert dat[0] == "# t q" and len(dat) == 3

    def test_unsafe_name(self, tmp_path):
        with pytest.raises(ValueError):
            sc.write_results(ResultTable("../escape", {"a": [1.0]}), tmp_path)

    def test_unwritable_directory(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError, match="file"):
            sc.write_results(ResultTable("t", {"a": [1.0]}), blocker / "sub")

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=True, width=64), min_size=1, max_size=50))
    def test_roundtrip_bit_equal(self, tmp_path_factory, values):
        d = tmp_path_factory.mktemp("rt")
        sc.write_results(ResultTable("v", {"v": values}), d)
        back = sc.read_table(d / "v.csv")["v"]
        assert np.array_equal(back, np.array(values))
        assert np.array_equal(np.signbit(back), np.signbit(values))


class TestRun:
    def test_classical_columns(self):
        tables = sc.run_scenario(sc.config_from_dict({"kind": "classical", "parameters": {"periods": 1}}))
        cols = tables["trajectory"].columns
        assert {"t", "q", "qdot", "H", "w2", "Hbar"} <= set(cols)
        assert tables["summary"].columns["max_abs_error"][0] < 1e-10

    def test_metadata_echoes_parameters(self):
        cfg = sc.config_from_dict({"kind": "classical", "parameters": {"periods": 1, "k": 0.2}})
        meta = sc.run_scenario(cfg)["trajectory"].metadata
        assert meta["scenario"]["parameters"]["k"] == 0.2
        assert set(meta["scenario"]["parameters"]) == set(sc.SCHEMA["classical"])

    def test_heat_conservation(self):
        cfg = sc.config_from_dict({"kind": "classical-heat", "parameters": {"steps": 2000}})
        assert sc.run_scenario(cfg)["summary"].columns["Hbar_relative_drift"][0] < 1e-8

    def test_quantum_unitarity(self):
        cfg = sc.config_from_dict({"kind": "quantum", "parameters": {"steps": 200, "n": 512}})
        norm = sc.run_scenario(cfg)["observables"].columns["norm"]
        assert np.max(np.abs(norm - 1)) < 1e-10

    def test_quantum_edge_failure_has_context(self):
        cfg = sc.config_from_dict({"kind": "quantum", "parameters": {
            "x0": 15.0, "p0": 5.0, "steps": 500, "edge_tolerance": 1e-10}})
        with pytest.raises(sc.PropagationError, match="quantum"):
            sc.run_scenario(cfg)

    def test_bad_physics_becomes_config_error(self):
        cfg = sc.config_from_dict({"kind": "quantum", "parameters": {"sigma": 0.01}})
        with pytest.raises(ConfigError, match="quantum"):
            sc.run_scenario(cfg)

    def test_t0_roundtrip(self):
        cfg = sc.config_from_dict({"kind": "t0-roundtrip", "parameters": {"T0": 250}})
        table = sc.run_scenario(cfg)["roundtrip"].columns
        assert len(table["m"]) == 15
        assert max(table["relative_error"]) < 1e-10

    def test_direct_extraction_zero(self):
        from genhamilton import thermoq as tq
        nu = tq.uncorrected_frequency(tq.ThermoLevel.hydrogen(2), tq.ThermoLevel.hydrogen(1))
        cfg = sc.config_from_dict({"kind": "t0-roundtrip", "parameters": {"m": 2, "n": 1, "nu_exp": nu}})
        assert sc.run_scenario(cfg)["extraction"].columns["T0"] == [0.0]

    def test_thermo_spectrum(self):
        tables = sc.run_scenario(sc.config_from_dict({"kind": "thermo-spectrum", "parameters": {"n_max": 3}}))
        assert len(tables["levels"]) == 3 and len(tables["transitions"]) == 3
        assert tables["levels"].columns["E_correction"][0] == 0.0

    def test_inputs_not_mutated(self):
        params = {"periods": 1}
        cfg = sc.config_from_dict({"kind": "classical", "parameters": params})
        sc.run_scenario(cfg)
        assert params == {"periods": 1} and cfg.parameters == {"periods": 1}

    @pytest.mark.parametrize("kind,params", [
        ("classical", {"periods": 2}),
        ("classical-heat", {"steps": 500}),
        ("quantum", {"steps": 50, "n": 256, "k": 0.1}),
        ("thermo-spectrum", {}),
        ("t0-roundtrip", {}),
    ])
    def test_byte_identical_reruns(self, tmp_path, kind, params):
        cfg = sc.config_from_dict({"kind": kind, "parameters": params, "seed": 7})
        _, first = sc.run_and_write(cfg, tmp_path / "a")
        _, second = sc.run_and_write(cfg, tmp_path / "b")
        assert [p.name for p in first] == [p.name for p in second]
        for a, b in zip(first, second):
            assert a.read_bytes() == b.read_bytes()

    def test_writes_only_inside_output(self, tmp_path):
        out = tmp_path / "out"
        cfg = sc.config_from_dict({"kind": "thermo-spectrum", "output": str(out)})
        _, paths = sc.run_and_write(cfg)
        assert all(p.parent == out for p in paths)
        assert sorted(p.name for p in tmp_path.iterdir()) == ["out"]
