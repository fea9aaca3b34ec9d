import math

import pytest

from genhamilton import thermoq as tq
from genhamilton import validation as val
from genhamilton.validation import ValidationSettings


@pytest.fixture(scope="module")
def report():
    return val.validate_suite()


def test_fresh_build_all_pass(report):
    assert len(report) == len(val.CHECKS)
    assert report.passed, "\n".join(c.line() for c in report.failures())


def test_report_entries_complete(report):
    for check in report:
        assert check.module in ("mechanics", "quantum", "thermoq")
        assert check.detail and check.uses
        assert check.seconds >= 0
        assert check.line().startswith("[PASS]")


def test_module_filter():
    rep = val.validate_suite(modules=["thermoq"])
    assert len(rep) > 0 and {c.module for c in rep} == {"thermoq"}


def test_progress_callback_order():
    seen = []
    rep = val.validate_suite(modules=["thermoq"], progress=seen.append)
    assert seen == rep.checks


def test_mutation_sign_flip(monkeypatch):
    original = tq.corrected_level

    def flipped(level, T0):
        base = level.base_energy
        return base - (original(level, T0) - base)

    monkeypatch.setattr(tq, "corrected_level", flipped)
    rep = val.validate_suite(modules=["thermoq"])
    failed = rep.failures()
    assert failed
    for check in failed:
        assert "corrected_level" in check.uses, check.name
    for check in rep:
        if "corrected_level" not in check.uses:
            assert check.passed, check.name


def test_crashing_check_is_failure(monkeypatch):
    def boom(level, T0):
        raise ZeroDivisionError("boom")

    monkeypatch.setattr(tq, "corrected_level", boom)
    rep = val.validate_suite(modules=["thermoq"])
    crashed = [c for c in rep if "raised ZeroDivisionError" in c.detail]
    assert crashed and not any(c.passed for c in crashed)
    assert all(math.isnan(c.measured) for c in crashed)


def test_reduced_dt_shrinks_decay_error():
    s = ValidationSettings()
    e1 = val.cayley_decay_error(s, 0.02)
    e2 = val.cayley_decay_error(s, 0.01)
    assert 3.6 <= e1 / e2 <= 4.4


def test_reduced_dt_in_settings():
    coarse = val.check_cayley_decay(ValidationSettings(quantum_dt=0.02))
    fine = val.check_cayley_decay(ValidationSettings(quantum_dt=0.01))
    assert coarse.passed and fine.passed
    assert fine.measured == pytest.approx(coarse.measured, rel=0.05)
