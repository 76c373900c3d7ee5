"""
Unit tests for petzlab.config

Tests environment loading, validation and the scoped overrides.
"""
import pytest

from petzlab.config import (
    PRECISION_DOUBLE,
    PRECISION_EXTENDED,
    LabConfig,
    get_config,
    precision,
    precision_scope,
    set_config,
    tolerance_scale,
    tolerance_scope,
)
from petzlab.recovery import OptimizerBudget


@pytest.mark.unit
def test_defaults():
    config = LabConfig()
    assert config.verdict_tol == 1e-8
    assert config.violation_floor == 1e-5
    assert config.cert_tol == 1e-6
    assert config.budget_restarts == 20
    assert config.budget_iters == 300
    assert config.dense_cap == 4096
    assert config.jobs is None
    assert config.validate() == []


@pytest.mark.unit
def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("PETZLAB_BUDGET_RESTARTS", "3")
    monkeypatch.setenv("PETZLAB_VERDICT_TOL", "1e-7")
    monkeypatch.setenv("PETZLAB_JOBS", "2")
    config = LabConfig()
    assert config.budget_restarts == 3
    assert config.verdict_tol == 1e-7
    assert config.jobs == 2


@pytest.mark.unit
def test_budget_from_config(monkeypatch):
    monkeypatch.setenv("PETZLAB_BUDGET_ITERS", "17")
    set_config(LabConfig())
    assert OptimizerBudget.from_config().iterations == 17


@pytest.mark.unit
def test_validate_reports_every_issue():
    config = LabConfig(verdict_tol=-1.0, budget_restarts=0, dense_cap=0, jobs=0)
    issues = config.validate()
    assert any("VERDICT_TOL" in issue for issue in issues)
    assert any("BUDGET_RESTARTS" in issue for issue in issues)
    assert any("DENSE_CAP" in issue for issue in issues)
    assert any("JOBS" in issue for issue in issues)


@pytest.mark.unit
def test_validate_empty_inconclusive_band():
    issues = LabConfig(verdict_tol=1e-3, violation_floor=1e-4).validate()
    assert any("inconclusive band" in issue for issue in issues)


@pytest.mark.unit
def test_set_config_is_global():
    custom = LabConfig(cert_tol=1e-3)
    set_config(custom)
    assert get_config() is custom


@pytest.mark.unit
def test_tolerance_scopes_nest_multiplicatively():
    assert tolerance_scale() == 1.0
    with tolerance_scope(0.1):
        with tolerance_scope(0.5):
            assert tolerance_scale() == pytest.approx(0.05)
        assert tolerance_scale() == pytest.approx(0.1)
    assert tolerance_scale() == 1.0


@pytest.mark.unit
def test_precision_scope_restores():
    assert precision() == PRECISION_DOUBLE
    with precision_scope(PRECISION_EXTENDED):
        assert precision() == PRECISION_EXTENDED
    assert precision() == PRECISION_DOUBLE
