"""
Unit tests for the observability package

Covers configuration validation, structured log records, the in-process
metrics collector and error tracking without Sentry.
"""
import json
import logging

import pytest

from observability import (
    LogContext,
    ObservabilityConfig,
    get_logger,
    get_metrics_collector,
    performance_monitor,
    track_optimizer_run,
    track_performance,
    track_verdict,
    with_error_tracking,
)
from observability import errors as errors_module
from observability.logger import StructuredFormatter, TextFormatter, get_campaign_id, set_campaign_id
from petzlab.errors import InvalidConfig, InvariantViolation, SupportViolation


# --- Configuration Tests ---

@pytest.mark.unit
def test_default_config_is_valid(monkeypatch):
    for name in ("PETZLAB_LOG_LEVEL", "PETZLAB_LOG_FORMAT", "PETZLAB_SENTRY_ENABLED"):
        monkeypatch.delenv(name, raising=False)
    config = ObservabilityConfig()
    assert config.service_name == "petzlab"
    assert config.validate() == []


@pytest.mark.unit
def test_config_validation_issues():
    config = ObservabilityConfig(log_format="xml", log_level="LOUD", sentry_enabled=True, sentry_dsn=None)
    issues = config.validate()
    assert len(issues) == 3
    assert any("LOG_FORMAT" in issue for issue in issues)
    assert any("SENTRY_DSN" in issue for issue in issues)


# --- Logging Tests ---

@pytest.mark.unit
def test_structured_record_carries_context_and_fields():
    record = logging.LogRecord("petzlab.test", logging.INFO, __file__, 10, "Check did not hold", None, None)
    record.extra_fields = {"inequality": "conj_13", "gap": float("-inf")}
    with LogContext(operation="hunt", campaign_id="seed-3"):
        data = json.loads(StructuredFormatter().format(record))
    assert data["message"] == "Check did not hold"
    assert data["operation"] == "hunt"
    assert data["campaign_id"] == "seed-3"
    assert data["inequality"] == "conj_13"
    assert data["gap"] == "-inf"


@pytest.mark.unit
def test_log_context_restores():
    with LogContext(campaign_id="outer"):
        set_campaign_id("outer")
        with LogContext(campaign_id="inner"):
            assert get_campaign_id() == "inner"
        assert get_campaign_id() == "outer"


@pytest.mark.unit
def test_set_campaign_id_generates_one():
    with LogContext(campaign_id="placeholder"):
        generated = set_campaign_id()
        assert get_campaign_id() == generated
        assert len(generated) == 36


@pytest.mark.unit
def test_logger_passes_fields(caplog):
    logger = get_logger("petzlab.test")
    with caplog.at_level(logging.INFO, logger="petzlab.test"):
        logger.info("Refinement stage", stage="tightened", gap=None)
    (record,) = caplog.records
    assert record.extra_fields == {"stage": "tightened"}


# --- Metrics Tests ---

@pytest.mark.unit
def test_track_verdict():
    track_verdict("ssa", "holds", 0.25)
    track_verdict("ssa", "holds", float("nan"))
    collector = get_metrics_collector()
    assert collector.counter_value("verdict.count", {"inequality": "ssa", "verdict": "holds"}) == 2
    assert collector.histogram_values("verdict.gap.bits", {"inequality": "ssa"}) == [0.25]


@pytest.mark.unit
def test_track_optimizer_run():
    track_optimizer_run(3, 40, 0.99, certified=True)
    collector = get_metrics_collector()
    assert collector.counter_value("optimizer.certified") == 1
    assert collector.histogram_values("optimizer.iterations") == [40]


@pytest.mark.unit
def test_track_performance_counts_failures():
    with pytest.raises(ValueError):
        with track_performance("sweep"):
            raise ValueError("boom")
    collector = get_metrics_collector()
    assert collector.counter_value("operation.failure", {"operation": "sweep"}) == 1
    assert collector.counter_value("operation.error", {"operation": "sweep", "error_type": "ValueError"}) == 1


@pytest.mark.unit
def test_performance_monitor_decorator():
    @performance_monitor(operation="square")
    def square(x):
        return x * x

    assert square(3) == 9
    collector = get_metrics_collector()
    assert collector.counter_value("operation.success", {"operation": "square"}) == 1
    assert len(collector.histogram_values("operation.duration.seconds", {"operation": "square"})) == 1


@pytest.mark.unit
def test_collector_reset():
    collector = get_metrics_collector()
    collector.record_gauge("campaign.samples", 5)
    collector.record_counter("x")
    collector.reset()
    assert collector.counter_value("x") == 0.0


# --- Error Tracking Tests ---

@pytest.mark.unit
def test_with_error_tracking_reraises_and_captures(mocker):
    errors_module._tracker = None
    captured = mocker.patch.object(errors_module.ErrorTracker, "capture_exception", return_value=None)

    @with_error_tracking(context={"component": "campaign"})
    def failing():
        raise SupportViolation("leak", mass=0.5)

    with pytest.raises(SupportViolation):
        failing()
    error, context = captured.call_args.args[0], captured.call_args.args[1]
    assert isinstance(error, SupportViolation)
    assert context["component"] == "campaign"
    assert context["function"] == "failing"


@pytest.mark.unit
def test_capture_without_sentry_returns_none():
    errors_module._tracker = None
    assert errors_module.capture_exception(SupportViolation("leak")) is None


@pytest.mark.unit
def test_severity_follows_exit_code():
    assert errors_module.severity(InvalidConfig("bad flag")) == "warning"
    assert errors_module.severity(InvariantViolation("ssa violated")) == "fatal"
    assert errors_module.severity(ValueError("x")) == "error"


@pytest.mark.unit
def test_error_context_includes_exit_code():
    context = errors_module._error_context(SupportViolation("leak", mass=0.5))
    assert context == {"mass": 0.5, "exit_code": 1}


# --- Text Formatter Tests ---

@pytest.mark.unit
def test_text_formatter_keeps_full_float_precision():
    record = logging.LogRecord("petzlab.test", logging.WARNING, __file__, 1, "Verdict", None, None)
    record.extra_fields = {"gap": -1.2345678901234e-06, "inequality": "bures_1"}
    with LogContext(operation="hunt", campaign_id="seed-9"):
        line = TextFormatter().format(record)
    assert "WARNING" in line
    assert "[seed-9 hunt]" in line
    assert "gap=-1.2345678901234e-06" in line
    assert "inequality=bures_1" in line
