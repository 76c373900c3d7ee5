"""
Integration tests for the petzlab command-line front end

Commands run in-process through click's CliRunner. Campaigns use --jobs 1
except where worker-count independence is the point of the test.
"""
import csv
import json
import logging
from unittest.mock import patch

import pytest
from click.testing import CliRunner

from observability import config as observability_config
from observability.config import ObservabilityConfig
from petzlab.campaign import DETAILS_FILE, SUMMARY_FILE
from petzlab.inequalities import CHECKS, InequalityId, RemainderKind, make_report
from petzlab_cli import cli


# --- Test Fixtures ---

@pytest.fixture(autouse=True)
def quiet_observability(monkeypatch):
    """Errors-only logging; root handlers restored after each invocation."""
    monkeypatch.setattr(observability_config, "_config", ObservabilityConfig(log_level="ERROR"))
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])


def campaign_args(tmp_path, name="out", jobs=1, checks="ssa,conj_13", samples=2):
    return [
        "campaign",
        "--checks", checks,
        "--seed", 11,
        "--samples", samples,
        "--dims", "2,2,2",
        "--budget-restarts", 2,
        "--budget-iters", 5,
        "--out", tmp_path / name,
        "--store", tmp_path / "ce.jsonl",
        "--jobs", jobs,
    ]


# --- Campaign Command Tests ---

@pytest.mark.integration
def test_campaign_writes_outputs(runner, tmp_path):
    result = invoke(runner, *campaign_args(tmp_path))
    assert result.exit_code == 0, result.output
    assert "ssa" in result.output
    assert "Candidates persisted" in result.output

    lines = (tmp_path / "out" / DETAILS_FILE).read_text().splitlines()
    assert len(lines) == 4
    assert {json.loads(line)["inequality_id"] for line in lines} == {"ssa", "conj_13"}
    with open(tmp_path / "out" / SUMMARY_FILE, newline="") as handle:
        assert [row["inequality_id"] for row in csv.DictReader(handle)] == ["ssa", "conj_13"]


@pytest.mark.integration
@pytest.mark.slow
def test_campaign_output_independent_of_worker_count(runner, tmp_path):
    first = invoke(runner, *campaign_args(tmp_path, name="one", jobs=1, checks="ssa,mono_pt,conj_13"))
    second = invoke(runner, *campaign_args(tmp_path, name="two", jobs=2, checks="ssa,mono_pt,conj_13"))
    assert first.exit_code == 0, first.output
    assert second.exit_code == 0, second.output
    assert (tmp_path / "one" / DETAILS_FILE).read_bytes() == (tmp_path / "two" / DETAILS_FILE).read_bytes()


@pytest.mark.integration
def test_campaign_json_format(runner, tmp_path):
    result = invoke(runner, *campaign_args(tmp_path, checks="ssa", samples=1), "--format", "json")
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["schema_version"] == "1.0"
    assert data["config"]["master_seed"] == 11
    assert data["checks"][0]["holds"] == 1


# --- Exit Code Tests ---

@pytest.mark.integration
def test_unknown_check_is_usage_error(runner, tmp_path):
    result = invoke(runner, *campaign_args(tmp_path, checks="ssa,not_a_check"))
    assert result.exit_code == 1


@pytest.mark.integration
def test_malformed_dims_is_usage_error(runner, tmp_path):
    result = invoke(runner, "campaign", "--dims", "2,x", "--out", tmp_path / "out")
    assert result.exit_code == 1


@pytest.mark.integration
def test_unwritable_output_is_io_error(runner, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    args = campaign_args(tmp_path, checks="ssa", samples=1)
    args[args.index("--out") + 1] = blocker / "out"
    result = invoke(runner, *args)
    assert result.exit_code == 2


@pytest.mark.integration
def test_violated_proved_check_exits_3(runner, tmp_path):
    def fake_check(*args):
        return make_report(InequalityId.SSA, -1.0, 0.0, RemainderKind.NONE)

    with patch("petzlab.campaign.run_check", side_effect=fake_check):
        result = invoke(runner, *campaign_args(tmp_path, checks="ssa", samples=1))

    assert result.exit_code == 3
    assert (tmp_path / "out" / DETAILS_FILE).exists()
    assert (tmp_path / "out" / SUMMARY_FILE).exists()


@pytest.mark.integration
def test_hunt_rejects_proved_checks(runner, tmp_path):
    result = invoke(runner, *(["hunt"] + campaign_args(tmp_path, checks="ssa")[1:]))
    assert result.exit_code == 1


# --- Other Command Tests ---

@pytest.mark.integration
def test_hunt_on_markov_family(runner, tmp_path):
    args = ["hunt"] + campaign_args(tmp_path, checks="conj_13,conj_15", samples=1)[1:] + ["--family", "markov"]
    result = invoke(runner, *args)
    assert result.exit_code == 0, result.output
    assert "Candidates persisted: 0" in result.output
    assert not (tmp_path / "ce.jsonl").exists()


@pytest.mark.integration
def test_checks_listing(runner):
    result = invoke(runner, "checks", "--format", "json")
    assert result.exit_code == 0
    entries = json.loads(result.output)["checks"]
    assert len(entries) == len(CHECKS) == 24
    statuses = {e["inequality_id"]: e["status"] for e in entries}
    assert statuses["ssa"] == "proved"
    assert statuses["conj_13"] == "conjecture"
    assert statuses["alt_bound"] == "diagnostic"


@pytest.mark.integration
def test_typicality_to_stdout(runner):
    result = invoke(runner, "typicality", "--rho", "0.75,0.25", "--sigma", "0.75,0.25", "--delta", 0.5, "--n", "1,2")
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "n,typical_mass,shell_count,window_count,hoeffding_bound,path"
    first = lines[1].split(",")
    assert first[0] == "1"
    assert float(first[1]) == pytest.approx(0.75)
    assert first[-1] == "dense"


@pytest.mark.integration
def test_typicality_to_csv(runner, tmp_path):
    out = tmp_path / "sweep.csv"
    result = invoke(runner, "typicality", "--rho", "0.75,0.25", "--sigma", "0.75,0.25", "--n", "5", "--out", out)
    assert result.exit_code == 0, result.output
    with open(out, newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert [r["n"] for r in rows] == ["5"]


@pytest.mark.integration
def test_typicality_rejects_bad_operator(runner):
    result = invoke(runner, "typicality", "--rho", "a,b", "--sigma", "0.5,0.5")
    assert result.exit_code == 1


@pytest.mark.integration
def test_petz_optimize_prints_reports(runner):
    result = invoke(
        runner, "petz-optimize", "--samples", 2, "--dims", "2,2", "--family", "markov",
        "--budget-restarts", 2, "--budget-iters", 5,
    )
    assert result.exit_code == 0, result.output
    reports = [json.loads(line) for line in result.output.strip().splitlines()]
    assert len(reports) == 2
    assert all(r["witness"] is not None for r in reports)


@pytest.mark.integration
def test_lemmas_command(runner, tmp_path):
    result = invoke(
        runner, "lemmas", "--samples", 2, "--dims", 3, "--out", tmp_path / "out", "--jobs", 1, "--format", "json",
    )
    assert result.exit_code == 0, result.output
    rows = {r["inequality_id"]: r for r in json.loads(result.output)["checks"]}
    assert set(rows) == {"lemma_b2", "lemma_b6", "lemma_b7"}
    assert all(r["violated"] == 0 for r in rows.values())


@pytest.mark.integration
def test_invalid_logging_settings_exit_1(runner, monkeypatch):
    monkeypatch.setattr(observability_config, "_config", ObservabilityConfig(log_level="ERROR", log_format="xml"))
    result = invoke(runner, "checks")
    assert result.exit_code == 1
