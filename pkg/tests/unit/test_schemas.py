"""
Unit tests tying the JSON schemas under schemas/ to what petzlab writes

Only required keys and enumerations are compared; full validation is left to
external tooling.
"""
import json
from pathlib import Path

import pytest

from petzlab.campaign import CampaignConfig, run_campaign
from petzlab.inequalities import (
    InequalityId,
    InstanceKind,
    RemainderKind,
    Verdict,
    run_check,
    sample_instance,
)
from petzlab.inequalities.report import SCHEMA_VERSION, CounterexampleCandidate

SCHEMA_DIR = Path(__file__).resolve().parents[2] / "schemas"


def load_schema(name):
    with open(SCHEMA_DIR / name) as handle:
        return json.load(handle)


@pytest.fixture
def report_schema():
    return load_schema("inequality-report.json")


# --- Inequality Report Tests ---

@pytest.mark.unit
def test_report_enums_match_code(report_schema):
    props = report_schema["properties"]
    assert set(props["inequality_id"]["enum"]) == {i.value for i in InequalityId}
    assert set(props["remainder_kind"]["enum"]) == {k.value for k in RemainderKind}
    assert set(props["verdict"]["enum"]) == {v.value for v in Verdict}
    assert props["schema_version"]["const"] == SCHEMA_VERSION


@pytest.mark.unit
def test_plain_report_has_required_keys(report_schema):
    instance = sample_instance(InequalityId.SSA, "random", [2, 2, 2], seed=1)
    data = run_check(InequalityId.SSA, instance).to_dict()
    assert list(data) == report_schema["required"]
    assert data["witness"] is None
    assert data["unit"] in report_schema["properties"]["unit"]["enum"]


@pytest.mark.unit
def test_witness_report_has_required_keys(report_schema, tiny_budget):
    instance = sample_instance(InequalityId.MONO_CHANNEL_ROTATED, "markov", [2, 2], seed=2)
    data = run_check(InequalityId.MONO_CHANNEL_ROTATED, instance, tiny_budget, 2).to_dict()
    witness_schema = report_schema["properties"]["witness"]["oneOf"][1]
    assert set(witness_schema["required"]) <= set(data["witness"])
    for entry in data["witness"]["optimizer_trace"]:
        assert len(entry) == 3
    json.dumps(data, allow_nan=False)


# --- Counterexample Tests ---

@pytest.mark.unit
def test_counterexample_keys_and_instance_kinds():
    schema = load_schema("counterexample.json")
    assert set(schema["properties"]["instance"]["properties"]["kind"]["enum"]) == {k.value for k in InstanceKind}

    instance = sample_instance(InequalityId.CONJ_13, "random", [2, 2], seed=3)
    report = run_check(InequalityId.CONJ_13, instance)
    history = [{"stage": "default", "tolerance_scale": 1.0, "precision": "double", "status": "completed"}]
    data = CounterexampleCandidate(report=report, instance=instance.to_payload(), refinement_history=history).to_dict()
    assert list(data) == schema["required"]
    assert set(schema["properties"]["refinement_history"]["items"]["required"]) <= set(history[0])
    assert data["instance"]["kind"] == "bipartite"
    assert data["instance"]["rho"]["encoding"] == schema["$defs"]["operator"]["properties"]["encoding"]["const"]


# --- Campaign Summary Tests ---

@pytest.mark.unit
def test_campaign_summary_keys(tmp_path):
    schema = load_schema("campaign-summary.json")
    config = CampaignConfig(
        master_seed=1,
        checks=["ssa"],
        samples=1,
        dims=[2, 2, 2],
        output_path=str(tmp_path / "out"),
        store_path=str(tmp_path / "ce.jsonl"),
        jobs=1,
    )
    data = run_campaign(config).to_dict()
    assert list(data) == schema["required"]
    assert set(schema["properties"]["config"]["required"]) <= set(data["config"])
    row_required = schema["properties"]["checks"]["items"]["required"]
    assert set(row_required) <= set(data["checks"][0])
    json.dumps(data, allow_nan=False)
