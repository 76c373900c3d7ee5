"""
Unit tests for petzlab.inequalities

Covers the report verdict bands, the proved checkers, the plain-Petz remainder
statements and the check registry.
"""
import math

import numpy as np
import pytest

from petzlab.channels import identity_channel, partial_trace_channel
from petzlab.errors import InvalidConfig, SupportViolation
from petzlab.inequalities import (
    CHECKS,
    CONJECTURES,
    DIAGNOSTICS,
    PROVED,
    InequalityId,
    RemainderKind,
    Verdict,
    check_bures_circle,
    check_conjectures,
    check_petz_pt_conjecture,
    decide_verdict,
    make_report,
    resolve_checks,
    run_all_checks,
    run_check,
    status_of,
)
from petzlab.inequalities.instances import (
    FAMILIES,
    BipartiteInstance,
    ChannelInstance,
    InstanceKind,
    JointInstance,
    TripartiteInstance,
    instance_from_payload,
    sample_instance,
)
from petzlab.inequalities.proved import (
    check_concavity,
    check_joint_convexity,
    check_mono_channel,
    check_mono_channel_rotated,
    check_mono_pt,
    check_mono_pt_rotated,
    check_ssa,
)
from petzlab.inequalities.report import WITNESS_CHECKS, json_float
from petzlab.opmath import SpaceShape
from petzlab.recovery import RotationWitness
from petzlab.states import random_density


# --- Verdict Tests ---

@pytest.mark.unit
@pytest.mark.parametrize(
    "gap,expected",
    [
        (0.5, Verdict.HOLDS),
        (0.0, Verdict.HOLDS),
        (-1e-9, Verdict.HOLDS),
        (-1e-6, Verdict.INCONCLUSIVE),
        (-1e-4, Verdict.VIOLATED),
        (math.nan, Verdict.INCONCLUSIVE),
        (-math.inf, Verdict.VIOLATED),
    ],
)
def test_decide_verdict_bands(gap, expected):
    assert decide_verdict(gap) == expected


@pytest.mark.unit
def test_infinite_sides_give_nan_gap():
    report = make_report(InequalityId.MONO_CHANNEL, math.inf, math.inf, RemainderKind.NONE)
    assert math.isnan(report.gap)
    assert report.verdict == Verdict.INCONCLUSIVE
    assert report.to_dict()["gap"] == "NaN"


@pytest.mark.unit
def test_json_float():
    assert json_float(1.5) == 1.5
    assert json_float(math.inf) == "Infinity"
    assert json_float(-math.inf) == "-Infinity"


@pytest.mark.unit
def test_witness_checks_never_violated():
    report = make_report(InequalityId.MONO_CHANNEL_ROTATED, 0.0, 1.0, RemainderKind.NEG_LOG_F)
    assert report.verdict == Verdict.INCONCLUSIVE


@pytest.mark.unit
def test_certified_witness_holds():
    witness = RotationWitness(u_out=np.eye(2), v_in=np.eye(2), achieved_root_fidelity=1.0, certified=True)
    report = make_report(InequalityId.MONO_PT_ROTATED, 0.0, 1.0, RemainderKind.NEG_LOG_F, witness=witness)
    assert report.verdict == Verdict.HOLDS
    assert report.to_dict()["witness"]["certified"] is True


@pytest.mark.unit
def test_report_to_dict_keys():
    report = make_report(InequalityId.CONJ_13, 0.2, 0.1, RemainderKind.NEG_LOG_F, extras={"x": math.inf})
    data = report.to_dict()
    assert list(data) == [
        "schema_version", "inequality_id", "proved", "unit", "lhs", "rhs", "gap",
        "remainder_kind", "verdict", "witness", "instance_digest", "extras",
    ]
    assert data["proved"] is False
    assert data["unit"] == "bits"
    assert data["extras"]["x"] == "Infinity"


@pytest.mark.unit
def test_id_partition():
    assert len(InequalityId) == 24
    assert PROVED | CONJECTURES | DIAGNOSTICS == set(InequalityId)
    assert not PROVED & CONJECTURES
    assert not DIAGNOSTICS & (PROVED | CONJECTURES)
    assert WITNESS_CHECKS <= PROVED | DIAGNOSTICS
    assert InequalityId.BURES_1 in CONJECTURES


# --- Instance Tests ---

@pytest.mark.unit
@pytest.mark.parametrize("family", FAMILIES)
def test_every_check_has_a_sampler(family):
    for inequality_id, spec in CHECKS.items():
        instance = sample_instance(inequality_id, family, [2, 2, 2], seed=1)
        assert instance.kind == spec.kind


@pytest.mark.unit
def test_unknown_family():
    with pytest.raises(InvalidConfig):
        sample_instance(InequalityId.SSA, "gaussian", [2, 2, 2])


@pytest.mark.unit
def test_instance_payload_rebuilds():
    instance = sample_instance(InequalityId.MONO_CHANNEL, "random", [2, 3], seed=4)
    rebuilt = instance_from_payload(instance.to_payload())
    assert isinstance(rebuilt, ChannelInstance)
    np.testing.assert_array_equal(rebuilt.rho, instance.rho)
    assert rebuilt.channel.dim_out == 3


@pytest.mark.unit
def test_markov_tripartite_has_zero_cmi():
    instance = sample_instance(InequalityId.SSA, "markov", [2, 2, 2], seed=5)
    assert isinstance(instance, TripartiteInstance)
    assert check_ssa(instance).lhs == pytest.approx(0.0, abs=1e-10)


# --- Proved Checker Tests ---

@pytest.mark.unit
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_plain_proved_checks_hold(seed):
    checks = [
        (InequalityId.MONO_CHANNEL, check_mono_channel),
        (InequalityId.MONO_PT, check_mono_pt),
        (InequalityId.JOINT_CONVEXITY, check_joint_convexity),
        (InequalityId.SSA, check_ssa),
        (InequalityId.CONCAVITY, check_concavity),
    ]
    for inequality_id, fn in checks:
        report = fn(sample_instance(inequality_id, "random", [2, 2, 2], seed=seed))
        assert report.verdict == Verdict.HOLDS, inequality_id
        assert report.remainder_kind == RemainderKind.NONE


@pytest.mark.unit
def test_rotated_checks_certify_on_markov_instances(tiny_budget):
    channel = sample_instance(InequalityId.MONO_CHANNEL_ROTATED, "markov", [2, 2], seed=6)
    report = check_mono_channel_rotated(channel, budget=tiny_budget)
    assert report.verdict == Verdict.HOLDS
    assert report.extras["certified"] is True

    bipartite = sample_instance(InequalityId.MONO_PT_ROTATED, "markov", [2, 2], seed=7)
    assert check_mono_pt_rotated(bipartite, budget=tiny_budget).verdict == Verdict.HOLDS


@pytest.mark.unit
def test_rotated_check_never_violated_on_random_instance(tiny_budget):
    instance = sample_instance(InequalityId.MONO_CHANNEL_ROTATED, "random", [2, 2], seed=8)
    report = check_mono_channel_rotated(instance, budget=tiny_budget, seed=3)
    assert report.verdict != Verdict.VIOLATED
    assert report.extras["achieved"] >= report.extras["petz_fidelity"] - 1e-12


@pytest.mark.unit
def test_rotated_check_singular_output():
    instance = ChannelInstance(rho=np.eye(2) / 2, sigma=np.diag([1.0, 0.0]), channel=identity_channel(2))
    with pytest.raises(SupportViolation):
        check_mono_channel_rotated(instance)


# --- Remainder Statement Tests ---

@pytest.mark.unit
@pytest.mark.parametrize(
    "inequality_id,item",
    [(InequalityId.BURES_1, 1), (InequalityId.BURES_3, 3), (InequalityId.BURES_5, 5)],
)
def test_bures_statements_vanish_on_markov_instances(inequality_id, item):
    instance = sample_instance(inequality_id, "markov", [2, 2, 2], seed=9)
    report = check_bures_circle(item, instance)
    assert report.inequality_id == inequality_id
    assert report.remainder_kind == RemainderKind.BURES_SQ
    assert report.verdict == Verdict.HOLDS
    assert report.extras["gap_nats"] == pytest.approx(report.extras["lhs_nats"] - report.rhs)


@pytest.mark.unit
@pytest.mark.parametrize("number", [12, 13, 14, 15, 16])
def test_log_statements_vanish_on_markov_instances(number):
    inequality_id = InequalityId(f"conj_{number}")
    instance = sample_instance(inequality_id, "markov", [2, 2, 2], seed=10)
    report = check_conjectures(number, instance)
    assert report.inequality_id == inequality_id
    assert report.gap == pytest.approx(0.0, abs=1e-7)
    assert report.verdict == Verdict.HOLDS


@pytest.mark.unit
def test_remainder_fidelities_bounded():
    instance = sample_instance(InequalityId.CONJ_15, "random", [2, 2, 2], seed=11)
    report = check_conjectures("conj_15", instance)
    (fidelity,) = report.extras["root_fidelities"]
    assert 0.0 <= fidelity <= 1.0 + 1e-9
    assert report.rhs == pytest.approx(-2 * math.log2(fidelity))


@pytest.mark.unit
def test_remainder_wrong_instance_kind():
    instance = sample_instance(InequalityId.SSA, "random", [2, 2, 2], seed=12)
    with pytest.raises(InvalidConfig):
        check_conjectures(12, instance)


@pytest.mark.unit
def test_remainder_unknown_item():
    with pytest.raises(InvalidConfig):
        check_bures_circle(7, None)


@pytest.mark.unit
@pytest.mark.parametrize("seed", range(5))
def test_channel_statements_match_bipartite_for_partial_trace(seed):
    shape = SpaceShape.of(A=2, B=3)
    rho = random_density(6, seed=100 + seed).matrix
    sigma = random_density(6, seed=200 + seed).matrix
    bipartite = BipartiteInstance(rho=rho, sigma=sigma, shape=shape)
    channel = ChannelInstance(rho=rho, sigma=sigma, channel=partial_trace_channel(shape, ["A"]))

    pairs = [
        (check_bures_circle(3, bipartite), check_bures_circle(5, channel)),
        (check_conjectures(13, bipartite), check_conjectures(12, channel)),
    ]
    for expected, report in pairs:
        assert report.lhs == pytest.approx(expected.lhs, abs=1e-9)
        assert report.rhs == pytest.approx(expected.rhs, abs=1e-9)


@pytest.mark.unit
def test_petz_pt_conjecture_is_the_bipartite_statement():
    instance = sample_instance(InequalityId.CONJ_13, "random", [2, 3], seed=14)
    report = check_petz_pt_conjecture(instance)
    assert report.inequality_id == InequalityId.CONJ_13
    assert report.to_dict() == check_conjectures(13, instance).to_dict()


@pytest.mark.unit
def test_single_member_joint_statement_is_exact():
    rho = random_density(3, seed=15).matrix
    sigma = random_density(3, seed=16).matrix
    joint = check_conjectures(14, JointInstance(probs=np.array([1.0]), rhos=[rho], sigmas=[sigma]))
    # a trivial traced factor makes the conditional recovery the identity as well
    pair = check_conjectures(13, BipartiteInstance(rho=rho, sigma=sigma, shape=SpaceShape.of(A=1, B=3)))

    assert joint.lhs == pytest.approx(0.0, abs=1e-9)
    assert joint.extras["root_fidelities"] == pytest.approx([1.0], abs=1e-8)
    assert joint.rhs == pytest.approx(0.0, abs=1e-7)
    assert joint.lhs == pytest.approx(pair.lhs, abs=1e-9)
    assert joint.extras["root_fidelities"] == pytest.approx(pair.extras["root_fidelities"], abs=1e-8)
    assert joint.verdict == pair.verdict == Verdict.HOLDS


# --- Registry Tests ---

@pytest.mark.unit
def test_registry_covers_every_id():
    assert set(CHECKS) == set(InequalityId)
    assert CHECKS[InequalityId.SSA].kind == InstanceKind.TRIPARTITE
    assert CHECKS[InequalityId.ALT_BOUND].uses_optimizer
    assert not CHECKS[InequalityId.CONJ_12].proved


@pytest.mark.unit
def test_alt_bound_is_a_diagnostic():
    entry = CHECKS[InequalityId.ALT_BOUND]
    assert InequalityId.ALT_BOUND in DIAGNOSTICS
    assert InequalityId.ALT_BOUND in WITNESS_CHECKS
    assert InequalityId.ALT_BOUND not in CONJECTURES
    assert not entry.proved
    assert status_of(InequalityId.ALT_BOUND) == "diagnostic"
    assert status_of(InequalityId.SSA) == "proved"
    assert status_of(InequalityId.CONJ_13) == "conjecture"


@pytest.mark.unit
def test_resolve_checks():
    assert resolve_checks(None) == list(CHECKS)
    assert resolve_checks(["all"]) == list(CHECKS)
    assert resolve_checks(["ssa", "conj_13"]) == [InequalityId.SSA, InequalityId.CONJ_13]
    with pytest.raises(InvalidConfig):
        resolve_checks(["nope"])


@pytest.mark.unit
def test_run_check_dispatches():
    instance = sample_instance(InequalityId.REDUCTION_CQ, "random", [2, 2], seed=13)
    report = run_check(InequalityId.REDUCTION_CQ, instance)
    assert report.inequality_id == InequalityId.REDUCTION_CQ
    assert report.verdict == Verdict.HOLDS


@pytest.mark.unit
def test_run_all_checks_subset():
    reports, all_passed = run_all_checks(seed=3, checks=["ssa", "mono_channel", "lemma_b2"])
    assert [r.inequality_id for r in reports] == [InequalityId.SSA, InequalityId.MONO_CHANNEL, InequalityId.LEMMA_B2]
    assert all_passed
