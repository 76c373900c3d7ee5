"""
Report types shared by every checker.

A report compares lhs and rhs in bits. The verdict is banded:

    gap >= -verdict_tol                  -> holds
    gap <  -violation_floor              -> violated
    otherwise                            -> inconclusive
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from ..config import get_config
from ..recovery import RotationWitness

SCHEMA_VERSION = "1.0"
UNIT = "bits"


class InequalityId(str, Enum):
    """Tags for every checker."""

    MONO_CHANNEL = "mono_channel"
    MONO_PT = "mono_pt"
    JOINT_CONVEXITY = "joint_convexity"
    SSA = "ssa"
    CONCAVITY = "concavity"
    MONO_CHANNEL_ROTATED = "mono_channel_rotated"
    MONO_PT_ROTATED = "mono_pt_rotated"
    ALT_BOUND = "alt_bound"
    BURES_1 = "bures_1"
    BURES_2 = "bures_2"
    BURES_3 = "bures_3"
    BURES_4 = "bures_4"
    BURES_5 = "bures_5"
    CONJ_12 = "conj_12"
    CONJ_13 = "conj_13"
    CONJ_14 = "conj_14"
    CONJ_15 = "conj_15"
    CONJ_16 = "conj_16"
    REDUCTION_CQ = "reduction_cq"
    REDUCTION_BLOCKS = "reduction_blocks"
    REDUCTION_SSA = "reduction_ssa"
    LEMMA_B2 = "lemma_b2"
    LEMMA_B6 = "lemma_b6"
    LEMMA_B7 = "lemma_b7"


class RemainderKind(str, Enum):
    NEG_LOG_F = "neg_log_F"
    BURES_SQ = "bures_sq"
    NONE = "none"


class Verdict(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


PROVED = frozenset({
    InequalityId.MONO_CHANNEL,
    InequalityId.MONO_PT,
    InequalityId.JOINT_CONVEXITY,
    InequalityId.SSA,
    InequalityId.CONCAVITY,
    InequalityId.MONO_CHANNEL_ROTATED,
    InequalityId.MONO_PT_ROTATED,
    InequalityId.REDUCTION_CQ,
    InequalityId.REDUCTION_BLOCKS,
    InequalityId.REDUCTION_SSA,
    InequalityId.LEMMA_B2,
    InequalityId.LEMMA_B6,
    InequalityId.LEMMA_B7,
})

# Open bounds evaluated for reporting only: neither proved nor hunted
DIAGNOSTICS = frozenset({InequalityId.ALT_BOUND})

# Existence statements checked through a witness search: never reported violated
WITNESS_CHECKS = frozenset({
    InequalityId.MONO_CHANNEL_ROTATED,
    InequalityId.MONO_PT_ROTATED,
    InequalityId.ALT_BOUND,
})

CONJECTURES = frozenset(i for i in InequalityId if i not in PROVED | DIAGNOSTICS)


def is_proved(inequality_id: InequalityId) -> bool:
    return InequalityId(inequality_id) in PROVED


def status_of(inequality_id: InequalityId) -> str:
    inequality_id = InequalityId(inequality_id)
    if inequality_id in PROVED:
        return "proved"
    return "diagnostic" if inequality_id in DIAGNOSTICS else "conjecture"


def decide_verdict(gap: float, verdict_tol: float = None, violation_floor: float = None) -> Verdict:
    """Band the gap into holds / violated / inconclusive; NaN (inf - inf) is inconclusive."""
    config = get_config()
    verdict_tol = config.verdict_tol if verdict_tol is None else verdict_tol
    violation_floor = config.violation_floor if violation_floor is None else violation_floor
    if math.isnan(gap):
        return Verdict.INCONCLUSIVE
    if gap >= -verdict_tol:
        return Verdict.HOLDS
    if gap < -violation_floor:
        return Verdict.VIOLATED
    return Verdict.INCONCLUSIVE


def json_float(value: float) -> Any:
    """JSON-safe float: non-finite values become strings."""
    value = float(value)
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return value


@dataclass
class InequalityReport:
    """One evaluated inequality instance."""

    inequality_id: InequalityId
    lhs: float
    rhs: float
    remainder_kind: RemainderKind
    verdict: Verdict
    witness: Optional[RotationWitness] = None
    instance_digest: dict[str, Any] = field(default_factory=dict)
    extras: dict[str, Any] = field(default_factory=dict)
    unit: str = UNIT

    @property
    def gap(self) -> float:
        if math.isinf(self.lhs) and math.isinf(self.rhs) and self.lhs == self.rhs:
            return math.nan
        return self.lhs - self.rhs

    @property
    def proved(self) -> bool:
        return is_proved(self.inequality_id)

    def to_dict(self) -> dict[str, Any]:
        """Convert to a JSON-safe dictionary with a fixed key order."""
        return {
            "schema_version": SCHEMA_VERSION,
            "inequality_id": self.inequality_id.value,
            "proved": self.proved,
            "unit": self.unit,
            "lhs": json_float(self.lhs),
            "rhs": json_float(self.rhs),
            "gap": json_float(self.gap),
            "remainder_kind": self.remainder_kind.value,
            "verdict": self.verdict.value,
            "witness": self.witness.to_dict() if self.witness is not None else None,
            "instance_digest": dict(self.instance_digest),
            "extras": {k: json_float(v) if isinstance(v, float) else v for k, v in self.extras.items()},
        }


def make_report(
    inequality_id: InequalityId,
    lhs: float,
    rhs: float,
    remainder_kind: RemainderKind,
    witness: RotationWitness = None,
    extras: dict[str, Any] = None,
    verdict_tol: float = None,
    unit: str = UNIT,
) -> InequalityReport:
    """Build a report with the banded verdict; witness checks are capped at inconclusive."""
    report = InequalityReport(
        inequality_id=InequalityId(inequality_id),
        lhs=float(lhs),
        rhs=float(rhs),
        remainder_kind=remainder_kind,
        verdict=Verdict.INCONCLUSIVE,
        witness=witness,
        extras=dict(extras or {}),
        unit=unit,
    )
    verdict = decide_verdict(report.gap, verdict_tol=verdict_tol)
    if report.inequality_id in WITNESS_CHECKS:
        certified = witness is not None and witness.certified
        verdict = Verdict.HOLDS if certified or verdict == Verdict.HOLDS else Verdict.INCONCLUSIVE
    report.verdict = verdict
    return report


@dataclass
class CounterexampleCandidate:
    """A violated conjecture instance with its serialized operators and refinement history."""

    report: InequalityReport
    instance: dict[str, Any]
    refinement_history: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "report": self.report.to_dict(),
            "instance": self.instance,
            "refinement_history": self.refinement_history,
        }
