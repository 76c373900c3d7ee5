"""
Counterexample refinement.

A violated conjecture instance is re-evaluated in up to three stages:

    default     the report that flagged it
    tightened   psd, support and hermiticity tolerances scaled by 0.01
    extended    tightened, with eigensolves at extended precision (mpmath)

The candidate survives when every completed stage is violated and the
tightened stage completed. A missing mpmath skips the last stage.
"""

from typing import Any, Optional

from observability import get_logger

from ..config import PRECISION_DOUBLE, PRECISION_EXTENDED, precision_scope, tolerance_scope
from ..errors import PetzlabError
from ..recovery import OptimizerBudget
from ..states import Seed
from .report import CounterexampleCandidate, InequalityId, InequalityReport, Verdict
from .suite import run_check

logger = get_logger(__name__)

TIGHTENED_SCALE = 0.01

STATUS_COMPLETED = "completed"
STATUS_SKIPPED = "skipped"
STATUS_ERROR = "error"


def _entry(
    stage: str,
    scale: float,
    mode: str,
    report: InequalityReport = None,
    status: str = STATUS_COMPLETED,
    error: str = None,
) -> dict[str, Any]:
    entry = {"stage": stage, "tolerance_scale": scale, "precision": mode, "status": status}
    if report is not None:
        data = report.to_dict()
        entry.update(gap=data["gap"], lhs=data["lhs"], rhs=data["rhs"], verdict=data["verdict"])
    if error is not None:
        entry["error"] = error
    return entry


def refine(
    inequality_id: InequalityId,
    instance,
    report: InequalityReport = None,
    budget: OptimizerBudget = None,
    seed: Seed = 0,
    instance_digest: dict[str, Any] = None,
) -> Optional[CounterexampleCandidate]:
    """
    Re-evaluate a violated instance at tightened tolerances and extended precision.

    Args:
        inequality_id: Check that reported the violation
        instance: The instance it was evaluated on
        report: The default-stage report (evaluated here when omitted)
        budget: Optimizer budget for checks that search unitaries
        seed: Seed passed through to the checker
        instance_digest: Sampling provenance stored with the candidate

    Returns:
        The candidate with its refinement history, or None when it did not survive
    """
    inequality_id = InequalityId(inequality_id)
    if report is None:
        report = run_check(inequality_id, instance, budget, seed)
    history = [_entry("default", 1.0, PRECISION_DOUBLE, report)]
    if report.verdict != Verdict.VIOLATED:
        return None

    stages = [
        ("tightened", PRECISION_DOUBLE),
        ("extended", PRECISION_EXTENDED),
    ]
    final = report
    for stage, mode in stages:
        try:
            with tolerance_scope(TIGHTENED_SCALE), precision_scope(mode):
                staged = run_check(inequality_id, instance, budget, seed)
        except ImportError as e:
            history.append(_entry(stage, TIGHTENED_SCALE, mode, status=STATUS_SKIPPED, error=str(e)))
            logger.info("Refinement stage skipped", inequality=inequality_id.value, stage=stage, reason=str(e))
            continue
        except PetzlabError as e:
            history.append(_entry(stage, TIGHTENED_SCALE, mode, status=STATUS_ERROR, error=str(e)))
            logger.warning("Refinement stage failed", inequality=inequality_id.value, stage=stage, error=str(e))
            continue
        history.append(_entry(stage, TIGHTENED_SCALE, mode, staged))
        logger.info("Refinement stage", inequality=inequality_id.value, stage=stage, gap=staged.gap, verdict=staged.verdict.value)
        final = staged

    completed = [h for h in history if h["status"] == STATUS_COMPLETED]
    tightened_done = any(h["stage"] == "tightened" for h in completed)
    survived = tightened_done and all(h["verdict"] == Verdict.VIOLATED.value for h in completed)
    if not survived:
        logger.info("Candidate discarded after refinement", inequality=inequality_id.value)
        return None

    final.instance_digest.update(instance_digest or {})
    return CounterexampleCandidate(
        report=final,
        instance=instance.to_payload(),
        refinement_history=history,
    )
