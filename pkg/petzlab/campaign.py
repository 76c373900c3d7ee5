"""
Seeded sampling campaigns, conjecture hunts and typicality sweeps.

Every (sample, check) pair draws its instance from a generator keyed on
(master_seed, sample_index, check position) only, so results do not depend on
the number of workers. Workers are stateless; the calling process is the single
writer of the detail file, the summary and the counterexample store.

Outputs in ``output_path``:
    details.jsonl   one report per line, ordered by sample then check
    summary.csv     fixed columns, one row per check
"""

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from observability import LogContext, get_logger, track_verdict, with_error_tracking

from . import __version__
from .config import LabConfig, get_config, set_config, tolerance_scope
from .errors import InvalidConfig, InvariantViolation, IoFailure, PetzlabError
from .inequalities.instances import FAMILIES, INSTANCE_KIND, sample_instance
from .inequalities.refinement import refine
from .inequalities.report import (
    CONJECTURES,
    WITNESS_CHECKS,
    InequalityId,
    InequalityReport,
    RemainderKind,
    Verdict,
    is_proved,
)
from .inequalities.suite import resolve_checks, run_check
from .recovery import OptimizerBudget
from .store import CounterexampleStore
from .typicality import eigenvalue_shells, hoeffding_bound, typical_mass, typical_projector

logger = get_logger(__name__)

DETAILS_FILE = "details.jsonl"
SUMMARY_FILE = "summary.csv"
SWEEP_FILE = "typicality.csv"

SUMMARY_COLUMNS = [
    "inequality_id",
    "proved",
    "samples",
    "holds",
    "violated",
    "inconclusive",
    "errors",
    "min_gap",
    "certified",
    "certification_rate",
    "candidates",
]

SWEEP_COLUMNS = ["n", "typical_mass", "shell_count", "window_count", "hoeffding_bound", "path"]

MODE_CAMPAIGN = "campaign"
MODE_HUNT = "hunt"


@dataclass
class CampaignConfig:
    """Everything that determines a campaign's output."""

    master_seed: int = 0
    checks: list[str] = field(default_factory=lambda: ["all"])
    samples: int = 1
    dims: list[int] = field(default_factory=lambda: [2, 2, 2])
    family: str = "random"
    budget: OptimizerBudget = field(default_factory=OptimizerBudget.from_config)
    tolerance_scale: float = 1.0
    output_path: str = "petzlab-out"
    store_path: Optional[str] = None
    jobs: Optional[int] = None
    mode: str = MODE_CAMPAIGN

    def check_ids(self) -> list[InequalityId]:
        return resolve_checks(self.checks)

    def validate(self) -> None:
        """
        Raises:
            InvalidConfig: listing every problem found
        """
        issues = []
        minimum = 0 if self.mode == MODE_HUNT else 1
        if self.samples < minimum:
            issues.append(f"samples must be >= {minimum} (got {self.samples})")
        if not self.dims or any(int(d) < 2 for d in self.dims):
            issues.append(f"every dimension must be >= 2 (got {list(self.dims)})")
        if self.family not in FAMILIES:
            issues.append(f"unknown family {self.family!r} (expected one of {list(FAMILIES)})")
        if self.tolerance_scale <= 0:
            issues.append(f"tolerance scale must be positive (got {self.tolerance_scale})")
        if self.jobs is not None and self.jobs < 1:
            issues.append(f"jobs must be >= 1 (got {self.jobs})")
        if self.budget.restarts < 1 or self.budget.iterations < 0:
            issues.append("optimizer budget needs >= 1 restart and >= 0 iterations")
        try:
            ids = self.check_ids()
        except InvalidConfig as e:
            issues.append(e.message)
            ids = []
        if self.mode == MODE_HUNT:
            proved = [i.value for i in ids if i not in CONJECTURES]
            if proved:
                issues.append(f"hunt accepts conjecture checks only (got {proved})")
        if issues:
            raise InvalidConfig("invalid campaign configuration: " + "; ".join(issues), issues=issues)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["checks"] = [i.value for i in self.check_ids()]
        return data


@dataclass
class CheckTally:
    holds: int = 0
    violated: int = 0
    inconclusive: int = 0
    errors: int = 0
    min_gap: float = math.inf
    certified: int = 0
    candidates: int = 0

    @property
    def samples(self) -> int:
        return self.holds + self.violated + self.inconclusive


@dataclass
class CampaignSummary:
    """Per-check verdict counts plus the configuration that produced them."""

    config: dict[str, Any]
    tallies: dict[str, CheckTally] = field(default_factory=dict)
    candidates: list[dict[str, Any]] = field(default_factory=list)
    invariant_violations: list[dict[str, Any]] = field(default_factory=list)
    wall_time: float = 0.0

    def certification_rate(self, inequality_id: str) -> Optional[float]:
        if InequalityId(inequality_id) not in WITNESS_CHECKS:
            return None
        tally = self.tallies[inequality_id]
        return tally.certified / tally.samples if tally.samples else None

    def rows(self) -> Iterator[dict[str, Any]]:
        for inequality_id, tally in self.tallies.items():
            rate = self.certification_rate(inequality_id)
            yield {
                "inequality_id": inequality_id,
                "proved": is_proved(InequalityId(inequality_id)),
                "samples": tally.samples,
                "holds": tally.holds,
                "violated": tally.violated,
                "inconclusive": tally.inconclusive,
                "errors": tally.errors,
                "min_gap": repr(tally.min_gap) if math.isfinite(tally.min_gap) else "",
                "certified": tally.certified if rate is not None else "",
                "certification_rate": repr(rate) if rate is not None else "",
                "candidates": tally.candidates,
            }

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": "1.0",
            "config": self.config,
            "checks": list(self.rows()),
            "candidates": self.candidates,
            "invariant_violations": self.invariant_violations,
            "wall_time": self.wall_time,
        }


@dataclass(frozen=True)
class _Task:
    inequality_id: InequalityId
    position: int
    sample_index: int


def _instance_seed(master_seed: int, sample_index: int, position: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), int(sample_index), int(position)])


def _provenance(master_seed: int, family: str, dims: Sequence[int], task: _Task) -> dict[str, Any]:
    return {
        "master_seed": int(master_seed),
        "sample_index": task.sample_index,
        "family": family,
        "dims": [int(d) for d in dims],
        "sampler": INSTANCE_KIND[task.inequality_id].value,
        "version": __version__,
    }


def _digest(config: CampaignConfig, task: _Task) -> dict[str, Any]:
    return _provenance(config.master_seed, config.family, config.dims, task)


def _error_report(inequality_id: InequalityId, error: PetzlabError) -> InequalityReport:
    return InequalityReport(
        inequality_id=inequality_id,
        lhs=math.nan,
        rhs=math.nan,
        remainder_kind=RemainderKind.NONE,
        verdict=Verdict.INCONCLUSIVE,
        extras={"error_type": type(error).__name__, "error": error.message},
    )


def _evaluate(payload: tuple[CampaignConfig, LabConfig, _Task]) -> dict[str, Any]:
    """Worker entry point: sample, check and (for violated conjectures) refine one task."""
    config, lab_config, task = payload
    set_config(lab_config)
    with tolerance_scope(config.tolerance_scale):
        instance = sample_instance(
            task.inequality_id,
            config.family,
            config.dims,
            seed=_instance_seed(config.master_seed, task.sample_index, task.position),
        )
        optimizer_seed = [int(config.master_seed), task.sample_index]
        digest = _digest(config, task)
        try:
            report = run_check(task.inequality_id, instance, config.budget, optimizer_seed)
        except PetzlabError as e:
            report = _error_report(task.inequality_id, e)
        report.instance_digest.update(digest)

        candidate = None
        if report.verdict == Verdict.VIOLATED and task.inequality_id in CONJECTURES:
            refined = refine(task.inequality_id, instance, report, config.budget, optimizer_seed, digest)
            candidate = refined.to_dict() if refined is not None else None

    return {"report": report.to_dict(), "candidate": candidate}


def _tasks(config: CampaignConfig) -> list[_Task]:
    ids = config.check_ids()
    return [
        _Task(inequality_id, position, sample_index)
        for sample_index in range(config.samples)
        for position, inequality_id in enumerate(ids)
    ]


def _worker_count(config: CampaignConfig) -> int:
    return config.jobs or get_config().jobs or os.cpu_count() or 1


def _results(config: CampaignConfig, tasks: Sequence[_Task]) -> Iterator[dict[str, Any]]:
    lab_config = get_config()
    payloads = [(config, lab_config, task) for task in tasks]
    jobs = min(_worker_count(config), max(len(payloads), 1))
    if jobs == 1:
        yield from map(_evaluate, payloads)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(_evaluate, payloads, chunksize=max(1, len(payloads) // (4 * jobs)))


def _output_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailure(f"cannot create output directory: {e}", path=str(out)) from e
    return out


def write_summary_csv(summary: CampaignSummary, path: Path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(summary.rows())
    except OSError as e:
        raise IoFailure(f"cannot write summary: {e}", path=str(path)) from e


def _execute(config: CampaignConfig) -> CampaignSummary:
    config.validate()
    started = time.perf_counter()
    out = _output_dir(config.output_path)
    store = CounterexampleStore(config.store_path)
    summary = CampaignSummary(config=config.to_dict())
    for inequality_id in config.check_ids():
        summary.tallies[inequality_id.value] = CheckTally()

    logger.info(
        "Campaign started",
        mode=config.mode,
        checks=summary.config["checks"],
        samples=config.samples,
        dims=list(config.dims),
        family=config.family,
        master_seed=config.master_seed,
    )
    details_path = out / DETAILS_FILE
    try:
        details = open(details_path, "w", encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write details: {e}", path=str(details_path)) from e

    with details:
        for result in _results(config, _tasks(config)):
            report = result["report"]
            details.write(json.dumps(report) + "\n")
            inequality_id = report["inequality_id"]
            tally = summary.tallies[inequality_id]
            verdict = report["verdict"]
            setattr(tally, verdict, getattr(tally, verdict) + 1)
            if "error" in report["extras"]:
                tally.errors += 1
            gap = report["gap"]
            if isinstance(gap, float):
                tally.min_gap = min(tally.min_gap, gap)
            if report["extras"].get("certified") is True:
                tally.certified += 1
            track_verdict(inequality_id, verdict, gap if isinstance(gap, float) else math.nan)

            if verdict == Verdict.VIOLATED.value and report["proved"]:
                logger.error("Proved statement reported violated", inequality=inequality_id, gap=gap)
                summary.invariant_violations.append(
                    {"inequality_id": inequality_id, "instance_digest": report["instance_digest"], "gap": gap}
                )
            elif verdict != Verdict.HOLDS.value:
                logger.info("Verdict", inequality=inequality_id, verdict=verdict, gap=gap)

            candidate = result["candidate"]
            if candidate is not None:
                store.append(candidate)
                tally.candidates += 1
                summary.candidates.append(
                    {
                        "inequality_id": inequality_id,
                        "sample_index": report["instance_digest"]["sample_index"],
                        "gap": candidate["report"]["gap"],
                    }
                )

    summary.wall_time = time.perf_counter() - started
    write_summary_csv(summary, out / SUMMARY_FILE)
    logger.info(
        "Campaign finished",
        mode=config.mode,
        wall_time=round(summary.wall_time, 3),
        candidates=len(summary.candidates),
        invariant_violations=len(summary.invariant_violations),
    )
    if summary.invariant_violations:
        raise InvariantViolation(
            "a proved inequality was reported violated",
            violations=summary.invariant_violations,
        )
    return summary


@with_error_tracking(context={"component": "campaign"})
def run_campaign(config: CampaignConfig) -> CampaignSummary:
    """
    Run every configured check on ``samples`` seeded instances.

    Raises:
        InvalidConfig: bad configuration
        IoFailure: output files or the store cannot be written
        InvariantViolation: a proved statement came back violated (outputs are still written)
    """
    with LogContext(operation=config.mode, campaign_id=f"seed-{config.master_seed}"):
        return _execute(config)


@with_error_tracking(context={"component": "hunt"})
def hunt(config: CampaignConfig) -> CampaignSummary:
    """Campaign restricted to conjecture checks; surviving candidates are persisted."""
    config.mode = MODE_HUNT
    with LogContext(operation=MODE_HUNT, campaign_id=f"seed-{config.master_seed}"):
        return _execute(config)


@dataclass(frozen=True)
class SweepRow:
    n: int
    typical_mass: float
    shell_count: int
    window_count: int
    hoeffding_bound: float
    path: str


def typicality_sweep(rho, sigma, delta: float, n_list: Sequence[int], exact: bool = None) -> list[SweepRow]:
    """
    Typical mass, shell counts and the Hoeffding bound for each n.

    Raises:
        DimensionCap: exact=False and d^n exceeds the dense cap
    """
    rows = []
    for n in n_list:
        tp = typical_projector(rho, sigma, delta, n, exact=exact)
        shells = eigenvalue_shells(sigma, n, rho, delta)
        rows.append(
            SweepRow(
                n=int(n),
                typical_mass=typical_mass(tp, rho),
                shell_count=shells.shell_count,
                window_count=shells.window_count,
                hoeffding_bound=hoeffding_bound(rho, sigma, delta, n),
                path=tp.path,
            )
        )
        logger.debug("Typicality point", n=n, mass=rows[-1].typical_mass, path=tp.path)
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                data = asdict(row)
                data["typical_mass"] = repr(row.typical_mass)
                data["hoeffding_bound"] = repr(row.hoeffding_bound)
                writer.writerow(data)
    except OSError as e:
        raise IoFailure(f"cannot write sweep: {e}", path=str(path)) from e


def optimize_samples(
    master_seed: int,
    samples: int,
    dims: Sequence[int],
    family: str = "random",
    budget: OptimizerBudget = None,
) -> list[InequalityReport]:
    """Rotated channel-monotonicity reports for ``samples`` seeded channel instances."""
    if samples < 1:
        raise InvalidConfig("samples must be >= 1", samples=samples)
    reports = []
    with LogContext(operation="petz-optimize", campaign_id=f"seed-{master_seed}"):
        for sample_index in range(samples):
            task = _Task(InequalityId.MONO_CHANNEL_ROTATED, 0, sample_index)
            instance = sample_instance(task.inequality_id, family, dims, seed=_instance_seed(master_seed, sample_index, 0))
            report = run_check(task.inequality_id, instance, budget, [int(master_seed), sample_index])
            report.instance_digest.update(_provenance(master_seed, family, dims, task))
            track_verdict(task.inequality_id.value, report.verdict.value, report.gap)
            reports.append(report)
    return reports
