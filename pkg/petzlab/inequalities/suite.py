"""
Registry of every checker, keyed by inequality id.
"""

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from observability import get_logger

from ..errors import InvalidConfig
from ..recovery import OptimizerBudget
from ..states import Seed
from . import conjectures, lemmas, proved, reductions
from .instances import INSTANCE_KIND, InstanceKind, sample_instance
from .report import InequalityId, InequalityReport, Verdict, is_proved

logger = get_logger(__name__)

CheckFn = Callable[[object, Optional[OptimizerBudget], Seed], InequalityReport]


@dataclass(frozen=True)
class CheckSpec:
    """One registered checker."""

    inequality_id: InequalityId
    kind: InstanceKind
    fn: CheckFn
    description: str

    @property
    def proved(self) -> bool:
        return is_proved(self.inequality_id)

    @property
    def uses_optimizer(self) -> bool:
        return self.inequality_id in (
            InequalityId.MONO_CHANNEL_ROTATED,
            InequalityId.MONO_PT_ROTATED,
            InequalityId.ALT_BOUND,
        )


def _plain(fn) -> CheckFn:
    return lambda instance, budget, seed: fn(instance)


def _bures(item: int) -> CheckFn:
    return lambda instance, budget, seed: conjectures.check_bures_circle(item, instance)


def _conjecture(number: int) -> CheckFn:
    return lambda instance, budget, seed: conjectures.check_conjectures(number, instance)


def _reduction(inequality_id: InequalityId) -> CheckFn:
    return lambda instance, budget, seed: reductions.check_reduction(inequality_id, instance)


def _lemma(which: str) -> CheckFn:
    return lambda instance, budget, seed: lemmas.check_fr_lemmas(which, instance)


_ENTRIES = [
    (InequalityId.MONO_CHANNEL, _plain(proved.check_mono_channel), "D(rho||sigma) >= D(N rho||N sigma)"),
    (InequalityId.MONO_PT, _plain(proved.check_mono_pt), "D(rho_AB||sigma_AB) >= D(rho_B||sigma_B)"),
    (InequalityId.JOINT_CONVEXITY, _plain(proved.check_joint_convexity), "joint convexity of relative entropy"),
    (InequalityId.SSA, _plain(proved.check_ssa), "I(A;B|C) >= 0"),
    (InequalityId.CONCAVITY, _plain(proved.check_concavity), "concavity of conditional entropy"),
    (InequalityId.MONO_CHANNEL_ROTATED, proved.check_mono_channel_rotated, "channel monotonicity, rotated Petz remainder"),
    (InequalityId.MONO_PT_ROTATED, proved.check_mono_pt_rotated, "partial-trace monotonicity, rotated Petz remainder"),
    (InequalityId.ALT_BOUND, proved.alt_bound_diagnostic, "non-trace-preserving recovery bound (report only)"),
    (InequalityId.BURES_1, _bures(1), "I(A;B|C) >= D_B^2(omega, Petz recovery)"),
    (InequalityId.BURES_2, _bures(2), "concavity with Bures remainder"),
    (InequalityId.BURES_3, _bures(3), "partial-trace monotonicity with Bures remainder"),
    (InequalityId.BURES_4, _bures(4), "joint convexity with Bures remainder"),
    (InequalityId.BURES_5, _bures(5), "channel monotonicity with Bures remainder"),
    (InequalityId.CONJ_12, _conjecture(12), "channel monotonicity, plain Petz -log F remainder"),
    (InequalityId.CONJ_13, _conjecture(13), "partial-trace monotonicity, plain Petz -log F remainder"),
    (InequalityId.CONJ_14, _conjecture(14), "joint convexity, plain Petz -log F remainder"),
    (InequalityId.CONJ_15, _conjecture(15), "I(A;B|C), plain Petz -log F remainder"),
    (InequalityId.CONJ_16, _conjecture(16), "concavity, plain Petz -log F remainder"),
    (InequalityId.REDUCTION_CQ, _reduction(InequalityId.REDUCTION_CQ), "concavity gap equals I(A;X|B) of the cq-state"),
    (InequalityId.REDUCTION_BLOCKS, _reduction(InequalityId.REDUCTION_BLOCKS), "cq-state fidelity splits over blocks"),
    (InequalityId.REDUCTION_SSA, _reduction(InequalityId.REDUCTION_SSA), "Petz of omega_AC (x) omega_B under Tr_A"),
    (InequalityId.LEMMA_B2, _lemma("B2"), "D(rho||sigma) >= -2 log2 (sqrt F / Tr rho)"),
    (InequalityId.LEMMA_B6, _lemma("B6"), "sqrt F(rho, W sigma W^dagger) = sqrt F(W^dagger rho W, sigma)"),
    (InequalityId.LEMMA_B7, _lemma("B7"), "sum_d sqrt F(W_d^dagger rho W_d, sigma) >= sqrt F(rho, sigma)"),
]

CHECKS: dict[InequalityId, CheckSpec] = {
    inequality_id: CheckSpec(inequality_id, INSTANCE_KIND[inequality_id], fn, description)
    for inequality_id, fn, description in _ENTRIES
}


def resolve_checks(names: Optional[Iterable[str]]) -> list[InequalityId]:
    """Inequality ids from user input; None or "all" selects everything."""
    if names is None:
        return list(CHECKS)
    resolved = []
    for name in names:
        if name == "all":
            return list(CHECKS)
        try:
            resolved.append(InequalityId(name))
        except ValueError:
            raise InvalidConfig(f"unknown check: {name}", known=[i.value for i in CHECKS]) from None
    return resolved


def run_check(
    inequality_id: InequalityId,
    instance,
    budget: OptimizerBudget = None,
    seed: Seed = 0,
) -> InequalityReport:
    """Run one registered checker on an instance of the kind it consumes."""
    spec = CHECKS[InequalityId(inequality_id)]
    report = spec.fn(instance, budget, seed)
    if report.verdict == Verdict.HOLDS:
        logger.debug("Check passed", inequality=spec.inequality_id.value, gap=report.gap)
    else:
        logger.info("Check did not hold", inequality=spec.inequality_id.value, verdict=report.verdict.value, gap=report.gap)
    return report


def run_all_checks(
    family: str = "random",
    dims: Sequence[int] = (2, 2, 2),
    seed: Seed = 0,
    budget: OptimizerBudget = None,
    checks: Iterable[str] = None,
) -> tuple[list[InequalityReport], bool]:
    """
    Sample one instance per check and evaluate it.

    Returns:
        (reports, True when no proved check came back violated)
    """
    results = []
    all_passed = True
    for index, inequality_id in enumerate(resolve_checks(checks)):
        instance = sample_instance(inequality_id, family, dims, seed=[int(seed) if isinstance(seed, int) else 0, index])
        report = run_check(inequality_id, instance, budget, seed)
        results.append(report)
        if report.proved and report.verdict == Verdict.VIOLATED:
            all_passed = False
    return results, all_passed
