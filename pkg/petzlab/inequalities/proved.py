"""
Checkers for proved relative-entropy inequalities.

Plain forms (monotonicity under a channel and under partial trace, joint
convexity, strong subadditivity, concavity of conditional entropy) never have a
remainder. The rotated forms search for the unitaries whose existence the
theorems guarantee; an uncertified search is inconclusive, not a violation.
"""

import math

import numpy as np

from observability import get_logger

from ..channels import QuantumChannel, apply, partial_trace_channel
from ..config import get_config
from ..entropic import cmi, cond_entropy, finite_rel_entropy, rel_entropy, root_fidelity
from ..opmath import (
    SpaceShape,
    as_matrix,
    dagger,
    embed,
    mat_func,
    max_abs,
    partial_trace,
    require_positive_definite,
)
from ..recovery import (
    OptimizerBudget,
    RotationWitness,
    certification_threshold,
    checked_marginal,
    maximize_over_unitaries,
    optimize_rotation,
    petz_map,
    petz_partial_trace,
)
from ..states import Seed
from .instances import BipartiteInstance, ChannelInstance, EnsembleInstance, JointInstance, TripartiteInstance
from .report import InequalityId, InequalityReport, RemainderKind, make_report

logger = get_logger(__name__)


def check_mono_channel(instance: ChannelInstance) -> InequalityReport:
    N = instance.channel
    return make_report(
        InequalityId.MONO_CHANNEL,
        lhs=rel_entropy(instance.rho, instance.sigma).value,
        rhs=rel_entropy(apply(N, instance.rho), apply(N, instance.sigma)).value,
        remainder_kind=RemainderKind.NONE,
    )


def check_mono_pt(instance: BipartiteInstance) -> InequalityReport:
    shape = instance.shape
    b = shape.labels[1]
    return make_report(
        InequalityId.MONO_PT,
        lhs=rel_entropy(instance.rho, instance.sigma).value,
        rhs=rel_entropy(partial_trace(instance.rho, shape, [b]), partial_trace(instance.sigma, shape, [b])).value,
        remainder_kind=RemainderKind.NONE,
    )


def check_joint_convexity(instance: JointInstance) -> InequalityReport:
    terms = [rel_entropy(r, s).value for r, s in zip(instance.rhos, instance.sigmas)]
    return make_report(
        InequalityId.JOINT_CONVEXITY,
        lhs=float(sum(p * t for p, t in zip(instance.probs, terms) if p > 0)),
        rhs=rel_entropy(instance.rho_bar(), instance.sigma_bar()).value,
        remainder_kind=RemainderKind.NONE,
    )


def check_ssa(instance: TripartiteInstance) -> InequalityReport:
    return make_report(
        InequalityId.SSA,
        lhs=cmi(instance.omega, instance.shape),
        rhs=0.0,
        remainder_kind=RemainderKind.NONE,
    )


def check_concavity(instance: EnsembleInstance) -> InequalityReport:
    e = instance.ensemble
    shape = instance.shape
    members = [cond_entropy(m.matrix, shape) for m in e.members]
    return make_report(
        InequalityId.CONCAVITY,
        lhs=cond_entropy(e.average(), shape),
        rhs=float(sum(p * h for p, h in zip(e.probs, members))),
        remainder_kind=RemainderKind.NONE,
    )


def _rotated_report(
    inequality_id: InequalityId,
    rho: np.ndarray,
    sigma: np.ndarray,
    channel: QuantumChannel,
    petz: QuantumChannel,
    budget: OptimizerBudget,
    seed: Seed,
) -> InequalityReport:
    delta_d = finite_rel_entropy(rho, sigma) - rel_entropy(apply(channel, rho), apply(channel, sigma)).value
    witness = optimize_rotation(rho, sigma, channel, budget=budget, seed=seed, petz=petz)
    fidelity = witness.achieved_root_fidelity**2
    bound = math.inf if fidelity <= 0.0 else -math.log2(fidelity)
    petz_fidelity = root_fidelity(rho, apply(petz, apply(channel, rho)))
    report = make_report(
        inequality_id,
        lhs=delta_d,
        rhs=bound,
        remainder_kind=RemainderKind.NEG_LOG_F,
        witness=witness,
        extras={
            "delta_d": delta_d,
            "target": witness.target_fidelity,
            "achieved": witness.achieved_root_fidelity,
            "certified": witness.certified,
            "restart0_value": witness.optimizer_trace[0][2] if witness.optimizer_trace else math.nan,
            "petz_fidelity": petz_fidelity,
        },
    )
    if not witness.certified:
        logger.info("Rotated check inconclusive", inequality=inequality_id.value, delta_d=delta_d, achieved=fidelity)
    return report


def check_mono_channel_rotated(
    instance: ChannelInstance, budget: OptimizerBudget = None, seed: Seed = 0
) -> InequalityReport:
    """
    D(rho||sigma) - D(N rho||N sigma) >= -log2 F(rho, V R(U N(rho) U^dagger) V^dagger)
    for a searched witness (U, V).

    Raises:
        SupportViolation: D(rho||sigma) is infinite or N(sigma) is singular
    """
    rho = as_matrix(instance.rho)
    sigma = as_matrix(instance.sigma)
    N = instance.channel
    require_positive_definite(apply(N, sigma), "N(sigma)")
    return _rotated_report(InequalityId.MONO_CHANNEL_ROTATED, rho, sigma, N, petz_map(sigma, N), budget, seed)


def check_mono_pt_rotated(
    instance: BipartiteInstance, budget: OptimizerBudget = None, seed: Seed = 0
) -> InequalityReport:
    """
    Rotated-Petz refinement of monotonicity under Tr_A, with the conditional
    Petz channel X_B -> sigma_AB^{1/2} sigma_B^{-1/2} X_B sigma_B^{-1/2} sigma_AB^{1/2}.

    Raises:
        SupportViolation: D(rho_AB||sigma_AB) is infinite
        SingularMarginal: sigma_B is singular
    """
    shape = instance.shape
    rho = as_matrix(instance.rho)
    sigma = as_matrix(instance.sigma)
    traced = [shape.labels[0]]
    channel = partial_trace_channel(shape, traced)
    petz = petz_partial_trace(sigma, shape, traced=traced)
    return _rotated_report(InequalityId.MONO_PT_ROTATED, rho, sigma, channel, petz, budget, seed)


def _alt_map(sqrt_ab: np.ndarray, inv_sqrt_b: np.ndarray, shape: SpaceShape, U: np.ndarray, V: np.ndarray, X: np.ndarray):
    b = shape.labels[1]
    inner = embed(U @ inv_sqrt_b @ X @ inv_sqrt_b @ dagger(U), shape, [b])
    return sqrt_ab @ V @ inner @ dagger(V) @ sqrt_ab


def alt_bound_diagnostic(
    instance: BipartiteInstance, budget: OptimizerBudget = None, seed: Seed = 0
) -> InequalityReport:
    """
    Evaluate the completely positive map
    X_B -> sigma_AB^{1/2} V (U sigma_B^{-1/2} X sigma_B^{-1/2} U^dagger (x) I_A) V^dagger sigma_AB^{1/2}
    at searched unitaries U (on B) and V (on AB).

    The map need not be trace preserving; the traces of its outputs are reported.
    At U = V = I it returns sigma_AB from sigma_B.
    """
    budget = OptimizerBudget.from_config() if budget is None else budget
    shape = instance.shape
    b = shape.labels[1]
    rho = as_matrix(instance.rho)
    sigma = as_matrix(instance.sigma)
    rho_b = partial_trace(rho, shape, [b])
    sigma_b = checked_marginal(sigma, shape, [b])
    delta_d = finite_rel_entropy(rho, sigma) - rel_entropy(rho_b, sigma_b).value

    sqrt_ab = mat_func(sigma, "sqrt")
    inv_sqrt_b = mat_func(sigma_b, "inv_sqrt")
    target = certification_threshold(delta_d)
    cert_tol = get_config().cert_tol

    def objective(unitaries):
        U, V = unitaries
        return root_fidelity(rho, _alt_map(sqrt_ab, inv_sqrt_b, shape, U, V, rho_b))

    result = maximize_over_unitaries(
        objective,
        [shape.dim_of(b), shape.total_dim],
        budget,
        seed,
        stop_at=math.sqrt(max(target - cert_tol, 0.0)),
    )
    U, V = result.unitaries
    achieved = result.best_value
    witness = RotationWitness(
        u_out=U,
        v_in=V,
        achieved_root_fidelity=float(achieved),
        certified=bool(achieved**2 >= target - cert_tol),
        optimizer_trace=result.trace,
        target_fidelity=float(target),
    )
    identity_b = np.eye(shape.dim_of(b))
    identity_ab = np.eye(shape.total_dim)
    rho_output = _alt_map(sqrt_ab, inv_sqrt_b, shape, U, V, rho_b)
    sigma_output = _alt_map(sqrt_ab, inv_sqrt_b, shape, U, V, sigma_b)
    recovery_error = max_abs(_alt_map(sqrt_ab, inv_sqrt_b, shape, identity_b, identity_ab, sigma_b) - sigma)

    fidelity = achieved**2
    return make_report(
        InequalityId.ALT_BOUND,
        lhs=delta_d,
        rhs=math.inf if fidelity <= 0.0 else -math.log2(fidelity),
        remainder_kind=RemainderKind.NEG_LOG_F,
        witness=witness,
        extras={
            "delta_d": delta_d,
            "target": float(target),
            "achieved": float(achieved),
            "certified": witness.certified,
            "trace_rho_output": float(np.real(np.trace(rho_output))),
            "trace_sigma_output": float(np.real(np.trace(sigma_output))),
            "sigma_recovery_error": recovery_error,
        },
    )
