"""
Equivalence-reduction identities and the interpolation ingredients.

The reductions are exact algebraic identities linking the five remainder
statements; each is evaluated both ways and the two numbers returned. Report
wrappers turn a deviation into an equality check: lhs = -|left - right|, rhs 0.

Interpolation quantities use xi_AB = (sigma_AB + x rho_AB) / (1 + x) with the
conditional Petz output xi^{1/2} xi_B^{-1/2} (.) xi_B^{-1/2} xi^{1/2}.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from observability import get_logger

from ..channels import apply, partial_trace_channel
from ..config import get_config
from ..entropic import cmi, cond_entropy, cond_entropy_homogeneous, rel_entropy, root_fidelity
from ..errors import InvalidConfig, NegativeParameter, ShapeMismatch, SingularState, SupportViolation
from ..opmath import (
    SpaceShape,
    as_matrix,
    default_support_tol,
    eigh,
    embed,
    mat_func,
    max_abs,
    partial_trace,
)
from ..recovery import checked_marginal, petz_map, petz_partial_trace_apply
from ..states import Ensemble, cq_state, product_state
from .instances import EnsembleInstance, TripartiteInstance
from .report import InequalityId, InequalityReport, RemainderKind, make_report

logger = get_logger(__name__)


@dataclass(frozen=True)
class SsaSubstitution:
    """Both forms of the recovered omega_ABC and both forms of I(A;B|C)."""

    general_output: np.ndarray
    conditional_output: np.ndarray
    map_deviation: float
    cmi_value: float
    cmi_via_divergences: float

    @property
    def cmi_deviation(self) -> float:
        return abs(self.cmi_value - self.cmi_via_divergences)


def _check_state(M: np.ndarray, shape: SpaceShape) -> None:
    if M.shape[0] != shape.total_dim:
        raise ShapeMismatch("state does not match shape", operator_dim=M.shape[0], shape_dims=shape.dims)


def conditional_petz_output(state_ab, shape: SpaceShape, X_b, traced: Sequence[str] = None) -> np.ndarray:
    """state_AB^{1/2} state_B^{-1/2} X_B state_B^{-1/2} state_AB^{1/2} (traced factor defaults to the first)."""
    return petz_partial_trace_apply(state_ab, shape, X_b, traced=traced)


def ssa_recovery(omega, shape: SpaceShape, a: str = None, b: str = None, c: str = None):
    """
    omega_AC^{1/2} omega_C^{-1/2} omega_BC omega_C^{-1/2} omega_AC^{1/2} on the (a, b, c) factors.

    Returns:
        (omega restricted to a, b, c; the recovered operator; the sub-shape both live on)

    Raises:
        SingularMarginal: omega_C is not positive definite
    """
    labels = shape.labels
    a = labels[0] if a is None else a
    b = labels[1] if b is None else b
    c = labels[2] if c is None else c
    M = as_matrix(omega)
    _check_state(M, shape)
    sub = shape.restrict([a, b, c])
    w = partial_trace(M, shape, keep=[a, b, c])
    ac = sub.restrict([a, c]).labels
    bc = sub.restrict([b, c]).labels

    w_c = checked_marginal(w, sub, [c])
    sqrt_ac = embed(mat_func(partial_trace(w, sub, keep=ac), "sqrt"), sub, ac)
    inv_sqrt_c = embed(mat_func(w_c, "inv_sqrt"), sub, [c])
    w_bc = embed(partial_trace(w, sub, keep=bc), sub, bc)
    recovered = sqrt_ac @ inv_sqrt_c @ w_bc @ inv_sqrt_c @ sqrt_ac
    return w, recovered, sub


def _ensemble_shape(e: Ensemble, shape: SpaceShape = None) -> SpaceShape:
    shape = e.shape if shape is None else shape
    if len(shape.labels) != 2 or shape.total_dim != e.members[0].dim:
        raise ShapeMismatch("ensemble members must be bipartite states", shape_dims=shape.dims)
    return shape


def _unused_label(shape: SpaceShape, preferred: str = "X") -> str:
    label = preferred
    while label in shape.labels:
        label += "'"
    return label


def reduction_cq_identity(e: Ensemble, shape: SpaceShape = None) -> tuple[float, float]:
    """
    H(A|B)_avg - sum_x p(x) H(A|B)_x against I(A;X|B) of the cq-state.

    Returns:
        (conditional entropy difference, conditional mutual information)
    """
    shape = _ensemble_shape(e, shape)
    a, b = shape.labels
    average = e.average()
    left = cond_entropy(average, shape, a, b) - sum(
        p * cond_entropy(member.matrix, shape, a, b) for p, member in zip(e.probs, e.members)
    )
    x = _unused_label(shape)
    theta, theta_shape = cq_state(Ensemble(e.probs, e.members, shape), label=x)
    right = cmi(theta.matrix, theta_shape, a=a, b=x, c=b)
    return float(left), float(right)


def ensemble_petz_fidelities(e: Ensemble, shape: SpaceShape = None) -> list[float]:
    """sqrt F(rho^x_AB, avg_AB^{1/2} avg_B^{-1/2} rho^x_B avg_B^{-1/2} avg_AB^{1/2}) per member."""
    shape = _ensemble_shape(e, shape)
    a, b = shape.labels
    average = e.average()
    values = []
    for member in e.members:
        rho_b = partial_trace(member.matrix, shape, keep=[b])
        recovered = conditional_petz_output(average, shape, rho_b, traced=[a])
        values.append(root_fidelity(member.matrix, recovered))
    return values


def reduction_fidelity_blocks(e: Ensemble, shape: SpaceShape = None) -> tuple[float, float]:
    """
    sqrt F of the cq-state against its conditional recovery from X B, against the
    probability-weighted sum of per-member conditional fidelities.

    The cq-state is recovered with theta_AB (x) I_X, theta_B lifted to X A B
    and theta_XB (x) I_A, which is block diagonal in X.

    Returns:
        (cq-state root fidelity, weighted member sum)
    """
    shape = _ensemble_shape(e, shape)
    a, b = shape.labels
    x = _unused_label(shape)
    theta, theta_shape = cq_state(Ensemble(e.probs, e.members, shape), label=x)
    restricted, recovered, _ = ssa_recovery(theta.matrix, theta_shape, a=a, b=x, c=b)
    left = root_fidelity(restricted, recovered)
    right = float(sum(p * f for p, f in zip(e.probs, ensemble_petz_fidelities(e, shape))))
    return float(left), right


def reduction_ssa_substitution(omega, shape: SpaceShape) -> SsaSubstitution:
    """
    Petz map of (omega_AC (x) omega_B, Tr_A) applied to omega_BC against the
    conditional form omega_AC^{1/2} omega_C^{-1/2} omega_BC omega_C^{-1/2} omega_AC^{1/2},
    plus I(A;B|C) against D(omega_ABC||omega_AC (x) omega_B) - D(omega_BC||omega_C (x) omega_B).

    Raises:
        SingularMarginal: omega_B or omega_C is not positive definite
        SupportViolation: omega_ABC leaks outside supp(omega_AC (x) omega_B)
    """
    labels = shape.labels
    if len(labels) != 3:
        raise ShapeMismatch("substitution needs a tripartite shape", labels=labels)
    a, b, c = labels
    w, conditional, sub = ssa_recovery(omega, shape, a, b, c)
    ac = sub.restrict([a, c]).labels
    bc_shape = sub.restrict([b, c])

    w_ac = partial_trace(w, sub, keep=ac)
    w_b = checked_marginal(w, sub, [b])
    w_c = partial_trace(w, sub, keep=[c])
    w_bc = partial_trace(w, sub, keep=bc_shape.labels)
    sigma = product_state({",".join(ac): w_ac, b: w_b}, sub).matrix
    reference_bc = product_state({c: w_c, b: w_b}, bc_shape).matrix

    channel = partial_trace_channel(sub, [a])
    general = apply(petz_map(sigma, channel), w_bc)

    value = cmi(w, sub, a, b, c)
    outer = rel_entropy(w, sigma)
    if not outer.is_finite:
        raise SupportViolation("omega leaks outside supp(omega_AC (x) omega_B)", mass=outer.support_violation_mass)
    via_divergences = outer.value - rel_entropy(w_bc, reference_bc).value
    return SsaSubstitution(
        general_output=general,
        conditional_output=conditional,
        map_deviation=max_abs(general - conditional),
        cmi_value=float(value),
        cmi_via_divergences=float(via_divergences),
    )


def _interpolated(sigma: np.ndarray, rho: np.ndarray, x: float) -> np.ndarray:
    return (sigma + x * rho) / (1.0 + x)


def _require_invertible_state(M: np.ndarray, name: str) -> None:
    lam = eigh(M).eigenvalues
    tol = default_support_tol(lam)
    if lam[-1] <= tol:
        raise SingularState(f"{name} must be positive definite", min_eigenvalue=float(lam[-1]), support_tol=tol)


def _interpolation_fidelities(S: np.ndarray, R: np.ndarray, shape: SpaceShape, x: float) -> tuple[float, float]:
    a, b = shape.labels[0], shape.labels[1]
    xi = _interpolated(S, R, x)
    sigma_b = partial_trace(S, shape, keep=[b])
    rho_b = partial_trace(R, shape, keep=[b])
    f_sigma = root_fidelity(S, conditional_petz_output(xi, shape, sigma_b, traced=[a]))
    f_rho = root_fidelity(R, conditional_petz_output(xi, shape, rho_b, traced=[a]))
    return f_sigma, f_rho


def fd_root_fidelity_slope(sigma_ab, rho_ab, shape: SpaceShape, h: float) -> float:
    """
    One-sided slope (f(h) - f(0)) / h of f(x) = sqrt F(sigma_AB, xi^{1/2} xi_B^{-1/2} sigma_B xi_B^{-1/2} xi^{1/2}).

    f is maximal (equal to 1) at x = 0, so the slope is O(h).

    Raises:
        SingularState: sigma_AB is not positive definite
        NegativeParameter: h <= 0
    """
    if not h > 0:
        raise NegativeParameter("finite-difference step must be positive", h=h)
    S = as_matrix(sigma_ab)
    R = as_matrix(rho_ab)
    _check_state(S, shape)
    _check_state(R, shape)
    _require_invertible_state(S, "sigma_AB")
    f0, _ = _interpolation_fidelities(S, R, shape, 0.0)
    fh, _ = _interpolation_fidelities(S, R, shape, h)
    return float((fh - f0) / h)


def interpolation_remainder(sigma_ab, rho_ab, shape: SpaceShape, x: float) -> float:
    """
    2(1 - [sqrt F(sigma, P_xi(sigma_B)) / (x + 1) + x sqrt F(rho, P_xi(rho_B)) / (x + 1)])
    with P_xi the conditional Petz output of xi_AB.
    """
    if x < 0:
        raise NegativeParameter("interpolation parameter must be nonnegative", x=x)
    S = as_matrix(sigma_ab)
    R = as_matrix(rho_ab)
    _check_state(S, shape)
    _check_state(R, shape)
    f_sigma, f_rho = _interpolation_fidelities(S, R, shape, x)
    return float(2.0 * (1.0 - (f_sigma + x * f_rho) / (x + 1.0)))


def cond_entropy_slope(sigma_ab, rho_ab, shape: SpaceShape, h: float) -> tuple[float, float]:
    """
    Forward difference of x -> H(A|B) at sigma + x rho, and its closed form
    -Tr rho_AB log2 sigma_AB + Tr rho_B log2 sigma_B.

    Returns:
        (finite-difference slope, analytic slope)
    """
    if not h > 0:
        raise NegativeParameter("finite-difference step must be positive", h=h)
    S = as_matrix(sigma_ab)
    R = as_matrix(rho_ab)
    _check_state(S, shape)
    _require_invertible_state(S, "sigma_AB")
    a, b = shape.labels[0], shape.labels[1]
    fd = (cond_entropy_homogeneous(S + h * R, shape, a, b) - cond_entropy_homogeneous(S, shape, a, b)) / h

    sigma_b = partial_trace(S, shape, keep=[b])
    rho_b = partial_trace(R, shape, keep=[b])
    analytic = -np.real(np.trace(R @ mat_func(S, "log2"))) + np.real(np.trace(rho_b @ mat_func(sigma_b, "log2")))
    return float(fd), float(analytic)


def homogeneity_gap(G, shape: SpaceShape, x: float) -> float:
    """H(A|B) at x G minus x H(A|B) at G; zero for every x > 0."""
    if not x > 0:
        raise NegativeParameter("scale must be positive", x=x)
    M = as_matrix(G)
    a, b = shape.labels[0], shape.labels[1]
    return float(cond_entropy_homogeneous(x * M, shape, a, b) - x * cond_entropy_homogeneous(M, shape, a, b))


def _equality_report(
    inequality_id: InequalityId,
    left: float,
    right: float,
    verdict_tol: float,
    deviation: float = None,
    **extras,
) -> InequalityReport:
    deviation = abs(left - right) if deviation is None else deviation
    if deviation > verdict_tol:
        logger.warning("Reduction identity drifted", inequality=inequality_id.value, deviation=deviation)
    return make_report(
        inequality_id,
        lhs=-deviation,
        rhs=0.0,
        remainder_kind=RemainderKind.NONE,
        extras={"left": float(left), "right": float(right), **extras},
        verdict_tol=verdict_tol,
    )


def check_reduction(inequality_id: InequalityId, instance) -> InequalityReport:
    """Equality report for one reduction identity."""
    inequality_id = InequalityId(inequality_id)
    config = get_config()
    if inequality_id == InequalityId.REDUCTION_CQ:
        left, right = reduction_cq_identity(_as_ensemble(instance).ensemble)
        return _equality_report(inequality_id, left, right, config.identity_tol)
    if inequality_id == InequalityId.REDUCTION_BLOCKS:
        left, right = reduction_fidelity_blocks(_as_ensemble(instance).ensemble)
        return _equality_report(inequality_id, left, right, config.verdict_tol)
    if inequality_id == InequalityId.REDUCTION_SSA:
        if not isinstance(instance, TripartiteInstance):
            raise InvalidConfig("substitution check needs a tripartite instance")
        result = reduction_ssa_substitution(instance.omega, instance.shape)
        return _equality_report(
            inequality_id,
            result.cmi_value,
            result.cmi_via_divergences,
            config.identity_tol,
            deviation=max(result.map_deviation, result.cmi_deviation),
            map_deviation=result.map_deviation,
        )
    raise InvalidConfig(f"not a reduction identity: {inequality_id.value}")


def _as_ensemble(instance) -> EnsembleInstance:
    if not isinstance(instance, EnsembleInstance):
        raise InvalidConfig("reduction check needs an ensemble instance")
    return instance
