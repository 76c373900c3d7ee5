"""
Remainder statements with the plain (unrotated) Petz map.

Each instance kind yields a relative-entropy difference in bits and a
probability-weighted list of root fidelities between the states and their Petz
recoveries. The two remainder families read the same fidelities:

    Bures form:      lhs >= sum_x p(x) 2(1 - sqrt F_x)
    log form:        lhs >= -2 log2 sum_x p(x) sqrt F_x

    item  instance     log-form id
    1     tripartite   conj_15
    2     ensemble     conj_16
    3     bipartite    conj_13
    4     joint        conj_14
    5     channel      conj_12

Whether any of these holds is open; a violated verdict is a candidate, not a bug.
"""

import math
from dataclasses import dataclass

from ..channels import apply
from ..entropic import LN2, cmi, cond_entropy, finite_rel_entropy, rel_entropy, root_fidelity
from ..errors import InvalidConfig
from ..opmath import as_matrix, mat_func, partial_trace, require_positive_definite
from ..recovery import petz_map
from .instances import BipartiteInstance, ChannelInstance, EnsembleInstance, JointInstance, TripartiteInstance
from .reductions import conditional_petz_output, ensemble_petz_fidelities, ssa_recovery
from .report import InequalityId, InequalityReport, RemainderKind, make_report

BURES_ITEMS = {
    1: InequalityId.BURES_1,
    2: InequalityId.BURES_2,
    3: InequalityId.BURES_3,
    4: InequalityId.BURES_4,
    5: InequalityId.BURES_5,
}

CONJECTURE_ITEMS = {
    12: InequalityId.CONJ_12,
    13: InequalityId.CONJ_13,
    14: InequalityId.CONJ_14,
    15: InequalityId.CONJ_15,
    16: InequalityId.CONJ_16,
}


@dataclass(frozen=True)
class RemainderTerms:
    """Left-hand side in bits and the weighted root fidelities of the recoveries."""

    lhs: float
    weights: tuple[float, ...]
    root_fidelities: tuple[float, ...]

    def bures_sq(self) -> float:
        return float(sum(w * min(max(2.0 * (1.0 - f), 0.0), 2.0) for w, f in zip(self.weights, self.root_fidelities)))

    def neg_log_fidelity(self) -> float:
        total = float(sum(w * f for w, f in zip(self.weights, self.root_fidelities)))
        return math.inf if total <= 0.0 else -2.0 * math.log2(total)


def channel_terms(instance: ChannelInstance) -> RemainderTerms:
    """D(rho||sigma) - D(N rho||N sigma) against sqrt F(rho, R(N(rho)))."""
    rho = as_matrix(instance.rho)
    sigma = as_matrix(instance.sigma)
    N = instance.channel
    n_rho, n_sigma = apply(N, rho), apply(N, sigma)
    require_positive_definite(n_sigma, "N(sigma)")
    lhs = finite_rel_entropy(rho, sigma) - rel_entropy(n_rho, n_sigma).value
    recovered = apply(petz_map(sigma, N), n_rho)
    return RemainderTerms(lhs, (1.0,), (root_fidelity(rho, recovered),))


def bipartite_terms(instance: BipartiteInstance) -> RemainderTerms:
    """D(rho_AB||sigma_AB) - D(rho_B||sigma_B) against sqrt F(rho_AB, conditional Petz output of rho_B)."""
    shape = instance.shape
    a, b = shape.labels[0], shape.labels[1]
    rho = as_matrix(instance.rho)
    sigma = as_matrix(instance.sigma)
    rho_b = partial_trace(rho, shape, [b])
    lhs = finite_rel_entropy(rho, sigma) - rel_entropy(rho_b, partial_trace(sigma, shape, [b])).value
    recovered = conditional_petz_output(sigma, shape, rho_b, traced=[a])
    return RemainderTerms(lhs, (1.0,), (root_fidelity(rho, recovered),))


def tripartite_terms(instance: TripartiteInstance) -> RemainderTerms:
    """I(A;B|C) against sqrt F(omega_ABC, omega_AC^{1/2} omega_C^{-1/2} omega_BC omega_C^{-1/2} omega_AC^{1/2})."""
    omega, recovered, _ = ssa_recovery(instance.omega, instance.shape)
    return RemainderTerms(cmi(instance.omega, instance.shape), (1.0,), (root_fidelity(omega, recovered),))


def ensemble_terms(instance: EnsembleInstance) -> RemainderTerms:
    """H(A|B) of the average minus the average H(A|B), against the per-member conditional recoveries."""
    e = instance.ensemble
    shape = instance.shape
    lhs = cond_entropy(e.average(), shape) - sum(p * cond_entropy(m.matrix, shape) for p, m in zip(e.probs, e.members))
    return RemainderTerms(float(lhs), tuple(float(p) for p in e.probs), tuple(ensemble_petz_fidelities(e, shape)))


def joint_terms(instance: JointInstance) -> RemainderTerms:
    """sum_x p D(rho_x||sigma_x) - D(avg rho||avg sigma) against sigma_x^{1/2} avg_sigma^{-1/2} avg_rho avg_sigma^{-1/2} sigma_x^{1/2}."""
    rho_bar = instance.rho_bar()
    sigma_bar = instance.sigma_bar()
    require_positive_definite(sigma_bar, "average sigma")
    lhs = sum(p * finite_rel_entropy(r, s) for p, r, s in zip(instance.probs, instance.rhos, instance.sigmas) if p > 0)
    lhs -= rel_entropy(rho_bar, sigma_bar).value

    inv_sqrt_bar = mat_func(sigma_bar, "inv_sqrt")
    middle = inv_sqrt_bar @ rho_bar @ inv_sqrt_bar
    fidelities = []
    for r, s in zip(instance.rhos, instance.sigmas):
        sqrt_s = mat_func(s, "sqrt")
        fidelities.append(root_fidelity(r, sqrt_s @ middle @ sqrt_s))
    return RemainderTerms(float(lhs), tuple(float(p) for p in instance.probs), tuple(fidelities))


_BURES_TERMS = {
    1: (TripartiteInstance, tripartite_terms),
    2: (EnsembleInstance, ensemble_terms),
    3: (BipartiteInstance, bipartite_terms),
    4: (JointInstance, joint_terms),
    5: (ChannelInstance, channel_terms),
}

_CONJECTURE_TERMS = {
    12: (ChannelInstance, channel_terms),
    13: (BipartiteInstance, bipartite_terms),
    14: (JointInstance, joint_terms),
    15: (TripartiteInstance, tripartite_terms),
    16: (EnsembleInstance, ensemble_terms),
}


def _terms(table: dict, key: int, instance) -> RemainderTerms:
    expected, fn = table[key]
    if not isinstance(instance, expected):
        raise InvalidConfig(
            f"wrong instance kind for this check: expected {expected.__name__}",
            found=type(instance).__name__,
        )
    return fn(instance)


def _item_number(value, table: dict, prefix: str) -> int:
    if isinstance(value, InequalityId):
        value = value.value
    text = str(value).lower().replace(prefix, "")
    try:
        number = int(text)
    except ValueError:
        raise InvalidConfig(f"unknown check: {value}", known=sorted(table)) from None
    if number not in table:
        raise InvalidConfig(f"unknown check: {value}", known=sorted(table))
    return number


def check_bures_circle(item, instance) -> InequalityReport:
    """
    Remainder statement ``item`` (1..5) with a squared Bures distance on the right.

    Both sides are compared as given (lhs in bits); the natural-log reading
    lhs * ln 2 >= D_B^2 is recorded in the extras.

    Raises:
        SupportViolation: a divergence on the left is infinite or N(sigma) is singular
        SingularMarginal: a conditional recovery needs a marginal that is not positive definite
    """
    number = _item_number(item, BURES_ITEMS, "bures_")
    terms = _terms(_BURES_TERMS, number, instance)
    rhs = terms.bures_sq()
    lhs_nats = terms.lhs * LN2
    return make_report(
        BURES_ITEMS[number],
        lhs=terms.lhs,
        rhs=rhs,
        remainder_kind=RemainderKind.BURES_SQ,
        extras={
            "lhs_nats": lhs_nats,
            "gap_nats": lhs_nats - rhs,
            "root_fidelities": list(terms.root_fidelities),
        },
    )


def check_conjectures(which, instance) -> InequalityReport:
    """
    Log-fidelity remainder statement ``which`` (12..16).

    Raises:
        SupportViolation: a divergence on the left is infinite or N(sigma) is singular
        SingularMarginal: a conditional recovery needs a marginal that is not positive definite
    """
    number = _item_number(which, CONJECTURE_ITEMS, "conj_")
    terms = _terms(_CONJECTURE_TERMS, number, instance)
    return make_report(
        CONJECTURE_ITEMS[number],
        lhs=terms.lhs,
        rhs=terms.neg_log_fidelity(),
        remainder_kind=RemainderKind.NEG_LOG_F,
        extras={"root_fidelities": list(terms.root_fidelities)},
    )


def check_petz_pt_conjecture(instance: BipartiteInstance) -> InequalityReport:
    """Partial-trace statement with identity rotations; same evaluator as 13."""
    return check_conjectures(13, instance)
