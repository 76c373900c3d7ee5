"""
Fidelity lemmas used by the rotated-Petz proofs.

* b2: D(rho||sigma) >= -2 log2( sqrt F(rho, sigma) / Tr rho ), with
  D(rho||sigma) = Tr rho (log2 rho - log2 sigma) / Tr rho for unnormalized rho
* b6: sqrt F(rho, W sigma W^dagger) = sqrt F(W^dagger rho W, sigma)
* b7: sum_d sqrt F(W_d^dagger rho W_d, sigma) >= sqrt F(rho, sigma) when sum_d W_d = I

All three take nonnegative (not necessarily normalized) operators.
"""

import math

import numpy as np

from ..config import get_config
from ..entropic import rel_entropy, root_fidelity
from ..errors import FamilyNotResolution, InvalidConfig, ShapeMismatch
from ..opmath import as_matrix, dagger, max_abs
from ..states import validate_psd
from .instances import LemmaInstance
from .report import InequalityId, InequalityReport, RemainderKind, make_report

RESOLUTION_TOL = 1e-10
FIDELITY_UNIT = "root_fidelity"

LEMMAS = {
    "B2": InequalityId.LEMMA_B2,
    "B6": InequalityId.LEMMA_B6,
    "B7": InequalityId.LEMMA_B7,
}


def _lemma_id(which) -> InequalityId:
    if isinstance(which, InequalityId):
        return which
    key = str(which).upper().replace("LEMMA_", "")
    if key in LEMMAS:
        return LEMMAS[key]
    try:
        return InequalityId(str(which).lower())
    except ValueError:
        raise InvalidConfig(f"unknown lemma: {which}", lemmas=sorted(LEMMAS)) from None


def check_divergence_fidelity(rho, sigma) -> InequalityReport:
    """The divergence is normalized by Tr rho; the raw trace functional is kept in the extras."""
    R = validate_psd(rho).matrix
    S = validate_psd(sigma).matrix
    trace = float(np.real(np.trace(R)))
    raw = rel_entropy(R, S).value
    divergence = raw / trace
    sqrt_f = root_fidelity(R, S)
    bound = math.inf if sqrt_f <= 0.0 else -2.0 * math.log2(sqrt_f / trace)
    return make_report(
        InequalityId.LEMMA_B2,
        lhs=divergence,
        rhs=bound,
        remainder_kind=RemainderKind.NONE,
        extras={"root_fidelity": sqrt_f, "trace_rho": trace, "unnormalized_divergence": raw},
    )


def check_conjugation_symmetry(rho, sigma, W) -> InequalityReport:
    """Equality check: lhs is -|left - right| relative to max(1, left), rhs 0."""
    R = validate_psd(rho).matrix
    S = validate_psd(sigma).matrix
    W = as_matrix(W)
    if W.shape != R.shape:
        raise ShapeMismatch("W must act on the space of rho", w_shape=list(W.shape), rho_dim=R.shape[0])
    left = root_fidelity(R, W @ S @ dagger(W))
    right = root_fidelity(dagger(W) @ R @ W, S)
    difference = abs(left - right)
    return make_report(
        InequalityId.LEMMA_B6,
        lhs=-difference / max(1.0, left),
        rhs=0.0,
        remainder_kind=RemainderKind.NONE,
        extras={"left": left, "right": right, "abs_difference": difference},
        verdict_tol=get_config().identity_tol,
        unit=FIDELITY_UNIT,
    )


def check_fidelity_decomposition(rho, sigma, family) -> InequalityReport:
    """
    Raises:
        FamilyNotResolution: sum of the family differs from the identity by more than 1e-10
    """
    R = validate_psd(rho).matrix
    S = validate_psd(sigma).matrix
    family = [as_matrix(W) for W in family]
    if not family:
        raise FamilyNotResolution("operator family is empty")
    residual = max_abs(sum(family) - np.eye(R.shape[0]))
    if residual > RESOLUTION_TOL:
        raise FamilyNotResolution("operator family does not sum to the identity", residual=residual)
    terms = [root_fidelity(dagger(W) @ R @ W, S) for W in family]
    return make_report(
        InequalityId.LEMMA_B7,
        lhs=float(sum(terms)),
        rhs=root_fidelity(R, S),
        remainder_kind=RemainderKind.NONE,
        extras={"terms": [float(t) for t in terms], "family_size": len(family)},
        unit=FIDELITY_UNIT,
    )


def check_fr_lemmas(which, instance: LemmaInstance) -> InequalityReport:
    """
    Evaluate one fidelity lemma on a lemma instance.

    Args:
        which: "B2", "B6", "B7" or the matching inequality id
        instance: rho, sigma and the operator family (one W for B6)

    Raises:
        FamilyNotResolution: B7 family does not resolve the identity
        InvalidConfig: unknown lemma, or B6 without an operator
    """
    lemma = _lemma_id(which)
    if lemma == InequalityId.LEMMA_B2:
        return check_divergence_fidelity(instance.rho, instance.sigma)
    if lemma == InequalityId.LEMMA_B6:
        if not instance.family:
            raise InvalidConfig("conjugation check needs an operator W")
        return check_conjugation_symmetry(instance.rho, instance.sigma, instance.family[0])
    if lemma == InequalityId.LEMMA_B7:
        return check_fidelity_decomposition(instance.rho, instance.sigma, instance.family)
    raise InvalidConfig(f"not a lemma: {lemma.value}", lemmas=sorted(LEMMAS))
