"""
Scalar entropic functionals in bits: relative entropy, entropy, conditional
entropy, conditional mutual information, root fidelity, fidelity and the
squared Bures distance.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from observability import get_logger

from .config import get_config
from .errors import ShapeMismatch, SupportViolation
from .opmath import (
    SpaceShape,
    as_matrix,
    embed,
    mat_func,
    partial_trace,
    psd_spectrum,
    default_support_tol,
    support_projector,
    trace_norm,
)

logger = get_logger(__name__)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class EntropicValue:
    """Value in bits (possibly +inf) with the mass of rho found outside supp(sigma)."""

    value: float
    support_violation_mass: float = 0.0

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return float(self.value)


def _same_dim(*ops: np.ndarray) -> None:
    dims = {op.shape for op in ops}
    if len(dims) != 1:
        raise ShapeMismatch("operators must share a dimension", shapes=sorted(dims))


def _trace_real(M: np.ndarray) -> float:
    return float(np.real(np.trace(M)))


def rel_entropy(rho, sigma) -> EntropicValue:
    """
    D(rho||sigma) = Tr{rho [log2 rho - log2 sigma]}, +inf when rho leaks outside supp(sigma).

    Mass below supp_viol_tol outside the support is projected out and reported.
    Works for any PSD rho, so unnormalized operators are accepted as well.
    """
    R = as_matrix(rho)
    S = as_matrix(sigma)
    _same_dim(R, S)
    projector = support_projector(S)
    leaked = max(_trace_real(R) - _trace_real(projector @ R), 0.0)
    if leaked > get_config().supp_viol_tol:
        return EntropicValue(value=math.inf, support_violation_mass=leaked)
    value = _trace_real(R @ mat_func(R, "log2")) - _trace_real(R @ mat_func(S, "log2"))
    return EntropicValue(value=value, support_violation_mass=leaked)


def finite_rel_entropy(rho, sigma, what: str = "relative entropy") -> float:
    """D(rho||sigma), raising SupportViolation instead of returning +inf."""
    value = rel_entropy(rho, sigma)
    if not value.is_finite:
        raise SupportViolation(f"{what}: rho is not supported on supp(sigma)", mass=value.support_violation_mass)
    return value.value


def entropy(rho) -> float:
    """H(rho) = -Tr{rho log2 rho}."""
    lam = psd_spectrum(rho).eigenvalues
    lam = lam[lam > default_support_tol(lam)]
    return float(-np.sum(lam * np.log2(lam)))


def _reduce(rho, shape: SpaceShape, labels: Sequence[str]) -> np.ndarray:
    return partial_trace(rho, shape, keep=labels)


def cond_entropy(rho_ab, shape: SpaceShape, a: str = None, b: str = None) -> float:
    """
    H(A|B) = H(AB) - H(B).

    The alternative form -D(rho_AB || I_A (x) rho_B) is evaluated alongside; a
    drift beyond self_check_tol is logged.
    """
    a = shape.labels[0] if a is None else a
    b = shape.labels[1] if b is None else b
    M = as_matrix(rho_ab)
    if M.shape[0] != shape.total_dim:
        raise ShapeMismatch("state does not match shape", operator_dim=M.shape[0], shape_dims=shape.dims)
    sub = shape.restrict([a, b])
    rho_sub = _reduce(M, shape, [a, b])
    rho_b = partial_trace(rho_sub, sub, keep=[b])

    value = entropy(rho_sub) - entropy(rho_b)
    alternative = -rel_entropy(rho_sub, embed(rho_b, sub, [b])).value
    drift = abs(value - alternative)
    if drift > get_config().self_check_tol * max(1.0, abs(value)):
        logger.warning("conditional entropy forms disagree", drift=drift, value=value)
    return value


def cond_entropy_homogeneous(G, shape: SpaceShape, a: str = None, b: str = None) -> float:
    """-D(G_AB || I_A (x) G_B), defined for any PSD G and homogeneous of degree one."""
    a = shape.labels[0] if a is None else a
    b = shape.labels[1] if b is None else b
    sub = shape.restrict([a, b])
    G_sub = _reduce(G, shape, [a, b])
    G_b = partial_trace(G_sub, sub, keep=[b])
    return -rel_entropy(G_sub, embed(G_b, sub, [b])).value


def cmi(omega, shape: SpaceShape, a: str = None, b: str = None, c: str = None) -> float:
    """
    I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C).

    Cross-checked against D(w_ABC||w_AC (x) I_B) - D(w_BC||w_C (x) I_B).
    """
    labels = shape.labels
    if len(labels) < 3 and None in (a, b, c):
        raise ShapeMismatch("conditional mutual information needs three labelled factors", labels=labels)
    a = labels[0] if a is None else a
    b = labels[1] if b is None else b
    c = labels[2] if c is None else c
    M = as_matrix(omega)
    if M.shape[0] != shape.total_dim:
        raise ShapeMismatch("state does not match shape", operator_dim=M.shape[0], shape_dims=shape.dims)

    abc = shape.restrict([a, b, c])
    w_abc = _reduce(M, shape, [a, b, c])
    w_ac = partial_trace(w_abc, abc, keep=[a, c])
    w_bc = partial_trace(w_abc, abc, keep=[b, c])
    w_c = partial_trace(w_abc, abc, keep=[c])
    value = entropy(w_ac) + entropy(w_bc) - entropy(w_abc) - entropy(w_c)

    bc = abc.restrict([b, c])
    alternative = (
        rel_entropy(w_abc, embed(w_ac, abc, abc.restrict([a, c]).labels)).value
        - rel_entropy(w_bc, embed(w_c, bc, [c])).value
    )
    drift = abs(value - alternative)
    if drift > get_config().self_check_tol * max(1.0, abs(value)):
        logger.warning("conditional mutual information forms disagree", drift=drift, value=value)
    return value


def root_fidelity(A, B) -> float:
    """||sqrt(A) sqrt(B)||_1."""
    X = as_matrix(A)
    Y = as_matrix(B)
    _same_dim(X, Y)
    return trace_norm(mat_func(X, "sqrt") @ mat_func(Y, "sqrt"))


def fidelity(A, B) -> float:
    return root_fidelity(A, B) ** 2


def neg_log2_fidelity(A, B) -> float:
    """-log2 F(A, B); +inf for orthogonal supports."""
    F = fidelity(A, B)
    return math.inf if F <= 0.0 else -math.log2(F)


def bures_sq(rho, sigma) -> float:
    """D_B^2 = 2(1 - sqrt F), clamped to [0, 2]."""
    return float(min(max(2.0 * (1.0 - root_fidelity(rho, sigma)), 0.0), 2.0))


def fidelity_comparison(F: float) -> dict[str, float]:
    """
    Both unit forms of -log F >= 2(1 - sqrt F).

    Natural log: -ln F >= 2(1 - sqrt F). Base 2: -log2 F >= (1/ln 2) 2(1 - sqrt F).
    Returned as slacks (lhs - rhs), each expected to be >= 0.
    """
    if F <= 0.0:
        return {"nats_slack": math.inf, "bits_slack": math.inf}
    bures = 2.0 * (1.0 - math.sqrt(F))
    return {
        "nats_slack": -math.log(F) - bures,
        "bits_slack": -math.log2(F) - bures / LN2,
    }
