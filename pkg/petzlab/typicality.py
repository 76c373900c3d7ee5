"""
Relative typical subspaces of rho with respect to sigma.

A string y^n of sigma eigen-indices is accepted when its per-symbol
log-eigenvalue average is delta-close (in bits) to Tr{rho log2 sigma}:

    | -(1/n) sum_i log2 lambda_{y_i} + Tr{rho log2 sigma} | <= delta

Two representations are kept side by side:

* dense: the projector sum over accepted y^n of |phi_{y^n}><phi_{y^n}|, only
  below the configured total-dimension cap;
* exact: the accepted type classes over the distinct eigenvalues of sigma. The
  score of a string depends on its counts only, so the typical mass is a sum of
  multinomial weights. This path has no dimension limit.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from observability import get_logger

from .config import get_config
from .errors import DimensionCap, NegativeParameter, ShapeMismatch, SupportViolation
from .opmath import (
    SpaceShape,
    Spectrum,
    as_matrix,
    dagger,
    default_support_tol,
    partial_trace,
    permute_subsystems,
    psd_spectrum,
    tensor_power,
    trace_norm,
)

logger = get_logger(__name__)

ACCEPT_SLACK = 1e-12
PATH_DENSE = "dense"
PATH_EXACT = "exact"


@dataclass(frozen=True)
class EigenGroup:
    """Eigenvalues of sigma that agree to the merge tolerance; value 0 marks the kernel."""

    value: float
    indices: tuple[int, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.indices)

    @property
    def neg_log2(self) -> float:
        return math.inf if self.value <= 0 else -math.log2(self.value)


@dataclass(frozen=True)
class TypicalProjector:
    """Relative typical subspace T^{delta,n} in both its dense and type-class forms."""

    n: int
    delta: float
    sigma_spectrum: Spectrum
    reference_expectation: float
    groups: tuple[EigenGroup, ...]
    accepted_types: frozenset
    projector: Optional[np.ndarray] = None
    path: str = PATH_EXACT

    @property
    def dim(self) -> int:
        return self.sigma_spectrum.dim

    @property
    def total_dim(self) -> int:
        return self.dim**self.n

    def string_counts(self, string: Sequence[int]) -> tuple[int, ...]:
        group_of = {i: g for g, group in enumerate(self.groups) for i in group.indices}
        counts = [0] * len(self.groups)
        for y in string:
            counts[group_of[y]] += 1
        return tuple(counts)

    def accepts(self, string: Sequence[int]) -> bool:
        return self.string_counts(string) in self.accepted_types

    def accepted_string_set(self) -> frozenset:
        """Every accepted y^n as a tuple of eigen-indices (bounded by the dense cap)."""
        cap = get_config().dense_cap
        if self.total_dim > cap:
            raise DimensionCap("string enumeration exceeds the dense cap", total_dim=self.total_dim, dense_cap=cap)
        if self.projector is not None:
            mask = _accepted_mask(self)
            return frozenset(
                tuple(int(i) for i in np.unravel_index(k, [self.dim] * self.n)) for k in np.flatnonzero(mask)
            )
        return frozenset(s for s in itertools.product(range(self.dim), repeat=self.n) if self.accepts(s))


@dataclass(frozen=True)
class Shell:
    """One distinct eigenvalue s of sigma^{(x)n} with the type classes that produce it."""

    value: float
    multiplicity: int
    types: tuple[tuple[int, ...], ...]
    in_window: bool


@dataclass
class EigenvalueShells:
    """Distinct eigenvalues S_n of sigma^{(x)n} and the delta-window subset S_{n,delta}."""

    n: int
    delta: float
    shells: list[Shell]
    groups: tuple[EigenGroup, ...]
    sigma_spectrum: Spectrum
    type_bound: int
    window: list[int] = field(default_factory=list)

    @property
    def shell_count(self) -> int:
        return len(self.shells)

    @property
    def window_count(self) -> int:
        return len(self.window)

    def shell_projector(self, index: int) -> np.ndarray:
        """Dense eigenprojector Pi_s of one shell."""
        return _types_projector(self.sigma_spectrum, self.groups, self.n, set(self.shells[index].types))

    def window_projector(self) -> np.ndarray:
        """sum over s in S_{n,delta} of Pi_s."""
        accepted = {t for i in self.window for t in self.shells[i].types}
        return _types_projector(self.sigma_spectrum, self.groups, self.n, accepted)


def _check_delta_n(delta: float, n: int) -> None:
    if delta < 0:
        raise NegativeParameter("delta must be nonnegative", delta=delta)
    if n < 1:
        raise NegativeParameter("n must be a positive integer", n=n)


def eigen_groups(lam: np.ndarray, rtol: float = None) -> tuple[EigenGroup, ...]:
    """Group descending eigenvalues agreeing to relative ``rtol``; kernel eigenvalues form one group."""
    rtol = get_config().shell_merge_rtol if rtol is None else rtol
    zero_tol = default_support_tol(lam)
    groups: list[list] = []
    kernel: list[int] = []
    for i, value in enumerate(lam):
        if value <= zero_tol:
            kernel.append(i)
            continue
        if groups and abs(groups[-1][0] - value) <= rtol * max(abs(groups[-1][0]), abs(value)):
            groups[-1][1].append(i)
        else:
            groups.append([float(value), [i]])
    result = [EigenGroup(value=float(np.mean([lam[i] for i in idx])), indices=tuple(idx)) for _, idx in groups]
    if kernel:
        result.append(EigenGroup(value=0.0, indices=tuple(kernel)))
    return tuple(result)


def compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All k-tuples of nonnegative integers summing to n (stars and bars)."""
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        edges = (-1,) + bars + (n + k - 1,)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(k))


def multinomial(n: int, counts: Sequence[int]) -> int:
    result, remaining = 1, n
    for k in counts:
        result *= math.comb(remaining, k)
        remaining -= k
    return result


def _type_score(counts: Sequence[int], groups: Sequence[EigenGroup], n: int) -> float:
    total = 0.0
    for k, group in zip(counts, groups):
        if k:
            total += k * group.neg_log2
    return total / n


def _within_window(score: float, reference: float, delta: float) -> bool:
    return abs(score + reference) <= delta + ACCEPT_SLACK


def _pushforward(rho: np.ndarray, spectrum: Spectrum) -> np.ndarray:
    """p(y) = <phi_y| rho |phi_y>."""
    V = spectrum.eigenvectors
    p = np.real(np.einsum("iy,ij,jy->y", V.conj(), rho, V))
    return np.clip(p, 0.0, None)


def _reference_expectation(p: np.ndarray, groups: Sequence[EigenGroup]) -> float:
    """Tr{rho log2 sigma} on supp(sigma)."""
    total = 0.0
    for group in groups:
        if group.value > 0:
            total += float(np.sum(p[list(group.indices)])) * math.log2(group.value)
    return total


def _kernel_mass(p: np.ndarray, groups: Sequence[EigenGroup]) -> float:
    return sum(float(np.sum(p[list(g.indices)])) for g in groups if g.value <= 0)


def _letter_scores(spectrum: Spectrum, groups: Sequence[EigenGroup]) -> np.ndarray:
    scores = np.empty(spectrum.dim)
    for group in groups:
        scores[list(group.indices)] = group.neg_log2
    return scores


def _string_mask(spectrum: Spectrum, groups, n: int, reference: float, delta: float) -> np.ndarray:
    scores = _letter_scores(spectrum, groups)
    totals = reduce(np.add.outer, [scores] * n).reshape(-1)
    return np.abs(totals / n + reference) <= delta + ACCEPT_SLACK


def _accepted_mask(tp: TypicalProjector) -> np.ndarray:
    return _string_mask(tp.sigma_spectrum, tp.groups, tp.n, tp.reference_expectation, tp.delta)


def _types_projector(spectrum: Spectrum, groups: Sequence[EigenGroup], n: int, types: set) -> np.ndarray:
    d = spectrum.dim
    total = d**n
    cap = get_config().dense_cap
    if total > cap:
        raise DimensionCap("dense projector exceeds the dimension cap", total_dim=total, dense_cap=cap)
    group_of = np.empty(d, dtype=int)
    for g, group in enumerate(groups):
        group_of[list(group.indices)] = g
    mask = np.zeros(total, dtype=bool)
    for k, string in enumerate(itertools.product(range(d), repeat=n)):
        counts = np.bincount(group_of[list(string)], minlength=len(groups))
        mask[k] = tuple(int(c) for c in counts) in types
    Vn = tensor_power(spectrum.eigenvectors, n)
    W = Vn[:, mask]
    return W @ dagger(W)


def _prepare(rho, sigma) -> tuple[np.ndarray, Spectrum, tuple[EigenGroup, ...], np.ndarray]:
    R = as_matrix(rho)
    spectrum = psd_spectrum(sigma)
    if R.shape[0] != spectrum.dim:
        raise ShapeMismatch("rho and sigma must share a dimension", rho_dim=R.shape[0], sigma_dim=spectrum.dim)
    groups = eigen_groups(spectrum.eigenvalues)
    p = _pushforward(R, spectrum)
    leaked = _kernel_mass(p, groups)
    if leaked > get_config().supp_viol_tol:
        raise SupportViolation("supp(rho) is not contained in supp(sigma)", leaked_mass=leaked)
    return R, spectrum, groups, p


def typical_projector(rho, sigma, delta: float, n: int, exact: bool = None) -> TypicalProjector:
    """
    Build the relative typical subspace of rho with respect to sigma.

    Args:
        rho: Density operator
        sigma: PSD operator with supp(rho) inside supp(sigma)
        delta: Window half-width in bits
        n: Number of copies
        exact: True for type classes only, False to require the dense projector,
            None to build the dense projector whenever it fits under the cap

    Raises:
        DimensionCap: dense projector requested above the cap
        SupportViolation: rho has weight outside supp(sigma)
    """
    _check_delta_n(delta, n)
    _, spectrum, groups, p = _prepare(rho, sigma)
    reference = _reference_expectation(p, groups)
    accepted = frozenset(
        counts
        for counts in compositions(n, len(groups))
        if _within_window(_type_score(counts, groups, n), reference, delta)
    )

    total = spectrum.dim**n
    cap = get_config().dense_cap
    if exact is False and total > cap:
        raise DimensionCap("dense typical projector exceeds the dimension cap", total_dim=total, dense_cap=cap)
    dense = exact is False or (exact is None and total <= cap)

    projector = None
    if dense:
        mask = _string_mask(spectrum, groups, n, reference, delta)
        W = tensor_power(spectrum.eigenvectors, n)[:, mask]
        projector = W @ dagger(W)
    logger.debug("Typical subspace built", n=n, delta=delta, path=PATH_DENSE if dense else PATH_EXACT,
                 accepted_types=len(accepted))

    return TypicalProjector(
        n=n,
        delta=delta,
        sigma_spectrum=spectrum,
        reference_expectation=reference,
        groups=groups,
        accepted_types=accepted,
        projector=projector,
        path=PATH_DENSE if dense else PATH_EXACT,
    )


def _log_term(n: int, counts: Sequence[int], probs: Sequence[float]) -> float:
    log_weight = math.lgamma(n + 1) - sum(math.lgamma(k + 1) for k in counts)
    return log_weight + sum(k * math.log(q) for k, q in zip(counts, probs) if k)


def type_class_mass(n: int, types, probs: Sequence[float]) -> float:
    """sum over the given types of multinomial(n; k) prod_g q_g^{k_g}."""
    total = 0.0
    for counts in types:
        if any(k and q <= 0 for k, q in zip(counts, probs)):
            continue
        weight = multinomial(n, counts)
        if weight < 1e300:
            term = float(weight)
            for k, q in zip(counts, probs):
                if k:
                    term *= q**k
        else:
            term = math.exp(_log_term(n, counts, probs))
        total += term
    return total


def typical_mass(tp: TypicalProjector, rho) -> float:
    """
    Tr{Pi rho^{(x)n}}, the probability that n i.i.d. draws of p(y) = <phi_y|rho|phi_y> land in the typical set.

    The dense path evaluates the trace directly; the exact path sums multinomial
    weights over the accepted type classes.
    """
    R = as_matrix(rho)
    if R.shape[0] != tp.dim:
        raise ShapeMismatch("rho does not match the typical projector", rho_dim=R.shape[0], dim=tp.dim)
    if tp.projector is not None:
        Rn = tensor_power(R, tp.n)
        mass = float(np.real(np.sum(tp.projector * Rn.T)))
    else:
        p = _pushforward(R, tp.sigma_spectrum)
        probs = [float(np.sum(p[list(g.indices)])) for g in tp.groups]
        mass = type_class_mass(tp.n, tp.accepted_types, probs)
    return float(min(max(mass, 0.0), 1.0))


def eigenvalue_shells(sigma, n: int, rho, delta: float) -> EigenvalueShells:
    """
    Group the eigenvalues of sigma^{(x)n} into shells and select the delta-window.

    Products closer than the merge tolerance share a shell. Kernel eigenvalues of
    sigma produce a zero shell that is never inside the window. ``type_bound``
    is the number of type classes, C(n+G-1, G-1) for G distinct eigenvalues.
    """
    _check_delta_n(delta, n)
    _, spectrum, groups, p = _prepare(rho, sigma)
    reference = _reference_expectation(p, groups)
    rtol = get_config().shell_merge_rtol

    entries = []
    for counts in compositions(n, len(groups)):
        if any(k and g.value <= 0 for k, g in zip(counts, groups)):
            value = 0.0
        else:
            value = math.exp(sum(k * math.log(g.value) for k, g in zip(counts, groups) if k))
        weight = multinomial(n, counts) * math.prod(g.multiplicity**k for k, g in zip(counts, groups))
        entries.append((value, weight, counts))
    entries.sort(key=lambda e: -e[0])

    merged: list[list] = []
    for value, weight, counts in entries:
        if merged and abs(merged[-1][0] - value) <= rtol * max(merged[-1][0], value):
            merged[-1][1] += weight
            merged[-1][2].append(counts)
        else:
            merged.append([value, weight, [counts]])

    shells = []
    for value, weight, types in merged:
        inside = value > 0 and _within_window(-math.log2(value) / n, reference, delta)
        shells.append(Shell(value=value, multiplicity=int(weight), types=tuple(types), in_window=inside))

    return EigenvalueShells(
        n=n,
        delta=delta,
        shells=shells,
        groups=groups,
        sigma_spectrum=spectrum,
        type_bound=math.comb(n + len(groups) - 1, len(groups) - 1),
        window=[i for i, shell in enumerate(shells) if shell.in_window],
    )


def hoeffding_bound(rho, sigma, delta: float, n: int) -> float:
    """
    min(1, 2 exp(-2 n delta^2 / (b - a)^2)) bounding the atypical mass 1 - Tr{Pi rho^{(x)n}}.

    [a, b] is the range of -log2 lambda_y over the y with p(y) > 0; a constant
    score has no atypical mass and gives 0.
    """
    _check_delta_n(delta, n)
    _, spectrum, groups, p = _prepare(rho, sigma)
    scores = _letter_scores(spectrum, groups)
    live = scores[p > ACCEPT_SLACK]
    if live.size == 0:
        return 0.0
    spread = float(np.max(live) - np.min(live))
    if spread == 0.0:
        return 0.0
    return float(min(1.0, 2.0 * math.exp(-2.0 * n * delta**2 / spread**2)))


ProjectorLike = Union[TypicalProjector, np.ndarray]


def _projector_matrix(P: ProjectorLike) -> np.ndarray:
    if isinstance(P, TypicalProjector):
        if P.projector is None:
            raise DimensionCap("typical projector was built on the exact path only", total_dim=P.total_dim)
        return P.projector
    return as_matrix(P)


def sandwich(X, pi_outer: ProjectorLike, pi_inner: ProjectorLike) -> np.ndarray:
    """W_n(X) = P_outer P_inner X P_inner P_outer."""
    M = as_matrix(X)
    outer = _projector_matrix(pi_outer)
    inner = _projector_matrix(pi_inner)
    if not (M.shape == outer.shape == inner.shape):
        raise ShapeMismatch(
            "sandwich operands must share a dimension",
            x_dim=M.shape[0],
            outer_dim=outer.shape[0],
            inner_dim=inner.shape[0],
        )
    left = outer @ inner
    return left @ M @ dagger(left)


def lift_to_blocks(P_b, dim_a: int, dim_b: int, n: int) -> np.ndarray:
    """
    I_{A^n} (x) P_{B^n} reordered to the interleaved A1 B1 A2 B2 ... An Bn layout of (rho_AB)^{(x)n}.
    """
    P = as_matrix(P_b)
    if P.shape[0] != dim_b**n:
        raise ShapeMismatch("operator does not act on B^n", operator_dim=P.shape[0], expected=dim_b**n)
    a_labels = [f"A{i}" for i in range(1, n + 1)]
    b_labels = [f"B{i}" for i in range(1, n + 1)]
    shape = SpaceShape.from_pairs([(label, dim_a) for label in a_labels] + [(label, dim_b) for label in b_labels])
    lifted = np.kron(np.eye(dim_a**n), P)
    interleaved = [label for pair in zip(a_labels, b_labels) for label in pair]
    permuted, _ = permute_subsystems(lifted, shape, interleaved)
    return permuted


def gentle_measurement_terms(rho_ab, sigma_ab, shape: SpaceShape, delta: float, n: int) -> tuple[float, float, float]:
    """
    Finite ingredients of the gentle-measurement step at n copies.

    Returns:
        (Tr W_n(rho^{(x)n}), Tr Pi_AB rho^{(x)n}, || Pi_B rho^{(x)n} Pi_B - rho^{(x)n} ||_1)
        where W_n sandwiches with Pi_AB outside and the lifted Pi_B inside
    """
    if len(shape.factors) != 2:
        raise ShapeMismatch("gentle measurement terms need a bipartite shape", labels=shape.labels)
    a, b = shape.labels
    R = as_matrix(rho_ab)
    S = as_matrix(sigma_ab)
    pi_ab = typical_projector(R, S, delta, n, exact=False)
    pi_b = typical_projector(
        partial_trace(R, shape, keep=[b]), partial_trace(S, shape, keep=[b]), delta, n, exact=False
    )
    lifted_b = lift_to_blocks(pi_b.projector, shape.dim_of(a), shape.dim_of(b), n)

    Rn = tensor_power(R, n)
    sandwiched = sandwich(Rn, pi_ab, lifted_b)
    disturbance = trace_norm(lifted_b @ Rn @ lifted_b - Rn)
    return (
        float(np.real(np.trace(sandwiched))),
        float(np.real(np.sum(pi_ab.projector * Rn.T))),
        disturbance,
    )
