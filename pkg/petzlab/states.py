"""
Density operators: validation, seeded samplers, and the structured composite
states used by the equivalence reductions (cq-states and interpolation states).
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .config import get_config
from .errors import NegativeParameter, ShapeMismatch, TraceNotOne
from .opmath import (
    SpaceShape,
    as_matrix,
    clip_eigenvalues,
    dagger,
    eigh,
    ensure_hermitian,
    permute_subsystems,
    psd_tol,
    tensor,
)

__all__ = [
    "PsdOperator",
    "DensityOperator",
    "Ensemble",
    "SpaceShape",
    "make_rng",
    "sample_rng",
    "validate_psd",
    "validate_density",
    "ginibre",
    "random_density",
    "random_psd",
    "random_diagonal_density",
    "random_unitary",
    "random_isometry",
    "random_projector",
    "random_ensemble",
    "cq_state",
    "interpolation_state",
    "product_state",
]

Seed = Union[int, Sequence[int], np.random.SeedSequence, np.random.Generator]


@dataclass(frozen=True)
class PsdOperator:
    """Hermitian positive semi-definite matrix with the clip tolerance used to validate it."""

    matrix: np.ndarray
    clip_tol: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))


@dataclass(frozen=True)
class DensityOperator:
    """PSD operator with unit trace."""

    base: PsdOperator
    trace_tol: float = 1e-10

    @property
    def matrix(self) -> np.ndarray:
        return self.base.matrix

    @property
    def dim(self) -> int:
        return self.base.dim


@dataclass(frozen=True)
class Ensemble:
    """Probability-weighted family of density operators on a common space."""

    probs: np.ndarray
    members: tuple[DensityOperator, ...]
    shape: Optional[SpaceShape] = field(default=None)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "members", tuple(self.members))
        if len(probs) != len(self.members) or len(probs) == 0:
            raise ShapeMismatch("ensemble needs one probability per member", n_probs=len(probs), n_members=len(self.members))
        if np.any(probs < 0):
            raise NegativeParameter("ensemble probabilities must be nonnegative", probs=probs.tolist())
        if abs(float(np.sum(probs)) - 1.0) > 1e-10:
            raise TraceNotOne("ensemble probabilities must sum to 1", total=float(np.sum(probs)))
        dims = {member.dim for member in self.members}
        if len(dims) != 1:
            raise ShapeMismatch("ensemble members must share a dimension", dims=sorted(dims))
        if self.shape is None:
            object.__setattr__(self, "shape", SpaceShape.of(S=self.members[0].dim))
        elif self.shape.total_dim != self.members[0].dim:
            raise ShapeMismatch("ensemble shape does not match member dimension", shape_dims=self.shape.dims)

    @property
    def size(self) -> int:
        return len(self.members)

    def average(self) -> np.ndarray:
        return sum(p * member.matrix for p, member in zip(self.probs, self.members))


def make_rng(seed: Seed) -> np.random.Generator:
    """Counter-based (Philox) generator from an integer, integer tuple or SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def sample_rng(master_seed: int, sample_index: int) -> np.random.Generator:
    """Stream for one campaign sample, keyed on (master_seed, sample_index) only."""
    return make_rng(np.random.SeedSequence([int(master_seed), int(sample_index)]))


def validate_psd(M, clip: bool = True) -> PsdOperator:
    """Validate Hermiticity and positivity; near-zero negative eigenvalues are clipped."""
    H = ensure_hermitian(M)
    spectrum = eigh(H)
    tol = psd_tol(spectrum.eigenvalues)
    clipped = clip_eigenvalues(spectrum.eigenvalues)
    if clip and np.any(spectrum.eigenvalues < 0):
        V = spectrum.eigenvectors
        H = (V * clipped) @ dagger(V)
    return PsdOperator(matrix=H, clip_tol=tol)


def validate_density(M, trace_tol: float = None) -> DensityOperator:
    """
    Validate a candidate density matrix.

    Raises:
        NonHermitian, NegativeEigenvalue, TraceNotOne
    """
    trace_tol = get_config().trace_tol if trace_tol is None else trace_tol
    base = validate_psd(M)
    if abs(base.trace - 1.0) > trace_tol:
        raise TraceNotOne("density operator trace differs from 1", trace=base.trace, trace_tol=trace_tol)
    return DensityOperator(base=base, trace_tol=trace_tol)


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_density(dim: int, rank: int = None, seed: Seed = 0) -> DensityOperator:
    """GG^dagger / Tr(GG^dagger) with G a dim x rank complex Ginibre matrix."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ShapeMismatch("rank must lie in [1, dim]", dim=dim, rank=rank)
    rng = make_rng(seed)
    G = ginibre(rng, dim, rank)
    rho = G @ dagger(G)
    return validate_density(rho / np.real(np.trace(rho)))


def random_psd(dim: int, rank: int = None, seed: Seed = 0, scale: float = None) -> PsdOperator:
    """Unnormalized PSD operator; trace drawn uniformly from [0.2, 3] unless given."""
    rng = make_rng(seed)
    rho = random_density(dim, rank, rng).matrix
    scale = rng.uniform(0.2, 3.0) if scale is None else scale
    return validate_psd(scale * rho)


def random_diagonal_density(dim: int, seed: Seed = 0, full_rank: bool = True) -> DensityOperator:
    """Classical state: Dirichlet-distributed diagonal."""
    rng = make_rng(seed)
    p = rng.dirichlet(np.ones(dim))
    if full_rank:
        p = 0.9 * p + 0.1 / dim
    return validate_density(np.diag(p))


def random_unitary(dim: int, seed: Seed = 0) -> np.ndarray:
    """Haar unitary: QR of a complex Ginibre matrix with R's diagonal made positive."""
    rng = make_rng(seed)
    Q, R = np.linalg.qr(ginibre(rng, dim, dim))
    d = np.diag(R)
    phases = d / np.abs(d)
    return Q * phases


def random_isometry(dim_in: int, dim_out: int, seed: Seed = 0) -> np.ndarray:
    """Haar isometry C^dim_in -> C^dim_out (dim_out >= dim_in)."""
    if dim_out < dim_in:
        raise ShapeMismatch("isometry output must be at least as large as input", dim_in=dim_in, dim_out=dim_out)
    rng = make_rng(seed)
    Q, R = np.linalg.qr(ginibre(rng, dim_out, dim_in))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_projector(dim: int, rank: int, seed: Seed = 0) -> np.ndarray:
    V = random_isometry(rank, dim, seed)
    return V @ dagger(V)


def random_ensemble(size: int, dim: int, seed: Seed = 0, shape: SpaceShape = None) -> Ensemble:
    rng = make_rng(seed)
    probs = rng.dirichlet(np.ones(size))
    members = tuple(random_density(dim, dim, rng) for _ in range(size))
    return Ensemble(probs=probs, members=members, shape=shape)


def product_state(parts: dict[str, object], shape: SpaceShape) -> DensityOperator:
    """
    Tensor product of states given per label group.

    Keys are comma-separated label groups ("A,C") whose operators are ordered as
    listed; the result is reordered to ``shape``.
    """
    order: list[str] = []
    op = np.ones((1, 1), dtype=complex)
    for key, part in parts.items():
        order.extend(key.split(","))
        op = tensor(op, part)
    current = SpaceShape(tuple((label, shape.dim_of(label)) for label in order))
    permuted, _ = permute_subsystems(op, current, shape.labels)
    return validate_density(permuted)


def cq_state(e: Ensemble, label: str = "X") -> tuple[DensityOperator, SpaceShape]:
    """Block-diagonal sum_x p(x)|x><x|_X (x) rho^x on X followed by the member space."""
    k = e.size
    blocks = []
    for x, (p, member) in enumerate(zip(e.probs, e.members)):
        ket = np.zeros((k, k))
        ket[x, x] = p
        blocks.append(np.kron(ket, member.matrix))
    shape = SpaceShape(((label, k),)).concat(e.shape)
    return validate_density(sum(blocks)), shape


def interpolation_state(sigma, rho, x: float) -> DensityOperator:
    """
    (1/(x+1))|0><0|_Y (x) sigma + (x/(x+1))|1><1|_Y (x) rho.

    The Y factor comes first; its shape is SpaceShape.of(Y=2) followed by the
    common space of sigma and rho.
    """
    if x < 0:
        raise NegativeParameter("interpolation parameter must be nonnegative", x=x)
    S = as_matrix(sigma)
    R = as_matrix(rho)
    if S.shape != R.shape:
        raise ShapeMismatch("sigma and rho must share a dimension", sigma_dim=S.shape[0], rho_dim=R.shape[0])
    zero = np.diag([1.0, 0.0])
    one = np.diag([0.0, 1.0])
    xi = np.kron(zero, S) / (x + 1) + np.kron(one, R) * (x / (x + 1))
    return validate_density(xi)
