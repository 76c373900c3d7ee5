"""
Quantum channels in Kraus form.

A channel is immutable once validated. Maps that are trace preserving only on
a subspace (the Petz map when N(sigma) is singular) record that subspace in
``input_support`` and are validated against its projector instead of the
identity.
"""

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import get_config
from .errors import CompletenessViolation, ShapeMismatch
from .opmath import SpaceShape, as_matrix, dagger, max_abs, partial_trace
from .states import PsdOperator, Seed, make_rng, random_isometry, validate_psd


@dataclass(frozen=True)
class QuantumChannel:
    """Completely positive map sum_i K_i (.) K_i^dagger with K_i of shape dim_out x dim_in."""

    dim_in: int
    dim_out: int
    kraus: tuple[np.ndarray, ...]
    input_support: Optional[np.ndarray] = None

    @property
    def num_kraus(self) -> int:
        return len(self.kraus)

    def stacked(self) -> np.ndarray:
        return np.stack(self.kraus)


@dataclass(frozen=True)
class StinespringDilation:
    """Isometry W = sum_i |i>_E (x) K_i, environment factor first."""

    isometry: np.ndarray
    dim_env: int
    dim_out: int

    @property
    def dim_in(self) -> int:
        return self.isometry.shape[1]


def completeness_residual(kraus: Sequence[np.ndarray], target: np.ndarray) -> float:
    total = sum(dagger(K) @ K for K in kraus)
    return max_abs(total - target)


def make_channel(
    kraus: Iterable[np.ndarray],
    tol: float = None,
    input_support: np.ndarray = None,
) -> QuantumChannel:
    """
    Validate Kraus operators and build a channel.

    Args:
        kraus: Matrices of a common shape (dim_out, dim_in)
        tol: Completeness tolerance (defaults to cptp_tol)
        input_support: Projector the Kraus family must resolve instead of the identity

    Raises:
        ShapeMismatch: inconsistent Kraus shapes
        CompletenessViolation: sum K^dagger K differs from the target by more than tol
    """
    ops = tuple(as_matrix(K) for K in kraus)
    if not ops:
        raise ShapeMismatch("a channel needs at least one Kraus operator")
    shapes = {K.shape for K in ops}
    if len(shapes) != 1:
        raise ShapeMismatch("Kraus operators must share a shape", shapes=sorted(shapes))
    dim_out, dim_in = ops[0].shape

    tol = get_config().cptp_tol if tol is None else tol
    target = np.eye(dim_in) if input_support is None else as_matrix(input_support)
    residual = completeness_residual(ops, target)
    if residual > tol:
        raise CompletenessViolation(
            "Kraus operators are not complete",
            residual=residual,
            tol=tol,
            dim_in=dim_in,
            dim_out=dim_out,
        )
    return QuantumChannel(dim_in=dim_in, dim_out=dim_out, kraus=ops, input_support=input_support)


def apply(N: QuantumChannel, X) -> np.ndarray:
    """N(X) = sum_i K_i X K_i^dagger."""
    M = as_matrix(X)
    if M.shape != (N.dim_in, N.dim_in):
        raise ShapeMismatch("input does not match channel", operator_dim=M.shape[0], dim_in=N.dim_in)
    K = N.stacked()
    return np.einsum("kij,jl,kml->im", K, M, K.conj())


def adjoint_apply(N: QuantumChannel, Y) -> np.ndarray:
    """N^dagger(Y) = sum_i K_i^dagger Y K_i."""
    M = as_matrix(Y)
    if M.shape != (N.dim_out, N.dim_out):
        raise ShapeMismatch("input does not match channel output", operator_dim=M.shape[0], dim_out=N.dim_out)
    K = N.stacked()
    return np.einsum("kji,jl,klm->im", K.conj(), M, K)


def choi(N: QuantumChannel) -> PsdOperator:
    """sum_ij N(|i><j|) (x) |i><j|, output factor first; trace equals dim_in."""
    d = N.dim_in
    blocks = np.zeros((N.dim_out * d, N.dim_out * d), dtype=complex)
    for i, j in itertools.product(range(d), repeat=2):
        unit = np.zeros((d, d))
        unit[i, j] = 1.0
        blocks += np.kron(apply(N, unit), unit)
    return validate_psd(blocks)


def stinespring(N: QuantumChannel) -> StinespringDilation:
    W = np.vstack(N.kraus)
    return StinespringDilation(isometry=W, dim_env=N.num_kraus, dim_out=N.dim_out)


def dilation_kraus(dilation: StinespringDilation) -> list[np.ndarray]:
    """Read K_i = <i|_E W back off the isometry."""
    d = dilation.dim_out
    return [dilation.isometry[i * d:(i + 1) * d, :] for i in range(dilation.dim_env)]


def dilation_apply(dilation: StinespringDilation, X) -> np.ndarray:
    """Tr_E{W X W^dagger}."""
    W = dilation.isometry
    shape = SpaceShape.of(E=dilation.dim_env, B=dilation.dim_out)
    return partial_trace(W @ as_matrix(X) @ dagger(W), shape, keep=["B"])


def partial_trace_channel(shape: SpaceShape, discard: Iterable[str]) -> QuantumChannel:
    """Kraus form {<j|_discard (x) I_keep} of the partial trace over ``discard``."""
    discard = list(dict.fromkeys(discard))
    for label in discard:
        shape.index(label)
    keep = shape.complement(discard)
    D = shape.total_dim
    if not discard:
        return make_channel([np.eye(D)])

    k = len(shape.factors)
    identity = np.eye(D).reshape(shape.dims + [D])
    discard_axes = [shape.index(label) for label in discard]
    keep_dim = int(np.prod([shape.dim_of(label) for label in keep], dtype=np.int64)) if keep else 1
    kraus = []
    for j in itertools.product(*(range(shape.dim_of(label)) for label in discard)):
        index: list = [slice(None)] * k + [slice(None)]
        for axis, value in zip(discard_axes, j):
            index[axis] = value
        kraus.append(identity[tuple(index)].reshape(keep_dim, D))
    return make_channel(kraus)


def identity_channel(dim: int) -> QuantumChannel:
    return make_channel([np.eye(dim)])


def unitary_channel(U: np.ndarray) -> QuantumChannel:
    return make_channel([as_matrix(U)])


def random_channel(dim_in: int, dim_out: int, env_dim: int = None, seed: Seed = 0) -> QuantumChannel:
    """Kraus operators read off the blocks of a Haar isometry dim_in -> dim_out * env_dim."""
    env_dim = get_config().channel_env_dim if env_dim is None else env_dim
    env_dim = max(env_dim, -(-dim_in // dim_out))
    W = random_isometry(dim_in, dim_out * env_dim, seed)
    return make_channel([W[i * dim_out:(i + 1) * dim_out, :] for i in range(env_dim)])


def classical_channel(transition: np.ndarray) -> QuantumChannel:
    """
    Channel with Kraus operators sqrt(P(j|i)) |j><i| for a column-stochastic P.

    Diagonal inputs map to diagonal outputs.
    """
    P = np.asarray(transition, dtype=float)
    dim_out, dim_in = P.shape
    kraus = []
    for j, i in itertools.product(range(dim_out), range(dim_in)):
        if P[j, i] > 0:
            K = np.zeros((dim_out, dim_in))
            K[j, i] = np.sqrt(P[j, i])
            kraus.append(K)
    return make_channel(kraus)


def binary_symmetric_channel(flip: float) -> QuantumChannel:
    return classical_channel(np.array([[1 - flip, flip], [flip, 1 - flip]]))


def random_classical_channel(dim_in: int, dim_out: int, seed: Seed = 0) -> QuantumChannel:
    rng = make_rng(seed)
    P = rng.dirichlet(np.ones(dim_out), size=dim_in).T
    return classical_channel(P)
