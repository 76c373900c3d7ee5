"""
Dense complex Hermitian linear algebra kernel.

Everything else in petzlab sits on these functions: eigendecompositions,
spectral functions restricted to supports, tensor products, partial traces and
trace norms. Operators are plain ``numpy`` arrays; any object exposing a
``matrix`` attribute (PsdOperator, DensityOperator) is accepted wherever an
operator is expected.

Logarithms are base 2 throughout.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Any, Iterable, Sequence, Union

import numpy as np

from .config import PRECISION_EXTENDED, get_config, precision, tolerance_scale
from .errors import ConvergenceFailure, NegativeEigenvalue, NonHermitian, ShapeMismatch, SupportViolation, UnknownLabel

ComplexMatrix = np.ndarray
HermitianOperator = np.ndarray
Operator = Union[np.ndarray, Any]

SPECTRAL_FUNCTIONS = ("log2", "sqrt", "inv_sqrt")


@dataclass(frozen=True)
class SpaceShape:
    """Ordered tensor factors ``(label, dim)`` of a composite Hilbert space."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [label for label, _ in self.factors]
        if len(set(labels)) != len(labels):
            raise ShapeMismatch("subsystem labels must be unique", labels=labels)
        for label, dim in self.factors:
            if int(dim) < 1:
                raise ShapeMismatch(f"factor {label} has dimension {dim}", label=label, dim=dim)

    @classmethod
    def of(cls, **dims: int) -> "SpaceShape":
        """SpaceShape.of(A=2, B=3) keeps keyword order."""
        return cls(tuple((label, int(dim)) for label, dim in dims.items()))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, int]]) -> "SpaceShape":
        return cls(tuple((str(label), int(dim)) for label, dim in pairs))

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.factors]

    @property
    def dims(self) -> list[int]:
        return [dim for _, dim in self.factors]

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def index(self, label: str) -> int:
        for i, (name, _) in enumerate(self.factors):
            if name == label:
                return i
        raise UnknownLabel(f"unknown subsystem label: {label}", label=label, labels=self.labels)

    def dim_of(self, label: str) -> int:
        return self.factors[self.index(label)][1]

    def restrict(self, labels: Iterable[str]) -> "SpaceShape":
        """Sub-shape holding ``labels`` in this shape's order."""
        wanted = set(labels)
        for label in wanted:
            self.index(label)
        return SpaceShape(tuple(f for f in self.factors if f[0] in wanted))

    def complement(self, labels: Iterable[str]) -> list[str]:
        given = set(labels)
        for label in given:
            self.index(label)
        return [label for label in self.labels if label not in given]

    def concat(self, other: "SpaceShape") -> "SpaceShape":
        return SpaceShape(self.factors + other.factors)

    def to_dict(self) -> dict[str, int]:
        return dict(self.factors)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending with eigenvectors as unitary columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def as_matrix(X: Operator) -> np.ndarray:
    """Square complex array view of an operator-like object."""
    M = getattr(X, "matrix", X)
    M = np.asarray(M, dtype=complex)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise ShapeMismatch("operator must be a 2-d array", shape=list(M.shape))
    if not np.all(np.isfinite(M)):
        raise ShapeMismatch("operator has non-finite entries", shape=list(M.shape))
    return M


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def herm_tol(M: np.ndarray) -> float:
    return get_config().herm_rel_tol * tolerance_scale() * float(np.max(np.abs(M), initial=0.0))


def ensure_hermitian(X: Operator) -> np.ndarray:
    """Return the Hermitian part of X after checking it is within herm_tol of X."""
    M = as_matrix(X)
    if M.shape[0] != M.shape[1]:
        raise ShapeMismatch("operator is not square", shape=list(M.shape))
    deviation = float(np.max(np.abs(M - dagger(M)), initial=0.0))
    tol = herm_tol(M)
    if deviation > tol:
        raise NonHermitian("operator is not Hermitian", deviation=deviation, herm_tol=tol)
    return (M + dagger(M)) / 2


def _eigh_extended(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    import mpmath

    with mpmath.workdps(get_config().extended_dps):
        A = mpmath.matrix(M.tolist())
        E, Q = mpmath.eigh(A)
        eigenvalues = np.array([float(mpmath.re(E[i])) for i in range(M.shape[0])])
        eigenvectors = np.array(
            [[complex(Q[i, j]) for j in range(M.shape[0])] for i in range(M.shape[0])],
            dtype=complex,
        )
    return eigenvalues, eigenvectors


def eigh(A: Operator) -> Spectrum:
    """Spectral decomposition of a Hermitian operator, eigenvalues descending."""
    M = ensure_hermitian(A)
    try:
        if precision() == PRECISION_EXTENDED:
            eigenvalues, eigenvectors = _eigh_extended(M)
        else:
            eigenvalues, eigenvectors = np.linalg.eigh(M)
    except (np.linalg.LinAlgError, ZeroDivisionError) as e:
        raise ConvergenceFailure(f"eigensolver failed: {e}", dim=M.shape[0]) from e
    except ImportError:
        raise
    except Exception as e:
        # mpmath signals non-convergence with plain exceptions
        raise ConvergenceFailure(f"eigensolver failed: {e}", dim=M.shape[0]) from e

    order = np.argsort(eigenvalues)[::-1]
    return Spectrum(eigenvalues=np.asarray(eigenvalues)[order], eigenvectors=eigenvectors[:, order])


def psd_tol(eigenvalues: np.ndarray) -> float:
    """Clip tolerance: psd_rel_tol * dim * max|eigenvalue|."""
    scale = float(np.max(np.abs(eigenvalues), initial=0.0))
    return get_config().psd_rel_tol * tolerance_scale() * len(eigenvalues) * scale


def default_support_tol(eigenvalues: np.ndarray) -> float:
    return get_config().support_rel_tol * tolerance_scale() * float(np.max(eigenvalues, initial=0.0))


def clip_eigenvalues(eigenvalues: np.ndarray) -> np.ndarray:
    """Clip eigenvalues in [-psd_tol, 0) to zero; anything lower is an error."""
    tol = psd_tol(eigenvalues)
    lowest = float(np.min(eigenvalues, initial=0.0))
    if lowest < -tol:
        raise NegativeEigenvalue(
            "operator is not positive semi-definite",
            min_eigenvalue=lowest,
            psd_tol=tol,
        )
    return np.where(eigenvalues < 0, 0.0, eigenvalues)


def psd_spectrum(A: Operator) -> Spectrum:
    """eigh followed by PSD clipping."""
    spectrum = eigh(A)
    return Spectrum(clip_eigenvalues(spectrum.eigenvalues), spectrum.eigenvectors)


def _spectral_apply(name: str, values: np.ndarray) -> np.ndarray:
    if name == "log2":
        return np.log2(values)
    if name == "sqrt":
        return np.sqrt(values)
    if name == "inv_sqrt":
        return 1.0 / np.sqrt(values)
    raise ValueError(f"unknown spectral function: {name} (expected one of {SPECTRAL_FUNCTIONS})")


def mat_func(A: Operator, f: str, support_tol: float = None) -> HermitianOperator:
    """
    Apply a spectral function on the support of a PSD operator.

    Eigenvalues at or below ``support_tol`` map to zero for every function, so
    ``inv_sqrt`` is the pseudo-inverse square root and ``log2`` is the
    logarithm restricted to the support.

    Args:
        A: Positive semi-definite operator
        f: One of 'log2', 'sqrt', 'inv_sqrt'
        support_tol: Support cut-off (defaults to support_rel_tol * max eigenvalue)

    Returns:
        Hermitian matrix f(A) on supp(A), zero elsewhere
    """
    spectrum = psd_spectrum(A)
    lam = spectrum.eigenvalues
    tol = default_support_tol(lam) if support_tol is None else support_tol
    mask = lam > tol
    values = np.zeros_like(lam)
    values[mask] = _spectral_apply(f, lam[mask])
    V = spectrum.eigenvectors
    return (V * values) @ dagger(V)


def support_projector(A: Operator, support_tol: float = None) -> HermitianOperator:
    """Projector onto the span of eigenvectors with eigenvalue above support_tol."""
    spectrum = psd_spectrum(A)
    lam = spectrum.eigenvalues
    tol = default_support_tol(lam) if support_tol is None else support_tol
    V = spectrum.eigenvectors[:, lam > tol]
    return V @ dagger(V)


def min_eigenvalue(A: Operator) -> float:
    return float(eigh(A).eigenvalues[-1])


def tensor(A: Operator, B: Operator) -> HermitianOperator:
    return np.kron(as_matrix(A), as_matrix(B))


def tensor_all(operators: Sequence[Operator]) -> np.ndarray:
    return reduce(np.kron, (as_matrix(op) for op in operators))


def tensor_power(A: Operator, n: int) -> np.ndarray:
    return tensor_all([A] * n)


def trace_norm(X: Operator) -> float:
    """Sum of singular values."""
    M = as_matrix(X)
    if M.shape[0] != M.shape[1]:
        raise ShapeMismatch("trace norm needs a square matrix", shape=list(M.shape))
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


def _check_shape(M: np.ndarray, shape: SpaceShape) -> None:
    if M.shape != (shape.total_dim, shape.total_dim):
        raise ShapeMismatch(
            "operator dimension does not match shape",
            operator_dim=M.shape[0],
            shape_dims=shape.dims,
        )


def partial_trace(X: Operator, shape: SpaceShape, keep: Iterable[str]) -> HermitianOperator:
    """
    Trace out every factor of ``shape`` not listed in ``keep``.

    The kept factors stay in the order they have in ``shape``.
    """
    M = as_matrix(X)
    _check_shape(M, shape)
    keep = set(keep)
    for label in keep:
        shape.index(label)
    if len(keep) == len(shape.factors):
        return M.copy()

    k = len(shape.factors)
    T = M.reshape(shape.dims + shape.dims)
    rows = list(range(k))
    cols = [i if shape.labels[i] not in keep else k + i for i in range(k)]
    kept = [i for i in range(k) if shape.labels[i] in keep]
    out = [i for i in kept] + [k + i for i in kept]
    reduced = np.einsum(T, rows + cols, out)
    d = int(np.prod([shape.dims[i] for i in kept], dtype=np.int64)) if kept else 1
    return reduced.reshape(d, d)


def permute_subsystems(X: Operator, shape: SpaceShape, order: Sequence[str]) -> tuple[np.ndarray, SpaceShape]:
    """Reorder tensor factors of X to ``order``; returns the operator and its new shape."""
    M = as_matrix(X)
    _check_shape(M, shape)
    if sorted(order) != sorted(shape.labels):
        raise UnknownLabel("order must be a permutation of the shape labels", order=list(order), labels=shape.labels)
    perm = [shape.index(label) for label in order]
    k = len(perm)
    T = M.reshape(shape.dims + shape.dims).transpose(perm + [p + k for p in perm])
    new_shape = SpaceShape(tuple(shape.factors[p] for p in perm))
    return T.reshape(M.shape), new_shape


def embed(X: Operator, shape: SpaceShape, labels: Sequence[str]) -> np.ndarray:
    """
    Lift an operator on ``labels`` (in the given order) to the full shape,
    acting as the identity on every other factor.
    """
    M = as_matrix(X)
    labels = list(labels)
    sub_dim = int(np.prod([shape.dim_of(label) for label in labels], dtype=np.int64)) if labels else 1
    if M.shape != (sub_dim, sub_dim):
        raise ShapeMismatch("operator does not match the labelled factors", operator_dim=M.shape[0], labels=labels)
    rest = shape.complement(labels)
    rest_dim = int(np.prod([shape.dim_of(label) for label in rest], dtype=np.int64)) if rest else 1
    lifted = np.kron(M, np.eye(rest_dim))
    current = SpaceShape(tuple((label, shape.dim_of(label)) for label in labels + rest))
    permuted, _ = permute_subsystems(lifted, current, shape.labels)
    return permuted


def max_abs(M: np.ndarray) -> float:
    return float(np.max(np.abs(M), initial=0.0))


def require_positive_definite(A: Operator, what: str) -> None:
    """Raise SupportViolation when the smallest eigenvalue of A is at or below support_tol."""
    lam = eigh(A).eigenvalues
    tol = default_support_tol(lam)
    if lam[-1] <= tol:
        raise SupportViolation(f"{what} is not positive definite", min_eigenvalue=float(lam[-1]), support_tol=tol)
