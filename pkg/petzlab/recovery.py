"""
Petz recovery maps and the search for rotating unitaries.

The Petz map of a state sigma and channel N,

    R(X) = sigma^{1/2} N^dagger[N(sigma)^{-1/2} X N(sigma)^{-1/2}] sigma^{1/2},

is built in Kraus form {sigma^{1/2} K_i^dagger N(sigma)^{-1/2}}. It is trace
preserving on supp N(sigma) and always returns sigma from N(sigma).

Rotated maps V o R o U are searched by local ascent over the unitary group:
U = U0 exp(iH(theta)) with H spanned by an orthonormal Hermitian basis, a
forward finite-difference gradient in theta and Armijo backtracking. After each
accepted step the chart is recentred (U0 <- U, theta <- 0). Restart 0 always
starts from the identity.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from observability import get_logger, performance_monitor, track_optimizer_run

from .channels import QuantumChannel, apply, make_channel, partial_trace_channel
from .config import get_config
from .entropic import rel_entropy, root_fidelity
from .errors import ShapeMismatch, SingularMarginal
from .opmath import (
    SpaceShape,
    as_matrix,
    dagger,
    default_support_tol,
    embed,
    eigh,
    mat_func,
    max_abs,
    partial_trace,
    support_projector,
)
from .states import Seed, random_unitary, validate_psd

logger = get_logger(__name__)

ARMIJO_C = 1e-4
MAX_BACKTRACKS = 30
GRADIENT_FLOOR = 1e-12


@dataclass(frozen=True)
class OptimizerBudget:
    """Restart and iteration counts for the unitary search."""

    restarts: int = 20
    iterations: int = 300
    fd_step: float = 1e-5

    @classmethod
    def from_config(cls) -> "OptimizerBudget":
        config = get_config()
        return cls(restarts=config.budget_restarts, iterations=config.budget_iters, fd_step=config.fd_step)


@dataclass
class RotationWitness:
    """
    Unitaries (U on the channel output, V on the channel input) found by the search.

    ``optimizer_trace`` holds one ``(restart_index, iterations, best_value)``
    entry per restart that was run.
    """

    u_out: np.ndarray
    v_in: np.ndarray
    achieved_root_fidelity: float
    certified: bool
    optimizer_trace: list[tuple[int, int, float]] = field(default_factory=list)
    target_fidelity: float = 0.0

    def unitarity_residual(self) -> float:
        residuals = [max_abs(dagger(W) @ W - np.eye(W.shape[0])) for W in (self.u_out, self.v_in)]
        return max(residuals)

    def to_dict(self) -> dict:
        return {
            "achieved_root_fidelity": self.achieved_root_fidelity,
            "certified": self.certified,
            "target_fidelity": self.target_fidelity,
            "restarts_run": len(self.optimizer_trace),
            "optimizer_trace": [list(entry) for entry in self.optimizer_trace],
        }


@dataclass
class UnitarySearchResult:
    unitaries: list[np.ndarray]
    best_value: float
    trace: list[tuple[int, int, float]]
    stopped_early: bool = False


def petz_map(sigma, N: QuantumChannel) -> QuantumChannel:
    """
    Petz recovery channel of ``sigma`` and ``N`` (output space of N -> input space).

    Completeness is checked against the projector onto supp N(sigma) rather than
    the identity.

    Raises:
        ShapeMismatch: sigma does not live on the channel input
    """
    S = validate_psd(sigma).matrix
    if S.shape[0] != N.dim_in:
        raise ShapeMismatch("sigma does not match the channel input", sigma_dim=S.shape[0], dim_in=N.dim_in)
    N_sigma = apply(N, S)
    sqrt_sigma = mat_func(S, "sqrt")
    inv_sqrt_out = mat_func(N_sigma, "inv_sqrt")
    kraus = [sqrt_sigma @ dagger(K) @ inv_sqrt_out for K in N.kraus]
    return make_channel(
        kraus,
        tol=get_config().petz_completeness_tol,
        input_support=support_projector(N_sigma),
    )


def checked_marginal(sigma_ab: np.ndarray, shape: SpaceShape, keep: Sequence[str]) -> np.ndarray:
    sigma_b = partial_trace(sigma_ab, shape, keep=keep)
    lam = eigh(sigma_b).eigenvalues
    tol = default_support_tol(lam)
    if lam[-1] <= tol:
        raise SingularMarginal(
            "retained marginal is not positive definite",
            min_eigenvalue=float(lam[-1]),
            support_tol=tol,
            kept=list(keep),
        )
    return sigma_b


def petz_partial_trace(sigma_ab, shape: SpaceShape, traced: Sequence[str] = None) -> QuantumChannel:
    """
    Petz recovery channel for the partial trace over ``traced`` (default: the first factor).

    X_B -> sigma_AB^{1/2} (sigma_B^{-1/2} X_B sigma_B^{-1/2} (x) I_A) sigma_AB^{1/2},
    with Kraus operators sigma_AB^{1/2} (|j>_A (x) sigma_B^{-1/2}).

    Raises:
        SingularMarginal: sigma_B has an eigenvalue at or below support_tol
    """
    traced = [shape.labels[0]] if traced is None else list(traced)
    keep = shape.complement(traced)
    S = validate_psd(sigma_ab).matrix
    if S.shape[0] != shape.total_dim:
        raise ShapeMismatch("state does not match shape", operator_dim=S.shape[0], shape_dims=shape.dims)
    sigma_b = checked_marginal(S, shape, keep)

    sqrt_ab = mat_func(S, "sqrt")
    inv_sqrt_b = mat_func(sigma_b, "inv_sqrt")
    lifts = [dagger(K) for K in partial_trace_channel(shape, traced).kraus]
    kraus = [sqrt_ab @ E @ inv_sqrt_b for E in lifts]
    return make_channel(kraus, tol=get_config().petz_completeness_tol)


def petz_partial_trace_apply(sigma_ab, shape: SpaceShape, X, traced: Sequence[str] = None) -> np.ndarray:
    """Closed-form sigma_AB^{1/2} sigma_B^{-1/2} X sigma_B^{-1/2} sigma_AB^{1/2} with identity lifts."""
    traced = [shape.labels[0]] if traced is None else list(traced)
    keep = shape.complement(traced)
    S = as_matrix(sigma_ab)
    sigma_b = checked_marginal(S, shape, keep)
    inv_sqrt_b = mat_func(sigma_b, "inv_sqrt")
    middle = embed(inv_sqrt_b @ as_matrix(X) @ inv_sqrt_b, shape, keep)
    sqrt_ab = mat_func(S, "sqrt")
    return sqrt_ab @ middle @ sqrt_ab


def rotated_petz_apply(sigma, N: QuantumChannel, w: RotationWitness, X, petz: QuantumChannel = None) -> np.ndarray:
    """V R(U X U^dagger) V^dagger."""
    petz = petz_map(sigma, N) if petz is None else petz
    M = as_matrix(X)
    if w.u_out.shape != (petz.dim_in, petz.dim_in) or w.v_in.shape != (petz.dim_out, petz.dim_out):
        raise ShapeMismatch(
            "witness unitaries do not match the recovery map",
            u_dim=w.u_out.shape[0],
            v_dim=w.v_in.shape[0],
        )
    rotated_in = w.u_out @ M @ dagger(w.u_out)
    return w.v_in @ apply(petz, rotated_in) @ dagger(w.v_in)


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of d x d Hermitian matrices, shape (d*d, d, d)."""
    basis = []
    for k in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[k, k] = 1.0
        basis.append(E)
    for j in range(d):
        for k in range(j + 1, d):
            S = np.zeros((d, d), dtype=complex)
            S[j, k] = S[k, j] = 1 / math.sqrt(2)
            A = np.zeros((d, d), dtype=complex)
            A[j, k] = -1j / math.sqrt(2)
            A[k, j] = 1j / math.sqrt(2)
            basis.extend([S, A])
    return np.stack(basis)


def _seed_int(seed: Seed) -> int:
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(2**63))
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.generate_state(1, dtype=np.uint64)[0])
    if isinstance(seed, (list, tuple)):
        return int(np.random.SeedSequence(list(seed)).generate_state(1, dtype=np.uint64)[0])
    return int(seed)


def _restart_seed(seed: Seed, restart: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([_seed_int(seed), restart])


def maximize_over_unitaries(
    objective: Callable[[list[np.ndarray]], float],
    dims: Sequence[int],
    budget: OptimizerBudget = None,
    seed: Seed = 0,
    stop_at: Optional[float] = None,
) -> UnitarySearchResult:
    """
    Maximize ``objective`` over a tuple of unitaries of the given dimensions.

    Args:
        objective: Callable taking one unitary per entry of ``dims``
        dims: Dimension of each unitary
        budget: Restarts and iterations per restart
        seed: Seed for the random starting points of restarts 1..n
        stop_at: Stop as soon as a value at or above this is reached

    Returns:
        Best unitaries found, their value and the per-restart trace
    """
    budget = OptimizerBudget.from_config() if budget is None else budget
    bases = [hermitian_basis(d) for d in dims]
    sizes = [len(b) for b in bases]
    n_params = sum(sizes)
    h = budget.fd_step

    def move(current: list[np.ndarray], theta: np.ndarray) -> list[np.ndarray]:
        moved, offset = [], 0
        for U, basis, size in zip(current, bases, sizes):
            H = np.einsum("k,kij->ij", theta[offset:offset + size], basis)
            moved.append(U @ expm(1j * H))
            offset += size
        return moved

    best_unitaries = [np.eye(d, dtype=complex) for d in dims]
    best_value = -math.inf
    trace: list[tuple[int, int, float]] = []

    for restart in range(max(budget.restarts, 1)):
        if restart == 0:
            current = [np.eye(d, dtype=complex) for d in dims]
        else:
            rng = np.random.Generator(np.random.Philox(_restart_seed(seed, restart)))
            current = [random_unitary(d, rng) for d in dims]
        value = objective(current)
        step = 1.0
        iterations = 0

        while iterations < budget.iterations and not (stop_at is not None and value >= stop_at):
            grad = np.empty(n_params)
            for k in range(n_params):
                e = np.zeros(n_params)
                e[k] = h
                grad[k] = (objective(move(current, e)) - value) / h
            slope = float(grad @ grad)
            if slope < GRADIENT_FLOOR:
                break

            accepted = False
            for _ in range(MAX_BACKTRACKS):
                candidate = move(current, step * grad)
                candidate_value = objective(candidate)
                if candidate_value >= value + ARMIJO_C * step * slope:
                    accepted = True
                    break
                step /= 2
            iterations += 1
            if not accepted:
                break
            current, value = candidate, candidate_value
            step = min(step * 2, 10.0)

        trace.append((restart, iterations, float(value)))
        logger.debug("Restart finished", restart=restart, iterations=iterations, value=value)
        if value > best_value:
            best_value, best_unitaries = value, current
        if stop_at is not None and best_value >= stop_at:
            return UnitarySearchResult(best_unitaries, float(best_value), trace, stopped_early=True)

    return UnitarySearchResult(best_unitaries, float(best_value), trace)


def certification_threshold(delta_d: float) -> float:
    """2^{-Delta D}, the fidelity a certifying witness must reach."""
    return 0.0 if math.isinf(delta_d) else 2.0 ** (-delta_d)


def relative_entropy_gap(rho, sigma, N: QuantumChannel) -> float:
    """D(rho||sigma) - D(N(rho)||N(sigma)) in bits (inf when D(rho||sigma) is)."""
    outer = rel_entropy(rho, sigma).value
    if math.isinf(outer):
        return math.inf
    return outer - rel_entropy(apply(N, as_matrix(rho)), apply(N, as_matrix(sigma))).value


@performance_monitor(operation="optimize_rotation")
def optimize_rotation(
    rho,
    sigma,
    N: QuantumChannel,
    budget: OptimizerBudget = None,
    seed: Seed = 0,
    petz: QuantumChannel = None,
    stop_when_certified: bool = True,
) -> RotationWitness:
    """
    Search unitaries U (output of N) and V (input of N) maximizing
    sqrt F(rho, V R(U N(rho) U^dagger) V^dagger).

    The witness is certified when its fidelity reaches 2^{-Delta D} - cert_tol.
    Failure to certify is reported on the witness, never raised. ``petz`` may
    carry a prebuilt recovery channel (the partial-trace form, for instance).
    """
    budget = OptimizerBudget.from_config() if budget is None else budget
    cert_tol = get_config().cert_tol
    R = as_matrix(rho)
    petz = petz_map(sigma, N) if petz is None else petz
    N_rho = apply(N, R)

    delta_d = relative_entropy_gap(R, sigma, N)
    target = certification_threshold(delta_d)
    stop_at = math.sqrt(max(target - cert_tol, 0.0)) if stop_when_certified else None

    def objective(unitaries: list[np.ndarray]) -> float:
        U, V = unitaries
        recovered = V @ apply(petz, U @ N_rho @ dagger(U)) @ dagger(V)
        return root_fidelity(R, recovered)

    result = maximize_over_unitaries(objective, [N.dim_out, N.dim_in], budget, seed, stop_at=stop_at)
    achieved = result.best_value
    certified = achieved**2 >= target - cert_tol
    track_optimizer_run(len(result.trace), sum(entry[1] for entry in result.trace), achieved, certified)
    if not certified:
        logger.info("Rotation witness not certified", achieved=achieved, target=target, delta_d=delta_d)

    U, V = result.unitaries
    return RotationWitness(
        u_out=U,
        v_in=V,
        achieved_root_fidelity=float(achieved),
        certified=bool(certified),
        optimizer_trace=result.trace,
        target_fidelity=float(target),
    )
