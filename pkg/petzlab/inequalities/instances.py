"""
Instance families for the checkers.

Every checker consumes one of six instance kinds. Samplers exist for three
families:

* ``random``: full-rank Ginibre states and Haar-dilated channels;
* ``markov``: saturating instances (rho = sigma, omega_AC (x) omega_B,
  identical ensemble members, unitary lemma operators);
* ``classical``: all operators diagonal, channels built from stochastic
  matrices so outputs stay diagonal.

Instances serialize to plain dicts of encoded operators so a persisted
counterexample can be re-evaluated bit for bit.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np

from ..channels import QuantumChannel, make_channel, random_channel, random_classical_channel
from ..errors import InvalidConfig
from ..opmath import SpaceShape
from ..states import (
    Ensemble,
    ginibre,
    make_rng,
    product_state,
    random_density,
    random_diagonal_density,
    random_projector,
    random_psd,
    random_unitary,
    validate_density,
)
from ..store import decode_operator, encode_operator
from .report import InequalityId

FAMILIES = ("random", "markov", "classical")
ENSEMBLE_SIZE = 3


class InstanceKind(str, Enum):
    CHANNEL = "channel"
    BIPARTITE = "bipartite"
    TRIPARTITE = "tripartite"
    ENSEMBLE = "ensemble"
    JOINT = "joint"
    LEMMA = "lemma"


@dataclass
class ChannelInstance:
    """rho, sigma on the channel input and a channel N."""

    rho: np.ndarray
    sigma: np.ndarray
    channel: QuantumChannel
    kind: InstanceKind = InstanceKind.CHANNEL

    @property
    def dims(self) -> list[int]:
        return [self.channel.dim_in, self.channel.dim_out]

    def to_payload(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "rho": encode_operator(self.rho),
            "sigma": encode_operator(self.sigma),
            "kraus": [encode_operator(K) for K in self.channel.kraus],
        }


@dataclass
class BipartiteInstance:
    """rho_AB, sigma_AB on a two-factor shape; the first factor is the one traced out."""

    rho: np.ndarray
    sigma: np.ndarray
    shape: SpaceShape
    kind: InstanceKind = InstanceKind.BIPARTITE

    @property
    def dims(self) -> list[int]:
        return self.shape.dims

    def to_payload(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "shape": self.shape.to_dict(),
            "rho": encode_operator(self.rho),
            "sigma": encode_operator(self.sigma),
        }


@dataclass
class TripartiteInstance:
    """omega on shape (A, B, C)."""

    omega: np.ndarray
    shape: SpaceShape
    kind: InstanceKind = InstanceKind.TRIPARTITE

    @property
    def dims(self) -> list[int]:
        return self.shape.dims

    def to_payload(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "shape": self.shape.to_dict(), "omega": encode_operator(self.omega)}


@dataclass
class EnsembleInstance:
    """Ensemble of bipartite states on shape (A, B)."""

    ensemble: Ensemble
    kind: InstanceKind = InstanceKind.ENSEMBLE

    @property
    def shape(self) -> SpaceShape:
        return self.ensemble.shape

    @property
    def dims(self) -> list[int]:
        return self.shape.dims

    def to_payload(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "shape": self.shape.to_dict(),
            "probs": [float(p) for p in self.ensemble.probs],
            "members": [encode_operator(m.matrix) for m in self.ensemble.members],
        }


@dataclass
class JointInstance:
    """Paired ensembles {p(x), rho_x} and {p(x), sigma_x}."""

    probs: np.ndarray
    rhos: list[np.ndarray]
    sigmas: list[np.ndarray]
    kind: InstanceKind = InstanceKind.JOINT

    @property
    def dims(self) -> list[int]:
        return [self.rhos[0].shape[0]]

    def rho_bar(self) -> np.ndarray:
        return sum(p * r for p, r in zip(self.probs, self.rhos))

    def sigma_bar(self) -> np.ndarray:
        return sum(p * s for p, s in zip(self.probs, self.sigmas))

    def to_payload(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "probs": [float(p) for p in self.probs],
            "rhos": [encode_operator(r) for r in self.rhos],
            "sigmas": [encode_operator(s) for s in self.sigmas],
        }


@dataclass
class LemmaInstance:
    """PSD rho, sigma and an operator family (one W for conjugation, a resolution for decomposition)."""

    rho: np.ndarray
    sigma: np.ndarray
    family: list[np.ndarray] = field(default_factory=list)
    kind: InstanceKind = InstanceKind.LEMMA

    @property
    def dims(self) -> list[int]:
        return [self.rho.shape[0]]

    def to_payload(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "rho": encode_operator(self.rho),
            "sigma": encode_operator(self.sigma),
            "family": [encode_operator(W) for W in self.family],
        }


INSTANCE_KIND = {
    InequalityId.MONO_CHANNEL: InstanceKind.CHANNEL,
    InequalityId.MONO_CHANNEL_ROTATED: InstanceKind.CHANNEL,
    InequalityId.BURES_5: InstanceKind.CHANNEL,
    InequalityId.CONJ_12: InstanceKind.CHANNEL,
    InequalityId.MONO_PT: InstanceKind.BIPARTITE,
    InequalityId.MONO_PT_ROTATED: InstanceKind.BIPARTITE,
    InequalityId.ALT_BOUND: InstanceKind.BIPARTITE,
    InequalityId.BURES_3: InstanceKind.BIPARTITE,
    InequalityId.CONJ_13: InstanceKind.BIPARTITE,
    InequalityId.SSA: InstanceKind.TRIPARTITE,
    InequalityId.BURES_1: InstanceKind.TRIPARTITE,
    InequalityId.CONJ_15: InstanceKind.TRIPARTITE,
    InequalityId.REDUCTION_SSA: InstanceKind.TRIPARTITE,
    InequalityId.CONCAVITY: InstanceKind.ENSEMBLE,
    InequalityId.BURES_2: InstanceKind.ENSEMBLE,
    InequalityId.CONJ_16: InstanceKind.ENSEMBLE,
    InequalityId.REDUCTION_CQ: InstanceKind.ENSEMBLE,
    InequalityId.REDUCTION_BLOCKS: InstanceKind.ENSEMBLE,
    InequalityId.JOINT_CONVEXITY: InstanceKind.JOINT,
    InequalityId.BURES_4: InstanceKind.JOINT,
    InequalityId.CONJ_14: InstanceKind.JOINT,
    InequalityId.LEMMA_B2: InstanceKind.LEMMA,
    InequalityId.LEMMA_B6: InstanceKind.LEMMA,
    InequalityId.LEMMA_B7: InstanceKind.LEMMA,
}


def _dim(dims: Sequence[int], i: int) -> int:
    return int(dims[i]) if i < len(dims) else int(dims[-1])


def _state(family: str, dim: int, rng: np.random.Generator) -> np.ndarray:
    if family == "classical":
        return random_diagonal_density(dim, rng).matrix
    return random_density(dim, seed=rng).matrix


def sample_channel_instance(family: str, dims: Sequence[int], rng: np.random.Generator) -> ChannelInstance:
    d_in, d_out = _dim(dims, 0), _dim(dims, 1)
    sigma = _state(family, d_in, rng)
    rho = sigma.copy() if family == "markov" else _state(family, d_in, rng)
    if family == "classical":
        channel = random_classical_channel(d_in, d_out, rng)
    else:
        channel = random_channel(d_in, d_out, seed=rng)
    return ChannelInstance(rho=rho, sigma=sigma, channel=channel)


def sample_bipartite_instance(family: str, dims: Sequence[int], rng: np.random.Generator) -> BipartiteInstance:
    shape = SpaceShape.of(A=_dim(dims, 0), B=_dim(dims, 1))
    sigma = _state(family, shape.total_dim, rng)
    rho = sigma.copy() if family == "markov" else _state(family, shape.total_dim, rng)
    return BipartiteInstance(rho=rho, sigma=sigma, shape=shape)


def sample_tripartite_instance(family: str, dims: Sequence[int], rng: np.random.Generator) -> TripartiteInstance:
    shape = SpaceShape.of(A=_dim(dims, 0), B=_dim(dims, 1), C=_dim(dims, 2))
    if family == "markov":
        omega_ac = random_density(shape.dim_of("A") * shape.dim_of("C"), seed=rng).matrix
        omega_b = random_density(shape.dim_of("B"), seed=rng).matrix
        omega = product_state({"A,C": omega_ac, "B": omega_b}, shape).matrix
    else:
        omega = _state(family, shape.total_dim, rng)
    return TripartiteInstance(omega=omega, shape=shape)


def sample_ensemble_instance(family: str, dims: Sequence[int], rng: np.random.Generator) -> EnsembleInstance:
    shape = SpaceShape.of(A=_dim(dims, 0), B=_dim(dims, 1))
    probs = rng.dirichlet(np.ones(ENSEMBLE_SIZE))
    if family == "markov":
        member = random_density(shape.total_dim, seed=rng)
        members = (member,) * ENSEMBLE_SIZE
    else:
        members = tuple(validate_density(_state(family, shape.total_dim, rng)) for _ in range(ENSEMBLE_SIZE))
    return EnsembleInstance(ensemble=Ensemble(probs=probs, members=members, shape=shape))


def sample_joint_instance(family: str, dims: Sequence[int], rng: np.random.Generator) -> JointInstance:
    d = _dim(dims, 0)
    probs = rng.dirichlet(np.ones(ENSEMBLE_SIZE))
    sigmas = [_state(family, d, rng) for _ in range(ENSEMBLE_SIZE)]
    if family == "markov":
        rhos = [s.copy() for s in sigmas]
    else:
        rhos = [_state(family, d, rng) for _ in range(ENSEMBLE_SIZE)]
    return JointInstance(probs=probs, rhos=rhos, sigmas=sigmas)


def resolution_family(dim: int, size: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Operators W_1..W_k with sum W_d = I: {P, I - P} for size 2, Ginibre draws completed by I - sum otherwise."""
    if size == 2:
        P = random_projector(dim, max(1, dim // 2), rng)
        return [P, np.eye(dim) - P]
    family = [ginibre(rng, dim, dim) / np.sqrt(dim) for _ in range(size - 1)]
    family.append(np.eye(dim) - sum(family))
    return family


def sample_lemma_instance(
    family: str, dims: Sequence[int], rng: np.random.Generator, inequality_id: InequalityId = InequalityId.LEMMA_B7
) -> LemmaInstance:
    d = _dim(dims, 0)
    if family == "classical":
        rho = random_diagonal_density(d, rng).matrix * rng.uniform(0.2, 3.0)
        sigma = random_diagonal_density(d, rng).matrix * rng.uniform(0.2, 3.0)
    else:
        sigma = random_psd(d, seed=rng).matrix
        rho = sigma.copy() if family == "markov" else random_psd(d, seed=rng).matrix

    inequality_id = InequalityId(inequality_id)
    if inequality_id == InequalityId.LEMMA_B6:
        W = random_unitary(d, rng) if family == "markov" else ginibre(rng, d, d)
        return LemmaInstance(rho=rho, sigma=sigma, family=[W])
    if inequality_id == InequalityId.LEMMA_B7:
        size = 2 if family != "random" else int(rng.integers(2, 4))
        return LemmaInstance(rho=rho, sigma=sigma, family=resolution_family(d, size, rng))
    return LemmaInstance(rho=rho, sigma=sigma)


_SAMPLERS = {
    InstanceKind.CHANNEL: sample_channel_instance,
    InstanceKind.BIPARTITE: sample_bipartite_instance,
    InstanceKind.TRIPARTITE: sample_tripartite_instance,
    InstanceKind.ENSEMBLE: sample_ensemble_instance,
    InstanceKind.JOINT: sample_joint_instance,
}


def sample_instance(inequality_id: InequalityId, family: str, dims: Sequence[int], seed=0):
    """Draw one instance of the kind ``inequality_id`` consumes."""
    if family not in FAMILIES:
        raise InvalidConfig(f"unknown instance family: {family}", family=family, families=list(FAMILIES))
    if not dims:
        raise InvalidConfig("at least one dimension is required")
    rng = make_rng(seed)
    inequality_id = InequalityId(inequality_id)
    kind = INSTANCE_KIND[inequality_id]
    if kind == InstanceKind.LEMMA:
        return sample_lemma_instance(family, dims, rng, inequality_id)
    return _SAMPLERS[kind](family, dims, rng)


def instance_from_payload(payload: dict[str, Any]):
    """Rebuild an instance from ``to_payload`` output."""
    kind = InstanceKind(payload["kind"])
    if kind == InstanceKind.CHANNEL:
        return ChannelInstance(
            rho=decode_operator(payload["rho"]),
            sigma=decode_operator(payload["sigma"]),
            channel=make_channel([decode_operator(K) for K in payload["kraus"]]),
        )
    if kind == InstanceKind.BIPARTITE:
        return BipartiteInstance(
            rho=decode_operator(payload["rho"]),
            sigma=decode_operator(payload["sigma"]),
            shape=SpaceShape.from_pairs(payload["shape"].items()),
        )
    if kind == InstanceKind.TRIPARTITE:
        return TripartiteInstance(
            omega=decode_operator(payload["omega"]),
            shape=SpaceShape.from_pairs(payload["shape"].items()),
        )
    if kind == InstanceKind.ENSEMBLE:
        members = tuple(validate_density(decode_operator(m)) for m in payload["members"])
        shape = SpaceShape.from_pairs(payload["shape"].items())
        return EnsembleInstance(ensemble=Ensemble(probs=np.array(payload["probs"]), members=members, shape=shape))
    if kind == InstanceKind.JOINT:
        return JointInstance(
            probs=np.array(payload["probs"]),
            rhos=[decode_operator(r) for r in payload["rhos"]],
            sigmas=[decode_operator(s) for s in payload["sigmas"]],
        )
    return LemmaInstance(
        rho=decode_operator(payload["rho"]),
        sigma=decode_operator(payload["sigma"]),
        family=[decode_operator(W) for W in payload["family"]],
    )
