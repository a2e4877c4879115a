"""Seeded randomness and distance-weighted sampling.

Two policies keep every run bit-reproducible:

* All randomness flows from a `RandomSource`, a counter-based generator
  addressed by (seed, stream path). Derived sources are independent of each
  other and of how many draws their siblings consumed.
* Samplers consume uniform doubles only (`Generator.random`), never integer
  or bounded draws, so the consumed stream layout is fixed and easy to audit.

Categorical draws are inverse-CDF over the running sum of the (unnormalized)
weights. With `fsum` totals, a draw is a deterministic function of the weight
vector and one uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wkmeans.core import WeightedPointSet, as_center_array, min_squared_distances

__all__ = [
    "RandomSource",
    "SamplingWeights",
    "DegenerateDistribution",
    "CostAlreadyZero",
    "sample_index",
    "sample_indices",
    "d2_weights",
    "d2_sample",
    "incremental_min_dist_update",
]


@dataclass(frozen=True)
class RandomSource:
    """Seeded, hierarchical source of `numpy` generators.

    `derive(*ids)` appends integer ids to the stream path, giving a child
    source whose output is unrelated to the parent's. Equal (seed, stream)
    always produce identical generators, regardless of platform or thread
    scheduling.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def derive(self, *ids: int) -> "RandomSource":
        return RandomSource(self.seed, self.stream + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(seq))


class DegenerateDistribution(ValueError):
    """All sampling weights are zero; no draw is defined."""


class CostAlreadyZero(Exception):
    """Every point sits on a current center, so distance sampling is moot."""


@dataclass(frozen=True)
class SamplingWeights:
    """Nonnegative, finite weight vector for categorical draws.

    A zero total is representable (`is_degenerate`); callers that need a draw
    must check or catch `DegenerateDistribution`.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64).ravel()
        if vals.size == 0:
            raise ValueError("empty weight vector")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0.0):
            raise ValueError("weights must be finite and nonnegative")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def total(self) -> float:
        return math.fsum(self.values.tolist())

    @property
    def is_degenerate(self) -> bool:
        return self.total == 0.0


def sample_index(weights: SamplingWeights, gen: np.random.Generator) -> int:
    """One categorical draw, index i with probability values[i] / total.

    Consumes exactly one uniform double. Inverse-CDF: the first index whose
    cumulative weight exceeds u * total.
    """
    total = weights.total
    if total <= 0.0:
        raise DegenerateDistribution("all sampling weights are zero")
    u = gen.random()
    cum = np.cumsum(weights.values)
    # Scale the uniform rather than the weights; cum[-1] may differ from the
    # fsum total by round-off, so clamp to the last index.
    idx = int(np.searchsorted(cum, u * total, side="right"))
    return min(idx, weights.values.size - 1)


def sample_indices(
    weights: SamplingWeights, count: int, gen: np.random.Generator
) -> np.ndarray:
    """`count` i.i.d. categorical draws (one uniform each), shape (count,)."""
    total = weights.total
    if total <= 0.0:
        raise DegenerateDistribution("all sampling weights are zero")
    if count < 0:
        raise ValueError("count must be nonnegative")
    u = gen.random(count)
    cum = np.cumsum(weights.values)
    idx = np.searchsorted(cum, u * total, side="right")
    return np.minimum(idx, weights.values.size - 1).astype(np.intp)


def d2_weights(P: WeightedPointSet, centers=None) -> SamplingWeights:
    """Distance-weighted sampling vector against the current centers.

    With no centers yet, entry p is the point weight w_p; otherwise it is
    w_p times the squared distance from p to its nearest center.
    """
    c = as_center_array(centers)
    if c.shape[0] == 0:
        return SamplingWeights(P.weights)
    return SamplingWeights(P.weights * min_squared_distances(P.coords, c))


def d2_sample(
    P: WeightedPointSet, centers, count: int, gen: np.random.Generator
) -> np.ndarray:
    """Draw `count` point indices distance-weighted against `centers`.

    All draws are independent, with replacement, from the distribution induced
    by the fixed center set (centers are not updated between draws). Raises
    CostAlreadyZero when every point already coincides with a center, i.e. the
    induced distribution has zero mass.
    """
    if count < 1:
        raise ValueError("count must be positive")
    w = d2_weights(P, centers)
    try:
        return sample_indices(w, count, gen)
    except DegenerateDistribution:
        raise CostAlreadyZero(
            "all points lie on current centers; cost is already zero"
        ) from None


def incremental_min_dist_update(
    cache: np.ndarray, points: np.ndarray, new_center: np.ndarray
) -> np.ndarray:
    """Fold one more center into a per-point min squared-distance cache.

    Returns elementwise min(cache, ||p - new_center||^2); does not mutate
    the cache.
    """
    diffs = np.atleast_2d(points) - np.asarray(new_center, dtype=np.float64)
    d2 = np.einsum("ij,ij->i", diffs, diffs)
    return np.minimum(cache, d2)
