"""Sampling-based (1 + eps)-approximation for weighted k-means.

One trial builds k centers iteratively: draw N points by distance-weighted
sampling against the centers so far, pick an M-subset of the draw positions
(the candidate tuple), and add the weighted centroid of that sub-multiset as
the next center. The best center set over all trials and candidate tuples is
returned. With N = c1*k/eps^2, M = c2/eps and 2^k trials this is the
theoretical scheme; desk-scale runs shrink the constants and replace full
tuple enumeration with a uniform random tuple budget.

Everything is evaluated in batches of tuples: per iteration one (B, N)
uniform block turns into B rows of N categorical draws via a row-wise
inverse CDF, and a (B, n) min-distance cache prices all B partial center
sets at once. Per-trial random streams are derived from (master_seed, trial),
so results are independent of thread scheduling.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from wkmeans.core import (
    CenterSet,
    ClusteringResult,
    WeightedPointSet,
)
from wkmeans.sampling import RandomSource

__all__ = [
    "PtasParams",
    "CandidateTuple",
    "EnumerationInfeasible",
    "derive_params",
    "rescale_weights",
    "enumerate_or_sample_tuples",
    "run_trial",
    "solve",
]

DEFAULT_C1 = 800.0
DEFAULT_C2 = 100.0
DEFAULT_TUPLE_BUDGET = 2000
MAX_EXHAUSTIVE_TUPLES = 10_000_000
_CHUNK = 1024
_TUPLE_STREAM, _SAMPLE_STREAM = 0, 1


class EnumerationInfeasible(RuntimeError):
    """Exhaustive tuple enumeration exceeds the feasibility cutoff."""


@dataclass(frozen=True)
class PtasParams:
    """Solver parameters; N and M derive from the effective accuracy.

    With adjust_epsilon the working accuracy shrinks to
    eps / ((1 + eps/2) * k), which upgrades the guarantee from
    irreducible-instance-only to unconditional at the price of larger N, M.
    """

    k: int
    epsilon: float
    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2
    trials: int = 1
    tuple_budget: int | str = DEFAULT_TUPLE_BUDGET
    adjust_epsilon: bool = False
    share_samples: bool = False

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be positive")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be in (0, 1)")
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise ValueError("c1 and c2 must be positive")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if isinstance(self.tuple_budget, str):
            if self.tuple_budget != "exhaustive":
                raise ValueError("tuple_budget must be a positive int or 'exhaustive'")
        elif self.tuple_budget < 1:
            raise ValueError("tuple_budget must be a positive int or 'exhaustive'")
        if not self.N >= self.M >= 1:
            raise ValueError("derived N must be at least derived M (and M >= 1)")

    @property
    def epsilon_eff(self) -> float:
        if self.adjust_epsilon:
            return self.epsilon / ((1.0 + self.epsilon / 2.0) * self.k)
        return self.epsilon

    @property
    def N(self) -> int:
        return math.ceil(self.c1 * self.k / self.epsilon_eff**2)

    @property
    def M(self) -> int:
        return math.ceil(self.c2 / self.epsilon_eff)


@dataclass(frozen=True)
class CandidateTuple:
    """k subset selectors, each M strictly increasing positions into [0, N)."""

    selectors: np.ndarray

    def __post_init__(self) -> None:
        sel = np.atleast_2d(np.asarray(self.selectors, dtype=np.intp))
        if sel.ndim != 2:
            raise ValueError("selectors must be a (k, M) index array")
        if np.any(sel[:, 0] < 0) or np.any(np.diff(sel, axis=1) <= 0):
            raise ValueError("each selector must be strictly increasing")
        sel = sel.copy()
        sel.setflags(write=False)
        object.__setattr__(self, "selectors", sel)


def derive_params(
    k: int,
    epsilon: float,
    c1: float | None = None,
    c2: float | None = None,
    trials: int | None = None,
    tuple_budget: int | str | None = None,
    adjust_epsilon: bool | None = None,
    share_samples: bool | None = None,
) -> PtasParams:
    """Fill parameter defaults: theory constants and 2^k trials."""
    if k < 1:
        raise ValueError("k must be positive")
    return PtasParams(
        k=k,
        epsilon=epsilon,
        c1=DEFAULT_C1 if c1 is None else c1,
        c2=DEFAULT_C2 if c2 is None else c2,
        trials=2**k if trials is None else trials,
        tuple_budget=DEFAULT_TUPLE_BUDGET if tuple_budget is None else tuple_budget,
        adjust_epsilon=False if adjust_epsilon is None else adjust_epsilon,
        share_samples=False if share_samples is None else share_samples,
    )


def rescale_weights(P: WeightedPointSet) -> tuple[WeightedPointSet, float]:
    """Divide all weights by the minimum so every weight is >= 1.

    Returns the rescaled set and the scale; costs on the rescaled set times
    the scale recover costs on the original. Sampling probabilities, argmins,
    and centroids are unaffected.
    """
    scale = float(P.weights.min())
    if scale == 1.0:
        return P, 1.0
    return WeightedPointSet(P.coords, P.weights / scale), scale


def _exhaustive_count(params: PtasParams) -> int:
    return math.comb(params.N, params.M) ** params.k


def _selector_chunks(
    params: PtasParams, gen: np.random.Generator | None
) -> Iterator[np.ndarray]:
    """Yield (B, k, M) selector blocks, B <= _CHUNK, in a fixed order.

    Exhaustive mode streams every tuple once, lexicographically. Random mode
    draws uniform M-subsets per tuple position: the M smallest of N uniform
    keys, a standard trick that stays inside the uniform-doubles policy.
    """
    N, M, k = params.N, params.M, params.k
    if params.tuple_budget == "exhaustive":
        if _exhaustive_count(params) > MAX_EXHAUSTIVE_TUPLES:
            raise EnumerationInfeasible("enumeration infeasible; set tuple_budget")
        combos = itertools.combinations(range(N), M)
        if k == 1:
            # product() would materialize all C(N, M) combinations; stream.
            tuples = ((c,) for c in combos)
        else:
            tuples = itertools.product(combos, repeat=k)
        buf: list = []
        for t in tuples:
            buf.append(t)
            if len(buf) == _CHUNK:
                yield np.array(buf, dtype=np.intp)
                buf = []
        if buf:
            yield np.array(buf, dtype=np.intp)
        return
    assert gen is not None
    remaining = int(params.tuple_budget)
    while remaining > 0:
        b = min(_CHUNK, remaining)
        keys = gen.random((b, k, N))
        sel = np.argpartition(keys, M - 1, axis=2)[:, :, :M]
        sel.sort(axis=2)
        yield sel.astype(np.intp)
        remaining -= b


def enumerate_or_sample_tuples(
    params: PtasParams, rng: RandomSource
) -> Iterator[CandidateTuple]:
    """Stream candidate tuples: all of them, or a budget of random ones."""
    gen = None if params.tuple_budget == "exhaustive" else rng.generator()
    for block in _selector_chunks(params, gen):
        for row in block:
            yield CandidateTuple(row)


def _run_tuple_batch(
    coords: np.ndarray,
    weights: np.ndarray,
    selectors: np.ndarray,
    params: PtasParams,
    gen: np.random.Generator,
    shared_u: np.ndarray | None = None,
    draw_n: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run all k iterations for a (B, k, M) selector block.

    Returns (costs (B,), centers (B, k, d)) on the given point set. Each
    iteration consumes one (B, N) uniform block (or reuses the trial-shared
    (k, N) block), converts it to categorical draws per row with an offset
    inverse-CDF over concatenated prefix sums, gathers each row's selected
    M-sub-multiset, and folds the new weighted centroid into a per-row
    min-distance cache. Rows whose distribution has zero mass already sit on
    every point; they repeat their previous center, consuming the same draws.

    draw_n shrinks the per-row sample to that many draws. A uniform M-subset
    of N independent draws is distributed exactly like M independent draws,
    so the default budgeted mode passes draw_n=M with identity selectors and
    skips the draws no selector would touch. Modes where tuples share one
    realized sample (exhaustive, share_samples) must keep draw_n=None.
    """
    B = selectors.shape[0]
    n, d = coords.shape
    N, M, k = params.N, params.M, params.k
    if draw_n is not None:
        assert shared_u is None
        N = draw_n
    p2 = np.einsum("ij,ij->i", coords, coords)
    row_off = (np.arange(B) * n)[:, None]
    cache: np.ndarray | None = None
    centers = np.empty((B, k, d))
    for i in range(k):
        if cache is None:
            sw = np.broadcast_to(weights[None, :], (B, n))
        else:
            sw = weights[None, :] * cache
        cum = np.cumsum(sw, axis=1)
        totals = cum[:, -1]
        dead = totals <= 0.0
        if shared_u is not None:
            u = np.broadcast_to(shared_u[i][None, :], (B, N))
        else:
            u = gen.random((B, N))
        shift = np.concatenate(([0.0], np.cumsum(totals[:-1])))
        # maximum.accumulate irons out one-ulp inversions at row seams so the
        # flat array is sorted; draws land in their own row.
        flat_cum = np.maximum.accumulate((cum + shift[:, None]).ravel())
        targets = (u * totals[:, None] + shift[:, None]).ravel()
        cols = np.searchsorted(flat_cum, targets, side="right").reshape(B, N)
        cols -= row_off
        np.clip(cols, 0, n - 1, out=cols)
        idx = np.take_along_axis(cols, selectors[:, i, :], axis=1)
        tw = weights[idx]
        tot = tw.sum(axis=1)
        ci = np.einsum("bm,bmd->bd", tw, coords[idx]) / tot[:, None]
        if np.any(dead):
            ci[dead] = centers[dead, i - 1]
        centers[:, i, :] = ci
        d2 = p2[None, :] - 2.0 * (ci @ coords.T) + np.einsum("bd,bd->b", ci, ci)[:, None]
        np.maximum(d2, 0.0, out=d2)
        cache = d2 if cache is None else np.minimum(cache, d2)
    assert cache is not None
    return cache @ weights, centers


def run_trial(
    P: WeightedPointSet,
    tup: CandidateTuple,
    params: PtasParams,
    rng: RandomSource,
) -> ClusteringResult:
    """Build one k-center candidate from a single tuple and fresh samples."""
    if tup.selectors.shape != (params.k, params.M):
        raise ValueError("tuple shape does not match params (k, M)")
    rescaled, _ = rescale_weights(P)
    gen = rng.generator()
    shared = gen.random((params.k, params.N)) if params.share_samples else None
    _, centers = _run_tuple_batch(
        rescaled.coords, rescaled.weights, tup.selectors[None], params, gen, shared
    )
    meta = {"solver": "ptas", "tuples_evaluated": 1}
    return ClusteringResult.from_centers(P, CenterSet(centers[0]), meta)


def _identity_chunks(params: PtasParams) -> Iterator[np.ndarray]:
    """Selector blocks for the fused budget mode: every selector is 0..M-1.

    With fresh draws per tuple the selected positions of an iid sample are
    themselves iid, so the subset choice carries no information and the
    batch can draw exactly M points per iteration (draw_n=M).
    """
    ident = np.arange(params.M, dtype=np.intp)
    remaining = int(params.tuple_budget)
    while remaining > 0:
        b = min(_CHUNK, remaining)
        yield np.broadcast_to(ident, (b, params.k, params.M))
        remaining -= b


def _best_for_trial(
    rescaled: WeightedPointSet, params: PtasParams, master: RandomSource, t: int
) -> tuple[float, np.ndarray, int]:
    """Minimum-cost candidate over the tuple stream of trial t."""
    sample_gen = master.derive(_SAMPLE_STREAM, t).generator()
    fused = params.tuple_budget != "exhaustive" and not params.share_samples
    if fused:
        chunks = _identity_chunks(params)
        draw_n = params.M
    else:
        tuple_gen = master.derive(_TUPLE_STREAM, t).generator()
        chunks = _selector_chunks(params, tuple_gen)
        draw_n = None
    shared = (
        sample_gen.random((params.k, params.N)) if params.share_samples else None
    )
    best_cost = math.inf
    best_centers: np.ndarray | None = None
    evaluated = 0
    for selectors in chunks:
        costs, centers = _run_tuple_batch(
            rescaled.coords,
            rescaled.weights,
            selectors,
            params,
            sample_gen,
            shared,
            draw_n,
        )
        j = int(np.argmin(costs))
        if float(costs[j]) < best_cost:
            best_cost = float(costs[j])
            best_centers = centers[j].copy()
        evaluated += selectors.shape[0]
    assert best_centers is not None
    return best_cost, best_centers, evaluated


def solve(
    P: WeightedPointSet,
    k: int,
    epsilon: float,
    overrides: dict | None = None,
    master_seed: int = 0,
    threads: int = 1,
) -> ClusteringResult:
    """Best center set over trials x tuples; deterministic in master_seed.

    Trials run as independent tasks on streams derived from
    (master_seed, trial), and the reduction scans trials in index order with
    a strict minimum, so the result is bit-identical for any thread count.
    When k is at least the number of distinct points the exact zero-cost
    placement on the distinct points is returned directly.
    """
    params = derive_params(k, epsilon, **(overrides or {}))
    distinct = np.unique(P.coords, axis=0)
    if k >= distinct.shape[0]:
        meta = {
            "solver": "ptas",
            "master_seed": master_seed,
            "note": "k >= distinct points; zero-cost placement",
        }
        return ClusteringResult.from_centers(P, CenterSet(distinct), meta)
    if params.tuple_budget == "exhaustive":
        # Surface infeasibility before any work is scheduled.
        if _exhaustive_count(params) > MAX_EXHAUSTIVE_TUPLES:
            raise EnumerationInfeasible("enumeration infeasible; set tuple_budget")

    rescaled, _ = rescale_weights(P)
    master = RandomSource(master_seed)

    def worker(t: int) -> tuple[float, np.ndarray, int]:
        return _best_for_trial(rescaled, params, master, t)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(worker, range(params.trials)))
    else:
        outcomes = [worker(t) for t in range(params.trials)]

    best_cost = math.inf
    best_centers: np.ndarray | None = None
    trial_costs = []
    evaluated = 0
    for cost, centers, count in outcomes:
        trial_costs.append(cost)
        evaluated += count
        if cost < best_cost:
            best_cost = cost
            best_centers = centers
    assert best_centers is not None
    meta = {
        "solver": "ptas",
        "epsilon": params.epsilon,
        "epsilon_eff": params.epsilon_eff,
        "N": params.N,
        "M": params.M,
        "trials": params.trials,
        "tuple_budget": params.tuple_budget,
        "tuples_evaluated": evaluated,
        "master_seed": master_seed,
        "trial_costs": trial_costs,
    }
    return ClusteringResult.from_centers(P, CenterSet(best_centers), meta)
