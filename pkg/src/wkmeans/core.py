"""Weighted point sets, center sets, and squared-Euclidean cost primitives.

Everything downstream (seeding, the sampling-based approximation scheme,
Lloyd refinement, the exact oracle, and the coverage solver) is built on the
handful of operations defined here. All functions are pure and operate on
immutable inputs; cost accumulation uses exactly rounded summation so results
do not depend on summation order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "WeightedPoint",
    "WeightedPointSet",
    "CenterSet",
    "ClusteringResult",
    "PointFileError",
    "nearest_center",
    "min_squared_distances",
    "weighted_cost",
    "weighted_centroid",
    "parallel_axis_rhs",
    "load_weighted_points",
    "save_weighted_points",
]


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class WeightedPoint:
    """A single point with a positive, finite weight."""

    coords: tuple[float, ...]
    weight: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        object.__setattr__(self, "weight", float(self.weight))
        if not math.isfinite(self.weight) or self.weight <= 0.0:
            raise ValueError(f"weight must be positive and finite, got {self.weight}")
        if not all(math.isfinite(c) for c in self.coords):
            raise ValueError("coordinates must be finite")


@dataclass(frozen=True)
class WeightedPointSet:
    """A nonempty set of points in R^d, each carrying a positive weight.

    `coords` has shape (n, d) and `weights` shape (n,); both are stored as
    read-only float64 arrays.
    """

    coords: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        coords = np.atleast_2d(np.asarray(self.coords, dtype=np.float64))
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if coords.ndim != 2 or coords.shape[0] == 0:
            raise ValueError("point set must be a nonempty (n, d) array")
        if weights.shape[0] != coords.shape[0]:
            raise ValueError(
                f"{weights.shape[0]} weights for {coords.shape[0]} points"
            )
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
            raise ValueError("weights must be positive and finite")
        object.__setattr__(self, "coords", _readonly(coords))
        object.__setattr__(self, "weights", _readonly(weights))

    @classmethod
    def from_points(cls, points: Iterable[WeightedPoint]) -> "WeightedPointSet":
        pts = list(points)
        if not pts:
            raise ValueError("empty subset")
        dims = {len(p.coords) for p in pts}
        if len(dims) != 1:
            raise ValueError("all points must share one dimension")
        return cls(
            np.array([p.coords for p in pts]),
            np.array([p.weight for p in pts]),
        )

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def total_weight(self) -> float:
        return math.fsum(self.weights.tolist())

    def point(self, i: int) -> WeightedPoint:
        return WeightedPoint(tuple(self.coords[i]), float(self.weights[i]))

    def subset(self, indices: Sequence[int]) -> "WeightedPointSet":
        """Sub-multiset by index; repeated indices contribute repeatedly."""
        idx = np.asarray(indices, dtype=np.intp)
        if idx.size == 0:
            raise ValueError("empty subset")
        return WeightedPointSet(self.coords[idx], self.weights[idx])

    @property
    def n_distinct(self) -> int:
        return np.unique(self.coords, axis=0).shape[0]


@dataclass(frozen=True)
class CenterSet:
    """An ordered list of k >= 1 centers in R^d, shape (k, d), read-only."""

    centers: np.ndarray

    def __post_init__(self) -> None:
        centers = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        if centers.shape[0] == 0:
            raise ValueError("no centers")
        if not np.all(np.isfinite(centers)):
            raise ValueError("centers must be finite")
        object.__setattr__(self, "centers", _readonly(centers))

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


def as_center_array(centers: "CenterSet | np.ndarray | Sequence | None") -> np.ndarray:
    """Normalize a center argument to a (k, d) float array; k may be 0."""
    if centers is None:
        return np.empty((0, 0))
    if isinstance(centers, CenterSet):
        return centers.centers
    arr = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    return arr


def _check_dims(d_points: int, centers: np.ndarray) -> None:
    if centers.shape[0] > 0 and centers.shape[1] != d_points:
        raise ValueError(
            f"dimension mismatch: points are {d_points}-d, centers are "
            f"{centers.shape[1]}-d"
        )


def nearest_center(p, centers) -> tuple[int, float]:
    """Index of the closest center to `p` and the squared distance to it.

    Exact ties are broken toward the lowest center index.
    """
    c = as_center_array(centers)
    if c.shape[0] == 0:
        raise ValueError("no centers")
    point = np.asarray(p, dtype=np.float64).ravel()
    _check_dims(point.shape[0], c)
    diffs = c - point
    d2 = np.einsum("ij,ij->i", diffs, diffs)
    idx = int(np.argmin(d2))
    return idx, float(d2[idx])


_POINT_CHUNK = 8192


def _pairwise_d2(pts: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Exact (n, k) squared distances, chunked to bound the (n, k, d) buffer.

    Computed from coordinate differences, not the inner-product expansion, so
    each entry is the correctly rounded square norm of the exact-ish diff;
    incremental caches recompute to bit-identical values.
    """
    n = pts.shape[0]
    out = np.empty((n, c.shape[0]))
    for lo in range(0, n, _POINT_CHUNK):
        hi = min(lo + _POINT_CHUNK, n)
        diffs = pts[lo:hi, None, :] - c[None, :, :]
        out[lo:hi] = np.einsum("nkd,nkd->nk", diffs, diffs)
    return out


def min_squared_distances(points: np.ndarray, centers) -> np.ndarray:
    """Per-point squared distance to the nearest center, shape (n,)."""
    c = as_center_array(centers)
    if c.shape[0] == 0:
        raise ValueError("no centers")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    _check_dims(pts.shape[1], c)
    return _pairwise_d2(pts, c).min(axis=1)


def assign_to_centers(points: np.ndarray, centers) -> np.ndarray:
    """Nearest-center index per point (lowest index on ties), shape (n,)."""
    c = as_center_array(centers)
    if c.shape[0] == 0:
        raise ValueError("no centers")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    _check_dims(pts.shape[1], c)
    return _pairwise_d2(pts, c).argmin(axis=1)


def weighted_cost(P: WeightedPointSet, centers) -> float:
    """Total cost sum_p w_p * min_c ||p - c||^2.

    Accumulated with math.fsum, so the value is the correctly rounded sum of
    the per-point terms and independent of their order.
    """
    c = as_center_array(centers)
    if c.shape[0] == 0:
        raise ValueError("no centers")
    _check_dims(P.dim, c)
    d2 = _pairwise_d2(P.coords, c).min(axis=1)
    return math.fsum((P.weights * d2).tolist())


def weighted_centroid(points, weights=None) -> np.ndarray:
    """Weight-averaged mean of a point set or an explicit (coords, weights) pair.

    The centroid is the unique single-center minimizer of the weighted
    squared-distance cost.
    """
    if isinstance(points, WeightedPointSet):
        coords, w = points.coords, points.weights
    else:
        coords = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if weights is None:
            raise ValueError("weights required when passing raw coordinates")
        w = np.asarray(weights, dtype=np.float64).ravel()
    if coords.shape[0] == 0 or w.shape[0] == 0:
        raise ValueError("empty subset")
    total = math.fsum(w.tolist())
    if total <= 0.0:
        raise ValueError("empty subset")
    sums = [math.fsum((w * coords[:, j]).tolist()) for j in range(coords.shape[1])]
    return np.array(sums) / total


def parallel_axis_rhs(P: WeightedPointSet, c) -> float:
    """Spread about the centroid plus total weight times centroid-to-c shift.

    Equals the single-center cost about `c`; used to cross-check
    `weighted_cost` rather than to compute costs.
    """
    point = np.asarray(c, dtype=np.float64).ravel()
    g = weighted_centroid(P)
    if point.shape[0] != g.shape[0]:
        raise ValueError(
            f"dimension mismatch: points are {g.shape[0]}-d, c is {point.shape[0]}-d"
        )
    diffs = P.coords - g
    spread = math.fsum((P.weights * np.einsum("ij,ij->i", diffs, diffs)).tolist())
    shift = P.total_weight * float(np.dot(point - g, point - g))
    return spread + shift


@dataclass(frozen=True)
class ClusteringResult:
    """Centers plus the induced assignment, cost, and solver provenance."""

    centers: CenterSet
    assignment: np.ndarray
    cost: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        a = np.asarray(self.assignment, dtype=np.intp)
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @classmethod
    def from_centers(
        cls, P: WeightedPointSet, centers, meta: dict | None = None
    ) -> "ClusteringResult":
        """Build a result with the assignment and cost recomputed from scratch."""
        cs = centers if isinstance(centers, CenterSet) else CenterSet(centers)
        assignment = assign_to_centers(P.coords, cs)
        return cls(cs, assignment, weighted_cost(P, cs), dict(meta or {}))


class PointFileError(ValueError):
    """Malformed weighted-point CSV; carries the 1-based offending line."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def load_weighted_points(path: str | Path) -> WeightedPointSet:
    """Read a weighted point set from CSV with header x1,...,xd,weight."""
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise PointFileError(1, "empty file")
        header = [h.strip() for h in header]
        if len(header) < 2 or header[-1] != "weight":
            raise PointFileError(1, "header must be x1,...,xd,weight")
        expected = [f"x{i + 1}" for i in range(len(header) - 1)]
        if header[:-1] != expected:
            raise PointFileError(
                1, f"coordinate columns must be {','.join(expected)}"
            )
        width = len(header)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != width:
                raise PointFileError(
                    lineno, f"expected {width} fields, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise PointFileError(lineno, f"bad number: {exc}") from None
    if not rows:
        raise PointFileError(2, "no data rows")
    data = np.array(rows)
    try:
        return WeightedPointSet(data[:, :-1], data[:, -1])
    except ValueError as exc:
        raise PointFileError(2, str(exc)) from None


def save_weighted_points(path: str | Path, P: WeightedPointSet) -> None:
    """Write a weighted point set as CSV; floats use shortest round-trip repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(P.dim)] + ["weight"])
        for i in range(P.n):
            writer.writerow(
                [repr(float(v)) for v in P.coords[i]] + [repr(float(P.weights[i]))]
            )
