"""Continuous coverage over a convex region via weighted clustering.

Pipeline: normalize an importance density over a convex polygon, overlay a
square grid, clip each square to the region, and integrate per cell to get a
weighted point set of cell centers of mass. A weighted k-means solver places
the sensors; the coverage cost (integral of density times squared distance
to the nearest sensor) then splits into the discrete clustering cost plus the
cells' moments of inertia about their centers of mass. That identity is exact
when no Voronoi boundary cuts through a cell, and the residual gap is
reported, never hidden.

All integrals use a fixed-order product Gauss rule on a fan triangulation
(exact for polynomial integrands up to degree 2q-2, so cell masses, centers
of mass, and inertias are quadrature-exact for uniform density); a seeded
Monte-Carlo mode exists for rough densities.
"""

from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.stats import multivariate_normal

from wkmeans import baselines, ptas
from wkmeans.core import (
    CenterSet,
    ClusteringResult,
    WeightedPointSet,
    as_center_array,
    assign_to_centers,
    save_weighted_points,
    weighted_cost,
)
from wkmeans.sampling import RandomSource

__all__ = [
    "UniformDensity",
    "GaussianMixtureDensity",
    "RasterDensity",
    "SensorRegion",
    "Cell",
    "Discretization",
    "DecompositionReport",
    "PlacementReport",
    "RegionFileError",
    "normalize_density",
    "clip_cell",
    "discretize",
    "coverage_cost",
    "decomposition_check",
    "place_sensors",
    "load_region",
]

DROP_WEIGHT = 1e-12
INERTIA_WARN_FRACTION = 0.10


@dataclass(frozen=True)
class UniformDensity:
    level: float = 1.0

    def __post_init__(self) -> None:
        if not self.level > 0.0:
            raise ValueError("level must be positive")

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        return np.full(np.atleast_2d(pts).shape[0], self.level)


@dataclass(frozen=True)
class GaussianMixtureDensity:
    """Sum of weighted bivariate normal bumps; not normalized over the region."""

    means: np.ndarray
    covariances: np.ndarray
    mixing: np.ndarray

    def __post_init__(self) -> None:
        means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        covs = np.asarray(self.covariances, dtype=np.float64)
        mix = np.asarray(self.mixing, dtype=np.float64).ravel()
        if covs.ndim == 2:
            covs = covs[None, :, :]
        if means.shape[0] != covs.shape[0] or means.shape[0] != mix.shape[0]:
            raise ValueError("means, covariances, mixing must align")
        if np.any(mix <= 0.0):
            raise ValueError("mixing weights must be positive")
        for arr, name in ((means, "means"), (covs, "covariances"), (mix, "mixing")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)
        object.__setattr__(self, "mixing", mix)

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0])
        for mean, cov, mx in zip(self.means, self.covariances, self.mixing):
            out += mx * multivariate_normal.pdf(pts, mean=mean, cov=cov)
        return out


@dataclass(frozen=True)
class RasterDensity:
    """Piecewise-constant density on a pixel grid; zero outside the raster."""

    origin: tuple[float, float]
    pixel_size: float
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if self.pixel_size <= 0.0:
            raise ValueError("pixel_size must be positive")
        if np.any(vals < 0.0) or not np.all(np.isfinite(vals)):
            raise ValueError("raster values must be nonnegative and finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(
            self, "origin", (float(self.origin[0]), float(self.origin[1]))
        )

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        ny, nx = self.values.shape
        ix = np.floor((pts[:, 0] - self.origin[0]) / self.pixel_size).astype(np.intp)
        iy = np.floor((pts[:, 1] - self.origin[1]) / self.pixel_size).astype(np.intp)
        inside = (ix >= 0) & (ix < nx) & (iy >= 0) & (iy < ny)
        out = np.zeros(pts.shape[0])
        out[inside] = self.values[iy[inside], ix[inside]]
        return out


Density = UniformDensity | GaussianMixtureDensity | RasterDensity


def _polygon_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True)
class SensorRegion:
    """Convex region (CCW polygon) with an importance density over it.

    density_scale carries the normalization factor so that densities stay
    reusable across regions; phi() is the scaled density.
    """

    polygon: np.ndarray
    density: Density
    density_scale: float = 1.0

    def __post_init__(self) -> None:
        poly = np.atleast_2d(np.asarray(self.polygon, dtype=np.float64))
        if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
            raise ValueError("polygon needs at least 3 vertices in the plane")
        if not np.all(np.isfinite(poly)):
            raise ValueError("polygon vertices must be finite")
        area = _polygon_area(poly)
        if area <= 0.0:
            if area < 0.0:
                raise ValueError("polygon vertices must be counter-clockwise")
            raise ValueError("polygon is degenerate (zero area)")
        edges = np.roll(poly, -1, axis=0) - poly
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
            edges, -1, axis=0
        )[:, 0]
        if np.any(cross < -1e-12 * max(1.0, float(np.abs(poly).max()) ** 2)):
            raise ValueError("region must be convex")
        if self.density_scale <= 0.0:
            raise ValueError("density_scale must be positive")
        poly = poly.copy()
        poly.setflags(write=False)
        object.__setattr__(self, "polygon", poly)

    def phi(self, pts: np.ndarray) -> np.ndarray:
        return self.density.evaluate(pts) * self.density_scale


class RegionFileError(ValueError):
    """Malformed region file."""


@dataclass(frozen=True)
class Cell:
    """One grid square clipped to the region, with its integrated summaries."""

    polygon: np.ndarray
    weight: float
    com: np.ndarray
    inertia: float


@dataclass(frozen=True)
class Discretization:
    cells: tuple[Cell, ...]
    grid_eps: float

    @property
    def as_point_set(self) -> WeightedPointSet:
        return WeightedPointSet(
            np.array([c.com for c in self.cells]),
            np.array([c.weight for c in self.cells]),
        )

    @property
    def total_weight(self) -> float:
        return math.fsum(c.weight for c in self.cells)

    @property
    def inertia_sum(self) -> float:
        return math.fsum(c.inertia for c in self.cells)


@functools.lru_cache(maxsize=16)
def _tri_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Product Gauss rule on the reference triangle (0,0),(1,0),(0,1).

    Gauss-Legendre points on the unit square collapsed onto the triangle;
    the (1-u) Jacobian folds into the weights, which sum to the reference
    area 1/2. Exact for polynomials of degree <= 2*order - 2.
    """
    if order < 1:
        raise ValueError("order must be positive")
    x, w = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    uu, vv = np.meshgrid(u, u, indexing="ij")
    ww = np.outer(wu * (1.0 - u), wu)
    nodes = np.column_stack([uu.ravel(), (vv * (1.0 - uu)).ravel()])
    weights = ww.ravel()
    return nodes, weights


def _polygon_quad(poly: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights over a convex polygon via fan triangles."""
    nodes, ref_w = _tri_rule(order)
    pts_blocks = []
    w_blocks = []
    a = poly[0]
    for i in range(1, poly.shape[0] - 1):
        b, c = poly[i], poly[i + 1]
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if area2 <= 0.0:
            continue
        pts_blocks.append(a + np.outer(nodes[:, 0], b - a) + np.outer(nodes[:, 1], c - a))
        w_blocks.append(ref_w * area2)
    if not pts_blocks:
        return np.empty((0, 2)), np.empty(0)
    return np.vstack(pts_blocks), np.concatenate(w_blocks)


def _integrate(region: SensorRegion, poly: np.ndarray, order: int):
    """Return (mass, com, second_moment) of phi over a convex sub-polygon."""
    pts, qw = _polygon_quad(poly, order)
    if pts.shape[0] == 0:
        return 0.0, np.zeros(2), 0.0
    phi = region.phi(pts)
    node_mass = qw * phi
    mass = float(node_mass.sum())
    if mass <= 0.0:
        return 0.0, np.zeros(2), 0.0
    com = node_mass @ pts / mass
    m2 = float(node_mass @ np.einsum("ij,ij->i", pts, pts))
    return mass, com, m2


def normalize_density(region: SensorRegion, quad_order: int = 4) -> SensorRegion:
    """Rescale the density so its integral over the region is one."""
    mass, _, _ = _integrate(region, region.polygon, quad_order)
    if mass <= 0.0:
        raise ValueError("density has zero mass on the region")
    if mass < 1e-9:
        warnings.warn(
            "density mass inside the region is negligible; rescale is "
            "ill-conditioned",
            stacklevel=2,
        )
    return replace(region, density_scale=region.density_scale / mass)


def clip_cell(square: np.ndarray, polygon: np.ndarray) -> np.ndarray | None:
    """Intersect an axis-aligned square with a convex polygon.

    Standard convex clipping (cut the square by each polygon edge's
    half-plane); returns CCW vertices or None when the overlap is empty or
    degenerate. Inside tests are inclusive within a relative epsilon so
    shared edges survive.
    """
    square = np.asarray(square, dtype=np.float64)
    scale = max(1.0, float(np.abs(square).max()), float(np.abs(polygon).max()))
    eps = 1e-12 * scale * scale
    subject = [tuple(v) for v in square]
    for i in range(polygon.shape[0]):
        if not subject:
            return None
        a = polygon[i]
        b = polygon[(i + 1) % polygon.shape[0]]
        ex, ey = b[0] - a[0], b[1] - a[1]

        def side(p: tuple[float, float]) -> float:
            return ex * (p[1] - a[1]) - ey * (p[0] - a[0])

        clipped: list[tuple[float, float]] = []
        for j, cur in enumerate(subject):
            prev = subject[j - 1]
            s_cur, s_prev = side(cur), side(prev)
            cur_in = s_cur >= -eps
            prev_in = s_prev >= -eps
            if cur_in != prev_in:
                denom = s_prev - s_cur
                if abs(denom) > 0.0:
                    t = s_prev / denom
                    clipped.append(
                        (
                            prev[0] + t * (cur[0] - prev[0]),
                            prev[1] + t * (cur[1] - prev[1]),
                        )
                    )
            if cur_in:
                clipped.append(cur)
        subject = clipped
    if len(subject) < 3:
        return None
    out = [subject[0]]
    for v in subject[1:]:
        if abs(v[0] - out[-1][0]) > 1e-14 * scale or abs(v[1] - out[-1][1]) > 1e-14 * scale:
            out.append(v)
    while len(out) > 1 and (
        abs(out[0][0] - out[-1][0]) <= 1e-14 * scale
        and abs(out[0][1] - out[-1][1]) <= 1e-14 * scale
    ):
        out.pop()
    if len(out) < 3:
        return None
    poly = np.array(out)
    side_len = float(square[:, 0].max() - square[:, 0].min())
    if _polygon_area(poly) < 1e-12 * side_len * side_len:
        return None
    return poly


def discretize(
    region: SensorRegion, grid_eps: float, quad_order: int = 4
) -> Discretization:
    """Clip a square grid to the region and integrate per cell.

    The grid anchors at the lower-left corner of the polygon's bounding box.
    Cells are emitted in row-major order (y rows, then x), each with mass
    w_i, center of mass x_i, and inertia J_i = second moment minus
    w_i * ||x_i||^2, clamped at zero against round-off. Cells with mass under
    the drop threshold are discarded.
    """
    if grid_eps <= 0.0:
        raise ValueError("grid_eps must be positive")
    poly = region.polygon
    x0, y0 = float(poly[:, 0].min()), float(poly[:, 1].min())
    x1, y1 = float(poly[:, 0].max()), float(poly[:, 1].max())
    # The -1e-12 guard keeps exact multiples of grid_eps from spawning an
    # extra all-empty row of cells.
    nx = max(1, math.ceil((x1 - x0) / grid_eps - 1e-12))
    ny = max(1, math.ceil((y1 - y0) / grid_eps - 1e-12))
    cells = []
    for iy in range(ny):
        for ix in range(nx):
            ax, ay = x0 + ix * grid_eps, y0 + iy * grid_eps
            square = np.array(
                [
                    [ax, ay],
                    [ax + grid_eps, ay],
                    [ax + grid_eps, ay + grid_eps],
                    [ax, ay + grid_eps],
                ]
            )
            clipped = clip_cell(square, poly)
            if clipped is None:
                continue
            mass, com, m2 = _integrate(region, clipped, quad_order)
            if mass < DROP_WEIGHT:
                continue
            inertia = max(m2 - mass * float(com @ com), 0.0)
            cells.append(Cell(clipped, mass, com, inertia))
    if not cells:
        raise ValueError("grid too coarse or density degenerate")
    return Discretization(tuple(cells), grid_eps)


def _min_d2(pts: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diffs = pts[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diffs, diffs).min(axis=1)


def coverage_cost(
    region: SensorRegion,
    centers,
    quad_order: int = 6,
    mesh: Discretization | None = None,
    mc_samples: int | None = None,
    rng: RandomSource | None = None,
) -> float:
    """Integral of phi(z) * squared distance from z to the nearest center.

    Quadrature mode integrates over the whole polygon, or cell by cell when a
    mesh is given (nodes then never straddle cell boundaries, which makes
    grid-aligned center configurations exact). Monte-Carlo mode instead
    averages over uniform area samples; it needs an rng and is the fallback
    for densities too rough for the fixed-order rule.
    """
    c = as_center_array(centers)
    if c.shape[0] == 0:
        raise ValueError("no centers")
    if mc_samples is not None:
        if rng is None:
            raise ValueError("Monte-Carlo mode needs an rng")
        return _coverage_cost_mc(region, c, mc_samples, rng)
    polys = [cell.polygon for cell in mesh.cells] if mesh else [region.polygon]
    total = []
    for poly in polys:
        pts, qw = _polygon_quad(poly, quad_order)
        if pts.shape[0] == 0:
            continue
        total.append(float((qw * region.phi(pts)) @ _min_d2(pts, c)))
    return math.fsum(total)


def _coverage_cost_mc(
    region: SensorRegion, centers: np.ndarray, samples: int, rng: RandomSource
) -> float:
    """Area-uniform sampling over the fan triangulation of the region."""
    poly = region.polygon
    a = poly[0]
    tris = []
    areas = []
    for i in range(1, poly.shape[0] - 1):
        b, c = poly[i], poly[i + 1]
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if area2 > 0.0:
            tris.append((a, b, c))
            areas.append(0.5 * area2)
    areas = np.array(areas)
    gen = rng.generator()
    cum = np.cumsum(areas)
    pick = np.searchsorted(cum, gen.random(samples) * cum[-1], side="right")
    pick = np.minimum(pick, len(tris) - 1)
    # Square-root warp gives uniform points in each triangle.
    r1 = np.sqrt(gen.random(samples))
    r2 = gen.random(samples)
    abc = np.array(tris)
    pa, pb, pc = abc[pick, 0], abc[pick, 1], abc[pick, 2]
    pts = pa * (1.0 - r1)[:, None] + pb * (r1 * (1.0 - r2))[:, None] + pc * (
        r1 * r2
    )[:, None]
    vals = region.phi(pts) * _min_d2(pts, centers)
    return float(areas.sum() * vals.mean())


@dataclass(frozen=True)
class DecompositionReport:
    """Both sides of the coverage-cost split and their absolute gap."""

    lhs: float
    rhs: float
    gap: float
    quantization_cost: float
    inertia_sum: float


def decomposition_check(
    region: SensorRegion,
    grid_eps: float,
    centers,
    quad_order: int = 4,
) -> DecompositionReport:
    """Compare the coverage integral against clustering cost plus inertias.

    lhs integrates phi * nearest-center distance cell by cell; rhs assigns
    each whole cell to its center of mass's nearest center. The two agree
    exactly when no Voronoi boundary crosses a cell interior; otherwise the
    rhs overshoots and the reported gap measures the discretization error.
    """
    disc = discretize(region, grid_eps, quad_order)
    X = disc.as_point_set
    quant = weighted_cost(X, centers)
    inertia = disc.inertia_sum
    rhs = quant + inertia
    lhs = coverage_cost(region, centers, quad_order=quad_order, mesh=disc)
    return DecompositionReport(lhs, rhs, abs(lhs - rhs), quant, inertia)


@dataclass(frozen=True)
class PlacementReport:
    """Sensor placement with every cost component itemized."""

    centers: CenterSet
    coverage: float
    quantization_cost: float
    inertia_sum: float
    discretization: Discretization
    result: ClusteringResult
    warnings: tuple[str, ...] = field(default_factory=tuple)


def place_sensors(
    region: SensorRegion,
    k: int,
    epsilon: float,
    grid_eps: float,
    solver: str = "ptas",
    master_seed: int = 0,
    overrides: dict | None = None,
    threads: int = 1,
    quad_order: int = 4,
) -> PlacementReport:
    """Normalize, discretize, cluster, and price the resulting placement.

    The reported coverage cost is the cell-by-cell quadrature value for the
    returned centers (not the clustering objective), so the inertia floor and
    any cell-splitting error are included honestly.
    """
    if k < 1:
        raise ValueError("k must be positive")
    normalized = normalize_density(region, quad_order)
    disc = discretize(normalized, grid_eps, quad_order)
    notes = []
    if len(disc.cells) == 1:
        notes.append("grid coarser than region: single-cell discretization")
    X = disc.as_point_set
    rescaled, _ = ptas.rescale_weights(X)
    if solver == "ptas":
        result = ptas.solve(
            rescaled, k, epsilon, overrides, master_seed=master_seed, threads=threads
        )
    elif solver == "kmeanspp-lloyd":
        result = baselines.kmeanspp_lloyd(rescaled, k, RandomSource(master_seed))
    else:
        raise ValueError(f"unsupported solver for sensor placement: {solver}")
    centers = result.centers
    quant = weighted_cost(X, centers)
    inertia = disc.inertia_sum
    coverage = coverage_cost(normalized, centers, quad_order=quad_order, mesh=disc)
    if coverage > 0.0 and inertia > INERTIA_WARN_FRACTION * coverage:
        msg = (
            f"cell inertia is {inertia / coverage:.1%} of the coverage cost; "
            "grid_eps is too coarse for the requested accuracy"
        )
        notes.append(msg)
        warnings.warn(msg, stacklevel=2)
    meta = dict(result.meta)
    meta["grid_eps"] = grid_eps
    meta["n_cells"] = len(disc.cells)
    # Re-price on the un-rescaled mass units so cost components agree.
    final = ClusteringResult.from_centers(X, centers, meta)
    return PlacementReport(
        centers, coverage, quant, inertia, disc, final, tuple(notes)
    )


def _parse_density(spec: dict) -> Density:
    kind = spec.get("type")
    if kind == "uniform":
        return UniformDensity(float(spec.get("level", 1.0)))
    if kind == "gaussian_mixture":
        try:
            return GaussianMixtureDensity(
                np.asarray(spec["means"], dtype=np.float64),
                np.asarray(spec["covariances"], dtype=np.float64),
                np.asarray(spec["mixing"], dtype=np.float64),
            )
        except KeyError as exc:
            raise RegionFileError(f"gaussian_mixture density missing {exc}") from None
    if kind == "raster":
        try:
            return RasterDensity(
                tuple(spec["origin"]),
                float(spec["pixel_size"]),
                np.asarray(spec["values"], dtype=np.float64),
            )
        except KeyError as exc:
            raise RegionFileError(f"raster density missing {exc}") from None
    raise RegionFileError(f"unknown density type: {kind!r}")


def load_region(path: str | Path) -> tuple[SensorRegion, float | None]:
    """Read a region file: polygon, density spec, optional grid_eps."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise RegionFileError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise RegionFileError("region file must hold a JSON object")
    if "polygon" not in doc or "density" not in doc:
        raise RegionFileError("region file needs 'polygon' and 'density'")
    density = _parse_density(doc["density"])
    try:
        region = SensorRegion(np.asarray(doc["polygon"], dtype=np.float64), density)
    except ValueError as exc:
        raise RegionFileError(str(exc)) from None
    grid_eps = doc.get("grid_eps")
    return region, (float(grid_eps) if grid_eps is not None else None)


def export_discretization(path: str | Path, disc: Discretization) -> None:
    """Write the discretized cells as the standard weighted-point CSV."""
    save_weighted_points(path, disc.as_point_set)
