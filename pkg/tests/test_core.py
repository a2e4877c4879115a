import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wkmeans.core import (
    CenterSet,
    ClusteringResult,
    PointFileError,
    WeightedPoint,
    WeightedPointSet,
    assign_to_centers,
    load_weighted_points,
    min_squared_distances,
    nearest_center,
    parallel_axis_rhs,
    save_weighted_points,
    weighted_centroid,
    weighted_cost,
)
from wkmeans.sampling import RandomSource

from conftest import make_points


def test_weighted_point_rejects_bad_weights():
    for w in (0.0, -1.0, math.nan, math.inf):
        with pytest.raises(ValueError):
            WeightedPoint(np.array([0.0]), w)


def test_point_set_shape_validation():
    with pytest.raises(ValueError):
        WeightedPointSet(np.zeros((3, 2)), np.ones(2))
    with pytest.raises(ValueError):
        WeightedPointSet(np.array([[np.nan, 0.0]]), np.ones(1))
    with pytest.raises(ValueError):
        WeightedPointSet(np.zeros((0, 2)), np.ones(0))


def test_point_set_arrays_are_frozen():
    P = make_points(1, 5, 2)
    with pytest.raises(ValueError):
        P.coords[0, 0] = 99.0
    with pytest.raises(ValueError):
        P.weights[0] = 99.0


def test_from_points_roundtrip():
    pts = [WeightedPoint(np.array([0.0, 1.0]), 2.0), WeightedPoint(np.array([3.0, 4.0]), 0.5)]
    P = WeightedPointSet.from_points(pts)
    assert P.n == 2 and P.dim == 2
    back = P.point(1)
    assert np.array_equal(back.coords, [3.0, 4.0]) and back.weight == 0.5


def test_total_weight_is_order_independent():
    w = np.full(10, 0.1)
    P = WeightedPointSet(np.zeros((10, 1)), w)
    assert P.total_weight == 1.0


def test_subset_allows_repeats_and_rejects_empty():
    P = make_points(2, 4, 2)
    S = P.subset([1, 1, 3])
    assert S.n == 3
    assert np.array_equal(S.coords[0], S.coords[1])
    with pytest.raises(ValueError, match="empty subset"):
        P.subset([])


def test_n_distinct_collapses_duplicates():
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
    P = WeightedPointSet(coords, np.ones(3))
    assert P.n_distinct == 2


def test_center_set_requires_centers():
    with pytest.raises(ValueError, match="no centers"):
        CenterSet(np.zeros((0, 2)))


def test_nearest_center_breaks_ties_toward_lower_index():
    centers = np.array([[-1.0], [1.0]])
    idx, d2 = nearest_center(np.array([0.0]), centers)
    assert idx == 0 and d2 == 1.0


def test_weighted_cost_small_example():
    P = WeightedPointSet(np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([1.0, 3.0]))
    assert weighted_cost(P, np.array([[0.0, 0.0]])) == 12.0


def test_weighted_centroid_empty_error():
    with pytest.raises(ValueError, match="empty"):
        weighted_centroid(np.zeros((0, 2)), np.zeros(0))


def test_assignment_consistent_with_min_distances():
    P = make_points(3, 40, 3)
    centers = P.coords[:4]
    assign = assign_to_centers(P.coords, centers)
    d2 = min_squared_distances(P.coords, centers)
    diffs = P.coords - centers[assign]
    direct = np.einsum("nd,nd->n", diffs, diffs)
    np.testing.assert_array_equal(direct, d2)


@given(st.integers(0, 10_000), st.integers(1, 50), st.integers(1, 5))
def test_parallel_axis_identity(seed, n, d):
    """Cost about any point equals spread about the centroid plus the shift term."""
    P = make_points(seed, n, d)
    gen = RandomSource(seed ^ 0x5BD1).generator()
    c = gen.random(d) * 4.0 - 2.0
    lhs = weighted_cost(P, c[None, :])
    rhs = parallel_axis_rhs(P, c)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


@given(st.integers(0, 10_000))
def test_centroid_is_the_single_center_optimum(seed):
    P = make_points(seed, 12, 3)
    g = weighted_centroid(P)
    best = weighted_cost(P, g[None, :])
    gen = RandomSource(seed ^ 0xC0FE).generator()
    for _ in range(5):
        c = gen.random(3)
        assert weighted_cost(P, c[None, :]) >= best - 1e-12


def test_clustering_result_recomputes_assignment_and_cost():
    P = make_points(4, 30, 2)
    centers = CenterSet(P.coords[[0, 7]])
    res = ClusteringResult.from_centers(P, centers, {"solver": "test"})
    assert res.cost == weighted_cost(P, centers)
    assert np.array_equal(res.assignment, assign_to_centers(P.coords, centers.centers))
    assert res.meta["solver"] == "test"


def test_point_file_roundtrip(tmp_path):
    P = make_points(5, 17, 3)
    path = tmp_path / "pts.csv"
    save_weighted_points(path, P)
    Q = load_weighted_points(path)
    assert np.array_equal(P.coords, Q.coords)
    assert np.array_equal(P.weights, Q.weights)


def test_point_file_errors_carry_line_numbers(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("a,b\n0,1\n")
    with pytest.raises(PointFileError, match="line 1"):
        load_weighted_points(bad_header)

    bad_value = tmp_path / "v.csv"
    bad_value.write_text("x1,weight\n0.0,1.0\noops,1.0\n")
    with pytest.raises(PointFileError, match="line 3"):
        load_weighted_points(bad_value)

    bad_weight = tmp_path / "w.csv"
    bad_weight.write_text("x1,weight\n0.0,-2.0\n")
    with pytest.raises(PointFileError, match="line 2"):
        load_weighted_points(bad_weight)


def test_point_file_requires_data(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("x1,x2,weight\n")
    with pytest.raises(PointFileError):
        load_weighted_points(empty)
