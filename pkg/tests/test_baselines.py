import numpy as np
import pytest
from hypothesis import given, strategies as st

from wkmeans.baselines import LloydParams, kmeanspp_lloyd, kmeanspp_seed, lloyd_descend
from wkmeans.core import CenterSet, WeightedPointSet, weighted_cost
from wkmeans.instances import kpp20, line4, random_instance
from wkmeans.sampling import RandomSource

from conftest import make_points


def test_seeding_picks_input_points():
    P = make_points(1, 25, 3)
    centers = kmeanspp_seed(P, 4, RandomSource(2))
    assert centers.k == 4
    for c in centers.centers:
        assert np.any(np.all(P.coords == c, axis=1))


def test_seeding_rejects_bad_k():
    with pytest.raises(ValueError):
        kmeanspp_seed(make_points(0, 5, 2), 0, RandomSource(0))


def test_seeding_cycles_when_support_is_exhausted():
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    P = WeightedPointSet(coords, np.ones(4))
    centers = kmeanspp_seed(P, 5, RandomSource(3))
    assert centers.k == 5
    distinct = np.unique(centers.centers, axis=0)
    assert distinct.shape[0] == 2


def test_seeding_is_reproducible():
    P = make_points(4, 30, 2)
    a = kmeanspp_seed(P, 3, RandomSource(8)).centers
    b = kmeanspp_seed(P, 3, RandomSource(8)).centers
    assert np.array_equal(a, b)


def test_lloyd_params_validation():
    with pytest.raises(ValueError):
        LloydParams(max_iters=0)
    with pytest.raises(ValueError):
        LloydParams(rel_improvement_tol=-1.0)


def test_lloyd_keeps_optimal_centers_fixed():
    inst = line4()
    start = CenterSet(np.array([[0.5], [4.5]]))
    res = lloyd_descend(inst.points, start, LloydParams())
    assert np.array_equal(res.centers.centers, start.centers)
    assert res.cost == inst.opt_cost


def test_lloyd_keeps_empty_cluster_center_in_place():
    P = WeightedPointSet(np.array([[0.0], [1.0]]), np.ones(2))
    far = CenterSet(np.array([[0.4], [50.0]]))
    res = lloyd_descend(P, far, LloydParams(max_iters=3))
    assert res.centers.k == 2
    assert np.all(np.isfinite(res.centers.centers))
    assert res.centers.centers[1, 0] == 50.0


def test_lloyd_history_is_monotone():
    for seed in range(10):
        P = random_instance(RandomSource(seed), max_n=60, max_dim=3)
        start = kmeanspp_seed(P, 3, RandomSource(seed + 1000))
        res = lloyd_descend(P, start, LloydParams())
        hist = res.meta["cost_history"]
        assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))
        assert res.cost == hist[-1]


@given(st.integers(0, 2_000))
def test_lloyd_never_beats_but_never_worsens_seeding(seed):
    P = random_instance(RandomSource(seed), max_n=40, max_dim=2)
    start = kmeanspp_seed(P, 2, RandomSource(seed ^ 0x77))
    before = weighted_cost(P, start)
    res = lloyd_descend(P, start, LloydParams())
    assert res.cost <= before + 1e-12


def test_end_to_end_baseline_on_separated_groups():
    inst = kpp20()
    res = kmeanspp_lloyd(inst.points, inst.k, RandomSource(6))
    assert res.meta["solver"] == "kmeanspp-lloyd"
    factor = 8.0 * (np.log(inst.k) + 2.0)
    assert res.cost <= factor * inst.opt_cost
