import numpy as np
import pytest
from hypothesis import given, strategies as st

from wkmeans.core import WeightedPointSet, min_squared_distances
from wkmeans.instances import chi6
from wkmeans.sampling import (
    CostAlreadyZero,
    DegenerateDistribution,
    RandomSource,
    SamplingWeights,
    d2_sample,
    d2_weights,
    incremental_min_dist_update,
    sample_index,
    sample_indices,
)

from conftest import make_points


def test_sampling_weights_reject_negative_and_nonfinite():
    with pytest.raises(ValueError):
        SamplingWeights(np.array([1.0, -0.5]))
    with pytest.raises(ValueError):
        SamplingWeights(np.array([np.inf, 1.0]))


def test_zero_total_is_allowed_but_degenerate():
    w = SamplingWeights(np.zeros(4))
    assert w.total == 0.0 and w.is_degenerate
    with pytest.raises(DegenerateDistribution):
        sample_index(w, RandomSource(0).generator())


def test_identical_streams_replay_identically():
    w = SamplingWeights(np.array([1.0, 2.0, 3.0]))
    a = sample_indices(w, 100, RandomSource(9, (4,)).generator())
    b = sample_indices(w, 100, RandomSource(9, (4,)).generator())
    sib = sample_indices(w, 100, RandomSource(9, (5,)).generator())
    assert np.array_equal(a, b)
    assert np.any(a != sib)


def test_derive_chains_give_distinct_streams():
    base = RandomSource(31)
    one = base.derive(0).generator().random(8)
    two = base.derive(1).generator().random(8)
    nested = base.derive(0, 1).generator().random(8)
    assert not np.array_equal(one, two)
    assert not np.array_equal(one, nested)


def test_each_draw_consumes_one_uniform():
    w = SamplingWeights(np.array([2.0, 1.0, 1.0]))
    g1 = RandomSource(77).generator()
    sample_indices(w, 13, g1)
    g2 = RandomSource(77).generator()
    g2.random(13)
    assert g1.random() == g2.random()


def test_d2_weights_without_centers_is_weight_proportional():
    P = make_points(11, 9, 2)
    w = d2_weights(P, None)
    assert np.array_equal(w.values, P.weights)


def test_d2_weights_vector_on_fixed_instance():
    P, center = chi6()
    w = d2_weights(P, center)
    np.testing.assert_array_equal(w.values, [4.0, 2.0, 0.0, 0.5, 13.5, 90.0])


def test_d2_sample_zero_coverage_raises():
    P = WeightedPointSet(np.array([[0.0, 0.0], [1.0, 1.0]]), np.ones(2))
    with pytest.raises(CostAlreadyZero):
        d2_sample(P, P.coords, 5, RandomSource(0).generator())


def test_d2_sample_never_picks_zero_mass_points():
    P, center = chi6()
    idx = d2_sample(P, center, 5000, RandomSource(13).generator())
    assert not np.any(idx == 2)


def test_d2_sample_frequencies_roughly_match():
    P, center = chi6()
    draws = 40_000
    idx = d2_sample(P, center, draws, RandomSource(99).generator())
    freq = np.bincount(idx, minlength=P.n) / draws
    w = d2_weights(P, center)
    expect = w.values / w.total
    sigma = np.sqrt(np.maximum(expect * (1.0 - expect), 1e-12) / draws)
    assert np.all(np.abs(freq - expect) <= 5.0 * sigma)


def test_normalized_probabilities_are_scale_invariant():
    P = make_points(21, 12, 3)
    centers = P.coords[:2] + 0.05
    base = d2_weights(P, centers)
    p0 = base.values / base.total

    lam = WeightedPointSet(P.coords, P.weights * 7.5)
    w1 = d2_weights(lam, centers)
    np.testing.assert_allclose(w1.values / w1.total, p0, rtol=1e-12)

    s = 3.0
    scaled = WeightedPointSet(P.coords * s, P.weights)
    w2 = d2_weights(scaled, centers * s)
    np.testing.assert_allclose(w2.values / w2.total, p0, rtol=1e-12)


@given(st.integers(0, 5_000), st.integers(1, 6))
def test_incremental_cache_matches_direct_recomputation(seed, rounds):
    """Folding centers one at a time reproduces the direct minimum exactly."""
    P = make_points(seed, 25, 2)
    gen = RandomSource(seed ^ 0xABC).generator()
    centers = gen.random((rounds, 2))
    cache = np.full(P.n, np.inf)
    for c in centers:
        cache = incremental_min_dist_update(cache, P.coords, c)
    np.testing.assert_array_equal(cache, min_squared_distances(P.coords, centers))


def test_sample_index_matches_inverse_cdf_partition():
    w = SamplingWeights(np.array([0.25, 0.5, 0.25]))
    counts = np.bincount(
        sample_indices(w, 20_000, RandomSource(5).generator()), minlength=3
    )
    assert abs(counts[1] / 20_000 - 0.5) < 0.02
