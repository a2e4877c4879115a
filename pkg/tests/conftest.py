import numpy as np
import pytest
from hypothesis import settings

from wkmeans.core import WeightedPointSet
from wkmeans.sampling import RandomSource
from wkmeans.sensor import SensorRegion, UniformDensity

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


@pytest.fixture
def unit_square() -> SensorRegion:
    poly = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return SensorRegion(poly, UniformDensity())


def make_points(seed: int, n: int, d: int, weighted: bool = True) -> WeightedPointSet:
    gen = RandomSource(seed).generator()
    coords = gen.random((n, d))
    weights = 0.1 + 2.9 * gen.random(n) if weighted else np.ones(n)
    return WeightedPointSet(coords, weights)
