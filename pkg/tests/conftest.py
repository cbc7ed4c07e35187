import math

import numpy as np
import pytest

from ulamfloat.geometry import BodyHandle
from ulamfloat.weights import WeightFunction


@pytest.fixture(scope="session")
def disc():
    return BodyHandle.ball([0.0, 0.0], 1.0)


@pytest.fixture(scope="session")
def square01():
    return BodyHandle.polytope([[0, 0], [1, 0], [1, 1], [0, 1]])


@pytest.fixture(scope="session")
def csquare():
    return BodyHandle.cube(1.0, 2)


@pytest.fixture(scope="session")
def triangle():
    return BodyHandle.polytope([[0, 0], [1, 0], [0, 1]])


@pytest.fixture(scope="session")
def ellipse():
    # semi-axes (1, 2): support in e2 is 2
    return BodyHandle.ellipsoid([0.0, 0.0], [[1.0, 0.0], [0.0, 0.25]])


@pytest.fixture(scope="session")
def ball3():
    return BodyHandle.ball([0.0, 0.0, 0.0], 1.0)


@pytest.fixture(scope="session")
def cube3():
    return BodyHandle.cube(1.0, 3)


@pytest.fixture(scope="session")
def tetra():
    return BodyHandle.polytope([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])


@pytest.fixture(scope="session")
def w1():
    return WeightFunction.constant(1.0)


def disc_segment_area(d: float) -> float:
    """Area of the unit-disc cap {x_1 >= d} (closed form)."""
    return math.acos(d) - d * math.sqrt(1.0 - d * d)


def disc_cut_for_area(target: float) -> float:
    """Invert the segment-area closed form by bisection."""
    lo, hi = -1.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        area = disc_segment_area(mid) if mid >= 0 else math.pi - disc_segment_area(-mid)
        if area > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def random_direction(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)
