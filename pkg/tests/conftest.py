import numpy as np
import pytest

from polyverify import Layer, LinearFunctional, Polytope, ReluNetwork, TllComponent, TllNetwork


def lf(w, c):
    return LinearFunctional(w, c)


@pytest.fixture
def relu_x():
    """y = max(x, 0) as a shallow network."""
    return ReluNetwork([Layer([[1.0]], [0.0], True), Layer([[1.0]], [0.0], False)])


@pytest.fixture
def abs_tll():
    """|x| = max(min(x), min(-x))."""
    return TllNetwork([TllComponent([[1.0], [-1.0]], [0.0, 0.0], [[0], [1]])])


@pytest.fixture
def unit_square():
    return Polytope.box([0.0, 0.0], [1.0, 1.0])


def interval(lo, hi):
    return Polytope.box([lo], [hi])


def rng_for(seed):
    return np.random.default_rng(seed)
