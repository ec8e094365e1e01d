"""Shared fixtures: dense interval operators are expensive to assemble,
so the standard sizes are built once per session and reused everywhere."""

import numpy as np
import pytest

from frac_kit import interval
from frac_kit.grid import Grid1D, GridFunction


@pytest.fixture(scope="session")
def op_half():
    return interval.assemble(0.5, interval.IntervalMesh(512))


@pytest.fixture(scope="session")
def op_half_small():
    return interval.assemble(0.5, interval.IntervalMesh(128))


@pytest.fixture(scope="session")
def op_by_size():
    cache = {}

    def get(a, m):
        key = (float(a), int(m))
        if key not in cache:
            cache[key] = interval.assemble(a, interval.IntervalMesh(m))
        return cache[key]

    return get


@pytest.fixture(scope="session")
def gaussian_1024():
    g = Grid1D(1024, 32.0)
    return GridFunction.from_callable(g, lambda x: np.exp(-0.5 * x**2))


@pytest.fixture(scope="session")
def plus_exp_2048():
    """Generic r+ data: H(x) e^{-x}, nonzero at the boundary."""
    g = Grid1D(2048, 32.0)
    return GridFunction(g, np.where(g.x >= 0, np.exp(-np.clip(g.x, 0.0, None)), 0.0))
