import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frac_kit.errors import FracKitError
from frac_kit.grid import (
    Grid1D,
    GridFunction,
    HalfLineMask,
    extend_by_zero,
    forward_transform,
    inverse_transform,
    norm,
    read_csv,
    write_csv,
)


def test_grid_geometry():
    g = Grid1D(8, 4.0)
    assert g.h == 1.0
    assert g.x[0] == -4.0
    assert g.x[-1] == 3.0
    assert g.x[g.origin_index] == 0.0
    assert g.xi_nyquist == pytest.approx(math.pi / g.h)


def test_grid_refine_keeps_box():
    g = Grid1D(64, 16.0)
    fine = g.refine()
    assert fine.n == 128 and fine.L == 16.0
    assert np.allclose(fine.x[::2], g.x)


@pytest.mark.parametrize("n", [3, 7, 0, -4])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises((ValueError, FracKitError)):
        Grid1D(n, 8.0)


def test_grid_rejects_bad_box():
    with pytest.raises((ValueError, FracKitError)):
        Grid1D(64, 0.0)


def test_gridfunction_shape_mismatch():
    g = Grid1D(16, 4.0)
    with pytest.raises((ValueError, FracKitError)):
        GridFunction(g, np.zeros(17))


def test_transform_round_trip():
    g = Grid1D(128, 8.0)
    u = GridFunction.from_callable(g, lambda x: np.exp(-(x**2)))
    back = inverse_transform(g, forward_transform(u))
    assert np.abs(back.values - u.values).max() < 1e-14


def test_parseval():
    g = Grid1D(256, 16.0)
    u = GridFunction.from_callable(g, lambda x: np.exp(-0.5 * x**2) * np.cos(x))
    energy_x = g.h * np.sum(np.abs(u.values) ** 2)
    u_hat = forward_transform(u)
    dxi = 2.0 * math.pi / (g.n * g.h)
    energy_xi = dxi / (2.0 * math.pi) * np.sum(np.abs(u_hat) ** 2)
    assert energy_x == pytest.approx(energy_xi, rel=1e-12)


def test_extend_by_zero_masks_minus_side():
    g = Grid1D(64, 8.0)
    u = GridFunction.from_callable(g, lambda x: np.exp(-np.abs(x)))
    plus = extend_by_zero(u, HalfLineMask("plus"))
    assert np.all(plus.values[g.x < 0] == 0.0)
    assert np.all(plus.values[g.x >= 0] == u.values[g.x >= 0])


def test_norm_homogeneity():
    g = Grid1D(64, 8.0)
    u = GridFunction.from_callable(g, lambda x: np.exp(-(x**2)))
    for kind in ("l2", "sup"):
        assert norm(u * 3.0, kind) == pytest.approx(3.0 * norm(u, kind), rel=1e-14)


def test_csv_round_trip(tmp_path):
    g = Grid1D(32, 4.0)
    u = GridFunction.from_callable(g, lambda x: np.exp(1j * x) / (1.0 + x**2))
    path = tmp_path / "u.csv"
    write_csv(u, path)
    back = read_csv(path)
    assert back.grid == g
    assert np.array_equal(back.values, u.values)


def test_csv_header_carries_box(tmp_path):
    g = Grid1D(16, 2.5)
    path = tmp_path / "u.csv"
    write_csv(GridFunction(g, np.zeros(16)), path)
    first = path.read_text().splitlines()[0]
    assert first.startswith("# grid") and "n=16" in first and "L=2.5" in first


def test_csv_rejects_missing_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,re,im\n0.0,1.0,0.0\n")
    with pytest.raises((ValueError, FracKitError)):
        read_csv(path)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-1e12, max_value=1e12, allow_nan=False),
        min_size=16,
        max_size=16,
    )
)
def test_csv_round_trip_exact_any_values(tmp_path_factory, values):
    # 17 significant digits are enough to reproduce any double exactly
    g = Grid1D(16, 8.0)
    u = GridFunction(g, np.array(values, dtype=np.float64))
    path = tmp_path_factory.mktemp("csv") / "u.csv"
    write_csv(u, path)
    assert np.array_equal(read_csv(path).values, u.values)
