import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hjrecon.grid import Grid, GridFunction, random_piecewise_linear, read_grid_function


def test_shape_and_axis():
    g = Grid(-1.0, 1.0, 0.25)
    assert g.shape == (9,) and g.dim == 1
    assert g.axis(0)[4] == 0.0
    g2 = Grid((-1, 0), (1, 2), (0.5, 1.0))
    assert g2.shape == (5, 3) and g2.points().shape == (2, 5, 3)


@pytest.mark.parametrize("args", [(0, 1, 0.3), (0, 1, -0.1), (1, 0, 0.1), ((0, 0, 0), (1, 1, 1), 0.5)])
def test_invalid_grids(args):
    with pytest.raises(ValueError):
        Grid(*args)


def test_grid_function_is_frozen_and_finite():
    g = Grid(0, 1, 0.5)
    f = GridFunction(g, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        f.values[0] = 5.0
    with pytest.raises(ValueError):
        GridFunction(g, [1.0, np.nan, 0.0])
    with pytest.raises(ValueError):
        GridFunction(g, [1.0, 2.0])


@given(st.integers(0, 2**31))
def test_csv_roundtrip_1d(seed):
    grid = Grid(-3, 3, 0.5)
    f = random_piecewise_linear(np.random.default_rng(seed), grid)
    back = read_grid_function(f.to_csv())
    assert back.grid == grid
    assert np.array_equal(back.values, f.values)


def test_csv_roundtrip_2d():
    grid = Grid((-1, -1), (1, 1), 0.5)
    f = grid.sample(lambda x, y: x + 10 * y)
    text = f.to_csv()
    assert text.splitlines()[0] == "x,y,value"
    assert text.splitlines()[1] == "-1.0,-1.0,-11.0"
    back = read_grid_function(text)
    assert np.array_equal(back.values, f.values)


def test_interpolation_is_exact_on_affine_functions():
    grid = Grid((-1, -1), (1, 1), 0.25)
    f = grid.sample(lambda x, y: 2 * x - y + 1)
    assert abs(grid.interpolate(f.values, (0.3, -0.7)) - (0.6 + 0.7 + 1)) < 1e-12


def test_reach_radius_constant_and_affine_speed():
    grid = Grid(-2, 2, 1.0)
    assert np.all(grid.reach_radius((1.0, 0.0), 0.5) == 0.5)
    r = grid.reach_radius((0.0, 1.0), 1.0)
    # |x(t)| grows like |x0| e^t
    assert np.allclose(r, np.abs(grid.axis(0)) * (np.e - 1))


def test_interior_mask_excludes_boundary_layer():
    grid = Grid(-3, 3, 0.5)
    mask = grid.interior_mask((1.0, 0.0), 1.0)
    assert grid.axis(0)[mask].min() == -2.0 and grid.axis(0)[mask].max() == 2.0


def test_random_piecewise_linear_is_lipschitz():
    grid = Grid(-3, 3, 0.01)
    f = random_piecewise_linear(np.random.default_rng(3), grid, slope=1.5)
    assert np.max(np.abs(np.diff(f.values))) <= 1.5 * 0.01 + 1e-12
