import math
import warnings

import numpy as np
import pytest
from frozen import RAMP_FORWARD, STUDY_RATE_BAND, VEE_FORWARD
from hypothesis import given, settings
from hypothesis import strategies as st

from hjrecon import oracles
from hjrecon.grid import Grid, random_piecewise_linear
from hjrecon.hamiltonian import drift, eikonal, from_name, xeikonal
from hjrecon.solver import (
    CLAMPED,
    DomainError,
    SolveParams,
    SolverError,
    TruncationWarning,
    comparison_check,
    lf_numerical_hamiltonian,
    solve_backward,
    solve_forward,
    stable_dt,
    time_stamps,
)

GRID = Grid(-3, 3, 0.02)
seeds = st.integers(0, 2**31)


def test_drift_zero_is_bit_exact():
    g = random_piecewise_linear(np.random.default_rng(0), GRID)
    u = solve_forward(drift(0.0), g, 1.0)
    w = solve_backward(drift(0.0), g, 1.0)
    assert np.array_equal(u.final.values, g.values)
    assert np.array_equal(w.initial.values, g.values)
    assert math.isinf(u.dt)


@pytest.mark.parametrize("name", ["eikonal", "xeikonal", "drift:1"])
def test_constants_are_steady_for_homogeneous(name):
    g = GRID.sample(lambda x: np.full_like(x, 2.5))
    u = solve_forward(from_name(name), g, 0.5)
    assert np.array_equal(u.final.values, g.values)


@pytest.mark.parametrize("p", [-1.5, 0.0, 0.7])
def test_affine_data_is_exact(p):
    # linear data stays linear: u = p x - |p| t, and linear extrapolation keeps it so at the ends
    g = GRID.sample(lambda x: p * x)
    u = solve_forward(eikonal(), g, 1.0)
    assert np.allclose(u.final.values, p * GRID.axis(0) - abs(p), atol=1e-12)


def test_flux_is_consistent():
    x = np.zeros((1, 4))
    p = np.array([[-2.0, -0.1, 0.0, 3.0]])
    flux = lf_numerical_hamiltonian(eikonal(), x, p, p, np.ones((1, 4)))
    assert np.array_equal(flux, np.abs(p[0]))


@given(seeds, st.floats(0.0, 1.0))
@settings(max_examples=25, deadline=None)
def test_comparison_principle(seed, bump):
    rng = np.random.default_rng(seed)
    g = random_piecewise_linear(rng, GRID)
    h = GRID.sample(lambda x: g.values + bump * np.exp(-x * x))
    for H in (eikonal(), xeikonal()):
        lo = solve_forward(H, g, 0.5)
        hi = solve_forward(H, h, 0.5)
        assert comparison_check(lo, hi).holds
        # linear extrapolation is not monotone at the end nodes; the clamped closure is
        lo = solve_forward(H, g, 0.5, SolveParams(boundary=CLAMPED))
        hi = solve_forward(H, h, 0.5, SolveParams(boundary=CLAMPED))
        assert comparison_check(lo, hi, interior_only=False).holds


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_backward_terminal_slice_is_exact(seed):
    g = random_piecewise_linear(np.random.default_rng(seed), GRID)
    w = solve_backward(eikonal(), g, 1.0, times=(0.3,))
    assert np.array_equal(w.final.values, g.values)
    assert w.times[0] == 0.0 and w.times[-1] == 1.0 and 0.3 in w.times


def test_backward_drift_transports_the_other_way():
    g = GRID.sample(lambda x: np.sin(x))
    w = solve_backward(drift(0.5), g, 1.0)
    # w(0, x) = g(x + c T)
    x = GRID.axis(0)
    err = np.abs(w.initial.values - np.sin(x + 0.5))[w.interior]
    assert err.max() < 5e-3


def test_forward_and_backward_share_time_stamps():
    g = GRID.sample(np.abs)
    u = solve_forward(xeikonal(), g, 1.0, times=(0.25, 0.5))
    w = solve_backward(xeikonal(), g, 1.0, times=(0.25, 0.5))
    assert u.times == w.times
    assert u.at(0.25).values.shape == GRID.shape


def test_time_stamps_land_on_landmarks():
    s = time_stamps(1.0, 0.3, (0.5,))
    assert s[0] == 0.0 and s[-1] == 1.0 and 0.5 in s
    assert all(b > a for a, b in zip(s, s[1:]))
    assert max(b - a for a, b in zip(s, s[1:])) <= 0.3 + 1e-12


def test_keep_policies():
    g = GRID.sample(np.abs)
    assert len(solve_forward(eikonal(), g, 1.0, SolveParams(keep="endpoints")).times) == 2
    full = solve_forward(eikonal(), g, 1.0)
    strided = solve_forward(eikonal(), g, 1.0, SolveParams(keep=10))
    assert 2 < len(strided.times) < len(full.times)
    assert np.array_equal(strided.final.values, full.final.values)


def test_cfl_step_size():
    p = SolveParams(cfl=0.5)
    assert stable_dt(eikonal(), GRID, p) == pytest.approx(0.5 * 0.02)
    assert stable_dt(xeikonal(), GRID, p) == pytest.approx(0.5 * 0.02 / 3)


@pytest.mark.parametrize(
    "kwargs", [dict(cfl=0.0), dict(cfl=1.1), dict(margin=0.5), dict(boundary="periodic"), dict(keep=0)]
)
def test_bad_params(kwargs):
    with pytest.raises(ValueError):
        SolveParams(**kwargs)


def test_solver_errors():
    g = GRID.sample(np.abs)
    with pytest.raises(SolverError):
        solve_forward(eikonal(), g, 0.0)
    with pytest.raises(SolverError):
        solve_forward(eikonal(2), g, 1.0)
    with pytest.raises(SolverError):
        solve_forward(eikonal(), g, 1.0, SolveParams(max_steps=10))


def test_truncation_warning_when_no_interior():
    g = Grid(-1, 1, 0.1).sample(np.abs)
    with pytest.warns(TruncationWarning):
        solve_forward(eikonal(), g, 2.0)


def test_comparison_check_rejects_mismatched_solutions():
    g = GRID.sample(np.abs)
    a = solve_forward(eikonal(), g, 1.0)
    b = solve_forward(eikonal(), g, 0.5)
    with pytest.raises(DomainError):
        comparison_check(a, b)


def test_clamped_boundary_only_changes_the_layer():
    # inflowing data, where the two closures give different end fluxes
    g = GRID.sample(lambda x: -np.abs(x))
    a = solve_forward(eikonal(), g, 1.0)
    b = solve_forward(eikonal(), g, 1.0, SolveParams(boundary=CLAMPED))
    # the mask edge still sees the scheme's smeared front; a few cells inside it does not
    deep = np.abs(GRID.axis(0)) <= 1.8
    assert np.array_equal(a.final.values[deep], b.final.values[deep])
    assert not np.array_equal(a.final.values, b.final.values)


@pytest.mark.parametrize("name,threshold", [("ramp-collapse", RAMP_FORWARD), ("vee-spread", VEE_FORWARD)])
def test_forward_error_and_rate(name, threshold):
    inst = oracles.get(name)
    errs = []
    for h in (0.02, 0.01):
        grid = Grid(-3, 3, h)
        u = solve_forward(eikonal(), grid.sample(lambda x: inst.g0(x, 1.0)), 1.0)
        errs.append(float(np.max(np.abs(u.final.values - inst.u(1.0, grid.axis(0), 1.0))[u.interior])))
    assert errs[1] <= threshold
    lo, hi = STUDY_RATE_BAND
    assert lo <= errs[0] / errs[1] <= hi


def test_two_dimensional_eikonal_cone():
    grid = Grid((-2, -2), (2, 2), 0.05)
    g = grid.sample(lambda x, y: np.hypot(x, y))
    u = solve_forward(eikonal(2), g, 0.5)
    exact = np.maximum(0.0, np.hypot(*grid.points()) - 0.5)
    assert np.max(np.abs(u.final.values - exact)[u.interior]) < 0.1


def test_solution_csv():
    grid = Grid(0, 1, 0.5)
    u = solve_forward(drift(0.0), grid.sample(lambda x: x), 1.0)
    assert u.to_csv().splitlines() == [
        "t,x,value", "0.0,0.0,0.0", "0.0,0.5,0.5", "0.0,1.0,1.0",
        "1.0,0.0,0.0", "1.0,0.5,0.5", "1.0,1.0,1.0",
    ]


def test_no_warning_on_reasonable_grid():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_forward(eikonal(), GRID.sample(np.abs), 1.0)
