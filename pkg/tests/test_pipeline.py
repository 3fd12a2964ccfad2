import numpy as np
import pytest
from frozen import SANDWICH, VEE_BACKWARD, VEE_PROBE, VEE_SUP, XEIK_BACKWARD
from hypothesis import given, settings
from hypothesis import strategies as st

from hjrecon import oracles
from hjrecon.grid import Grid, random_piecewise_linear
from hjrecon.hamiltonian import AssumptionError, drift, eikonal, from_name, shifted_eikonal, xeikonal
from hjrecon.pipeline import (
    bilateral_probe_1d,
    grid_lipschitz,
    make_reconstructible,
    reconstruct,
    sandwich_check,
)

GRID = Grid(-3, 3, 0.01)
X = GRID.axis(0)


def test_make_reconstructible_vee():
    g0, v = make_reconstructible(eikonal(), GRID.sample(lambda x: np.maximum(0, np.abs(x) - 1)), 1.0)
    assert np.max(np.abs(g0.values - np.abs(X))[v.interior]) <= VEE_BACKWARD


def test_make_reconstructible_drift_zero_is_identity():
    g = random_piecewise_linear(np.random.default_rng(5), GRID)
    g0, _ = make_reconstructible(drift(0.0), g, 1.0)
    assert np.array_equal(g0.values, g.values)


def test_make_reconstructible_xeikonal():
    g = GRID.sample(lambda x: np.maximum(1 - np.abs(x), np.abs(x) - 1))
    g0, v = make_reconstructible(xeikonal(), g, 1.0)
    exact = oracles.oracle_eval("xeik-bilateral", "g0", 0.0, X, T=1.0)
    assert np.max(np.abs(g0.values - exact)[v.interior]) <= XEIK_BACKWARD


def test_reconstruct_ramp_is_not_reconstructible():
    rep = reconstruct(eikonal(), GRID.sample(lambda x: np.maximum(0, 1 - np.abs(x))), 1.0)
    assert not rep.verdict
    assert 0.9 <= rep.sup_gap <= 1.1
    assert abs(X[rep.worst_node]) < 0.05


def test_reconstruct_vee_is_reconstructible():
    rep = reconstruct(eikonal(), GRID.sample(np.abs), 1.0, tolerance=VEE_SUP, probe_times=None)
    assert rep.verdict
    assert set(rep.probe_gaps) == {0.25, 0.5, 0.75}
    assert max(rep.probe_gaps.values()) <= VEE_PROBE


def test_reconstruct_horizon_limit_beyond_one():
    rep = reconstruct(eikonal(), GRID.sample(lambda x: np.minimum(0, 1 - np.abs(x))), 2.0)
    assert not rep.verdict
    i0 = int(np.argmin(np.abs(X)))
    gap0 = abs(rep.w0.values[i0] - rep.g0.values[i0])
    assert abs(gap0 - 1.0) <= 0.05


@given(st.integers(0, 2**31), st.sampled_from(["eikonal", "xeikonal", "shifted-eikonal:1,0.5"]))
@settings(max_examples=20, deadline=None)
def test_report_invariants(seed, hname):
    rng = np.random.default_rng(seed)
    g0 = random_piecewise_linear(rng, GRID, slope=rng.uniform(0.2, 3.0))
    rep = reconstruct(from_name(hname), g0, 1.0, tolerance=0.05)
    assert rep.sup_gap >= 0
    assert rep.verdict == (rep.sup_gap <= rep.tolerance)
    # w0 <= g0 up to the scheme's own error
    assert rep.overshoot <= rep.scheme_tolerance
    assert rep.signed_gap >= -rep.scheme_tolerance
    assert rep.sup_gap == max(rep.signed_gap, rep.overshoot)
    assert rep.boundary_margin >= 1.0 - 1e-9


def test_scheme_tolerance_scales_with_data():
    g = GRID.sample(np.abs)
    g2 = GRID.sample(lambda x: 3 * np.abs(x))
    assert grid_lipschitz(g) == pytest.approx(1.0)
    a = reconstruct(eikonal(), g, 1.0).scheme_tolerance
    b = reconstruct(eikonal(), g2, 1.0).scheme_tolerance
    assert b == pytest.approx(3 * a)


def test_report_files(tmp_path):
    rep = reconstruct(eikonal(), GRID.sample(np.abs), 1.0, probe_times=(0.5,))
    paths = rep.write(tmp_path)
    assert sorted(p.name for p in paths) == ["g0.csv", "gT.csv", "probes.csv", "report.txt", "w0.csv"]
    text = (tmp_path / "report.txt").read_text()
    assert text.startswith("verdict: reconstructible\n")
    assert "probe_gap[0.5]:" in text
    assert (tmp_path / "probes.csv").read_text().splitlines()[0] == "t,max_abs_gap"


def test_sandwich_drift_zero_is_exact():
    g = random_piecewise_linear(np.random.default_rng(2), GRID)
    res = sandwich_check(drift(0.0), g, 1.0)
    assert res.u_below_w == 0.0 and res.w_below_v == 0.0 and res.holds


def test_sandwich_vee():
    res = sandwich_check(eikonal(), GRID.sample(lambda x: np.maximum(0, np.abs(x) - 1)), 1.0, tolerance=SANDWICH)
    assert res.holds


def test_sandwich_against_valpha_is_strict_somewhere():
    zero = GRID.sample(np.zeros_like)
    res = sandwich_check(eikonal(), zero, 1.0, reference_v=lambda t, x: oracles.valpha(t, x, 1.0))
    assert res.holds
    # w = 0 everywhere while v_1(t, 0) = -t
    assert oracles.valpha(0.999, 0.0, 1.0) < 0.0


def test_bilateral_probe_eikonal():
    gap = bilateral_probe_1d(eikonal(), GRID.sample(np.abs), 1.0, tolerance=VEE_SUP)
    assert gap <= VEE_PROBE


def test_bilateral_probe_refusals():
    g = GRID.sample(np.abs)
    with pytest.raises(AssumptionError):
        bilateral_probe_1d(shifted_eikonal(1.0, 0.5), g, 1.0)
    with pytest.raises(AssumptionError):
        bilateral_probe_1d(eikonal(2), Grid((-1, -1), (1, 1), 0.1).sample(np.hypot), 0.2)
    with pytest.raises(AssumptionError):
        bilateral_probe_1d(eikonal(), GRID.sample(lambda x: np.maximum(0, 1 - np.abs(x))), 1.0)
    with pytest.raises(ValueError):
        bilateral_probe_1d(eikonal(), g, 1.0, probe_times=(1.0,))
