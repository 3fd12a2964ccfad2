import numpy as np
import pytest
from frozen import ARC_EIKONAL, ARC_SHIFTED
from hypothesis import given, settings
from hypothesis import strategies as st

from hjrecon.characteristics import (
    ArcExit,
    NonSmoothPoint,
    arcs_from,
    integrate_characteristic,
    selection_from,
    subgradients_1d,
    verify_bilateral_along,
)
from hjrecon.grid import Grid
from hjrecon.hamiltonian import AssumptionError, HamiltonianSpec, drift, eikonal, shifted_eikonal
from hjrecon.pipeline import reconstruct

GRID = Grid(-4, 4, 0.01)


def test_eikonal_arc_is_a_straight_line():
    arc = integrate_characteristic(selection_from(eikonal()), [2.0], [1.0], 1.0, 1e-3)
    assert arc.times[-1] == 1.0
    assert arc.x[-1, 0] == pytest.approx(3.0, abs=1e-12)
    assert arc.p[-1, 0] == 1.0
    assert arc.energy_drift(eikonal()) == 0.0


def test_shifted_eikonal_momentum_grows():
    # p' = b sign(x), x' = a sign(p)
    H = shifted_eikonal(1.0, 0.5)
    arc = integrate_characteristic(selection_from(H), [1.0], [1.0], 1.0, 1e-3)
    assert arc.x[-1, 0] == pytest.approx(2.0, abs=1e-9)
    assert arc.p[-1, 0] == pytest.approx(1.5, abs=1e-9)
    assert arc.energy_drift(H) < 1e-6


@given(st.floats(-2, 2), st.floats(-3, 3), st.floats(0.1, 2))
@settings(max_examples=50, deadline=None)
def test_drift_arcs_conserve_energy(c, p0, T):
    H = drift(c)
    arc = integrate_characteristic(selection_from(H), [0.3], [p0], T, 1e-3)
    assert arc.x[-1, 0] == pytest.approx(0.3 + c * T, abs=1e-9)
    assert arc.energy_drift(H) <= 1e-6


def test_final_partial_step():
    arc = integrate_characteristic(selection_from(eikonal()), [0.0], [1.0], 0.0105, 1e-3)
    assert arc.times[-1] == 0.0105 and arc.times[-2] == pytest.approx(0.010)
    assert arc.x[-1, 0] == pytest.approx(0.0105, abs=1e-14)


def test_refuses_nonsmooth_momentum():
    with pytest.raises(NonSmoothPoint):
        integrate_characteristic(selection_from(eikonal()), [0.0], [0.0], 1.0, 1e-3)


def test_requires_gradients():
    H = HamiltonianSpec(lambda x, p: np.abs(p[0]), lipschitz_M=1.0)
    with pytest.raises(AssumptionError):
        selection_from(H)


def test_initial_momentum_must_be_subgradient():
    sel = selection_from(eikonal())
    with pytest.raises(ValueError):
        integrate_characteristic(sel, [1.0], [0.5], 1.0, 1e-3, g0_subgradient=lambda x, p: p[0] == 1.0)


def test_subgradients():
    assert subgradients_1d(np.abs, 1.0) == [pytest.approx(1.0)]
    s = subgradients_1d(np.abs, 0.0, k=3)
    assert s == pytest.approx([-1.0, 0.0, 1.0], abs=1e-6)
    with pytest.raises(AssumptionError):
        subgradients_1d(lambda x: -abs(x), 0.0)


def test_arc_csv():
    arc = integrate_characteristic(selection_from(eikonal()), [0.0], [1.0], 0.002, 1e-3)
    assert arc.to_csv(eikonal()).splitlines() == [
        "t,x,p,H", "0.0,0.0,1.0,1.0", "0.001,0.001,1.0,1.0", "0.002,0.002,1.0,1.0",
    ]


@pytest.fixture(scope="module")
def vee_solutions():
    rep = reconstruct(eikonal(), GRID.sample(np.abs), 1.0, probe_times=())
    return rep.u, rep.w


def test_bilateral_along_convex_arcs(vee_solutions):
    u, w = vee_solutions
    for arc in arcs_from(eikonal(), np.abs, (-1.5, -0.5, 0.5, 1.5), 1.0):
        assert verify_bilateral_along(arc, u, w) <= ARC_EIKONAL


def test_bilateral_along_shifted_arcs():
    H = shifted_eikonal(1.0, 0.5)
    rep = reconstruct(H, GRID.sample(np.abs), 1.0, probe_times=())
    for arc in arcs_from(H, np.abs, (-1.5, 0.5), 1.0):
        assert verify_bilateral_along(arc, rep.u, rep.w) <= ARC_SHIFTED


def test_ramp_counter_instance():
    # non-convex g0: the arc through the top of the ramp sees u and w split by ~1
    rep = reconstruct(eikonal(), GRID.sample(lambda x: np.maximum(0, 1 - np.abs(x))), 1.0, probe_times=())
    arc = integrate_characteristic(selection_from(eikonal()), [0.0], [1.0], 1.0, 1e-3)
    assert abs(verify_bilateral_along(arc, rep.u, rep.w) - 1.0) <= 0.1


def test_arc_leaving_interior(vee_solutions):
    u, w = vee_solutions
    arc = integrate_characteristic(selection_from(eikonal()), [2.5], [1.0], 1.0, 1e-3)
    with pytest.raises(ArcExit):
        verify_bilateral_along(arc, u, w)
