"""Hamiltonian characteristics ``x' = dH/dp``, ``p' = -dH/dx`` and checks along them.

Only smooth selections are integrated. If a stage of the integrator lands on
the declared non-smooth set of the Hamiltonian (``p = 0`` for ``|p|``, for
instance) the integration stops with :class:`NonSmoothPoint` instead of
picking an arbitrary element of the sub/superdifferential.
"""
from __future__ import annotations

import io
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .grid import fmt
from .hamiltonian import AssumptionError, HamiltonianSpec
from .solver import SpaceTimeSolution


class NonSmoothPoint(RuntimeError):
    def __init__(self, t: float, x, p):
        self.t, self.x, self.p = t, tuple(x), tuple(p)
        super().__init__(f"selection undefined at t={t:.6g}, x={self.x}, p={self.p}")


class ArcExit(RuntimeError):
    def __init__(self, t: float, x):
        self.t, self.x = t, tuple(x)
        super().__init__(f"arc leaves the grid interior at t={t:.6g}, x={self.x}")


@dataclass(frozen=True)
class SubgradientSelection:
    """One element ``(dx, dp)`` of ``d_p H x (-d_x H)`` per point, plus where it is undefined."""

    rhs: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    nonsmooth: Callable[[np.ndarray, np.ndarray], bool] | None = None
    smooth: bool = True


def selection_from(H: HamiltonianSpec) -> SubgradientSelection:
    if H.gradient_p is None or H.gradient_x is None:
        raise AssumptionError(f"{H.name}: gradients are needed for characteristics")

    def rhs(x, p):
        xc, pc = x.reshape(-1, 1), p.reshape(-1, 1)
        return H.gradient_p(xc, pc).ravel(), -H.gradient_x(xc, pc).ravel()

    ns = None
    if H.nonsmooth is not None:
        def ns(x, p):
            return H.nonsmooth(x.reshape(-1, 1), p.reshape(-1, 1))
    return SubgradientSelection(rhs, ns, smooth=H.nonsmooth is None)


@dataclass(frozen=True, eq=False)
class CharacteristicArc:
    times: np.ndarray
    x: np.ndarray  # (len(times), dim)
    p: np.ndarray
    step: float

    def energy(self, H: HamiltonianSpec) -> np.ndarray:
        return H(self.x.T, self.p.T)

    def energy_drift(self, H: HamiltonianSpec) -> float:
        e = self.energy(H)
        return float(np.max(np.abs(e - e[0])))

    def to_csv(self, H: HamiltonianSpec | None = None) -> str:
        dim = self.x.shape[1]
        xs = ["x"] if dim == 1 else [f"x{k + 1}" for k in range(dim)]
        ps = ["p"] if dim == 1 else [f"p{k + 1}" for k in range(dim)]
        buf = io.StringIO()
        buf.write(",".join(["t"] + xs + ps + (["H"] if H is not None else [])) + "\n")
        e = self.energy(H) if H is not None else None
        for k, t in enumerate(self.times):
            row = [fmt(t)] + [fmt(v) for v in self.x[k]] + [fmt(v) for v in self.p[k]]
            if e is not None:
                row.append(fmt(e[k]))
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def integrate_characteristic(
    sel: SubgradientSelection, x0, p0, T: float, step: float,
    g0_subgradient: Callable | None = None,
) -> CharacteristicArc:
    """Classical RK4 on ``[0, T]`` with a shortened final step.

    When ``g0_subgradient(x0)`` is given (a sequence of admissible slopes
    for 1D or a membership test returning bool), ``p0`` must belong to it.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if not T >= 0:
        raise ValueError("T must be nonnegative")
    x = np.atleast_1d(np.asarray(x0, float)).copy()
    p = np.atleast_1d(np.asarray(p0, float)).copy()
    if g0_subgradient is not None:
        ok = g0_subgradient(x, p)
        if not ok:
            raise ValueError(f"p0={p0} is not a subgradient of g0 at x0={x0}")

    def f(t, x, p):
        if sel.nonsmooth is not None and sel.nonsmooth(x, p):
            raise NonSmoothPoint(t, x, p)
        dx, dp = sel.rhs(x, p)
        return np.asarray(dx, float), np.asarray(dp, float)

    n_full = int(math.floor(T / step + 1e-9))
    times = [k * step for k in range(n_full + 1)]
    if T - times[-1] > 1e-12 * max(1.0, T):
        times.append(float(T))
    else:
        times[-1] = float(T)
    xs, ps = [x.copy()], [p.copy()]
    for t0, t1 in zip(times[:-1], times[1:]):
        h = t1 - t0
        k1x, k1p = f(t0, x, p)
        k2x, k2p = f(t0 + h / 2, x + h / 2 * k1x, p + h / 2 * k1p)
        k3x, k3p = f(t0 + h / 2, x + h / 2 * k2x, p + h / 2 * k2p)
        k4x, k4p = f(t1, x + h * k3x, p + h * k3p)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p = p + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        xs.append(x.copy())
        ps.append(p.copy())
    f(times[-1], x, p)
    return CharacteristicArc(np.array(times), np.array(xs), np.array(ps), float(step))


def subgradients_1d(g0: Callable, x0: float, k: int = 5, delta: float = 1e-6, tol: float = 1e-6) -> list[float]:
    """Slopes in the subdifferential of a convex piecewise-linear ``g0`` at ``x0``.

    At differentiable points this is the derivative; at a kink, ``k`` evenly
    spaced values between the one-sided derivatives.
    """
    left = (g0(x0) - g0(x0 - delta)) / delta
    right = (g0(x0 + delta) - g0(x0)) / delta
    if left > right + tol:
        raise AssumptionError(f"g0 is not convex at x0={x0} (left slope {left} > right slope {right})")
    if abs(right - left) <= tol:
        return [float(0.5 * (left + right))]
    return [float(s) for s in np.linspace(left, right, k)]


def verify_bilateral_along(
    arc: CharacteristicArc, u: SpaceTimeSolution, w: SpaceTimeSolution, tolerance: float | None = None,
) -> float:
    """Largest ``|u - w|`` sampled at the arc points (interpolated in t and x).

    Raises :class:`ArcExit` if the arc leaves the interior region where the
    truncated solves are free of boundary influence.
    """
    if u.grid != w.grid:
        raise ValueError("u and w live on different grids")
    grid = u.grid
    interior = u.interior & w.interior
    gap = 0.0
    for t, x in zip(arc.times, arc.x):
        inside = all(grid.lower[k] <= x[k] <= grid.upper[k] for k in range(grid.dim))
        if not inside or not all(interior[n] for n in grid.cell_nodes(x)):
            raise ArcExit(float(t), x)
        gap = max(gap, abs(u.value_at(float(t), x) - w.value_at(float(t), x)))
    return gap


def arcs_from(
    H: HamiltonianSpec, g0: Callable, starts: Sequence[float], T: float, step: float = 1e-3, k: int = 1,
) -> list[CharacteristicArc]:
    """Arcs from each 1D start point with ``p0`` drawn from the subdifferential of ``g0``."""
    sel = selection_from(H)
    arcs = []
    for x0 in starts:
        for p0 in subgradients_1d(g0, x0, k=k):
            arcs.append(integrate_characteristic(sel, [x0], [p0], T, step))
    return arcs
