"""Forward and backward viscosity solutions by a monotone Lax-Friedrichs scheme.

The forward solver marches ``u_t + H(x, u_x) = 0`` from ``u(0) = g0``.
Backward solutions are never computed by stepping with a negative time
step: ``w`` with ``w(T) = gT`` is obtained as ``w(t, x) = -u~(T - t, x)``
where ``u~`` is the forward solution for ``H~(x, p) = H(x, -p)`` from
``-gT``. Both directions share one kernel and one time grid, so their
stored slices carry bit-identical time stamps and can be compared node
for node.
"""
from __future__ import annotations

import io
import math
import warnings
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridFunction, fmt
from .hamiltonian import HamiltonianSpec

FORWARD = "forward"
BACKWARD = "backward"

LINEAR = "linear-extrapolation"
CLAMPED = "clamped-gradient"


class SolverError(RuntimeError):
    """The solve was refused (bad horizon, unusable time step, grid mismatch)."""


class DomainError(ValueError):
    """Two solutions live on different grids or time stamps."""


class TruncationWarning(UserWarning):
    """The truncated domain leaves no node free of boundary influence."""


@dataclass(frozen=True)
class SolveParams:
    cfl: float = 0.9
    margin: float = 1.0
    boundary: str = LINEAR
    keep: str | int = "all"
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.margin < 1:
            raise ValueError("dissipation margin must be >= 1")
        if self.boundary not in (LINEAR, CLAMPED):
            raise ValueError(f"boundary policy must be {LINEAR!r} or {CLAMPED!r}")
        if isinstance(self.keep, str):
            if self.keep not in ("all", "endpoints"):
                raise ValueError("keep must be 'all', 'endpoints' or a positive stride")
        elif int(self.keep) < 1:
            raise ValueError("stride must be positive")


@dataclass(frozen=True, eq=False)
class SpaceTimeSolution:
    grid: Grid
    dt: float
    times: tuple[float, ...]
    slices: tuple[np.ndarray, ...]
    direction: str
    interior: np.ndarray
    horizon: float

    def __post_init__(self):
        for s in self.slices:
            s.flags.writeable = False

    def index(self, t: float) -> int:
        try:
            return self.times.index(t)
        except ValueError:
            raise KeyError(f"no stored slice at t={t!r}") from None

    def at(self, t: float) -> GridFunction:
        return GridFunction(self.grid, self.slices[self.index(t)])

    @property
    def initial(self) -> GridFunction:
        return GridFunction(self.grid, self.slices[0])

    @property
    def final(self) -> GridFunction:
        return GridFunction(self.grid, self.slices[-1])

    def value_at(self, t: float, x) -> float:
        """Interpolate linearly in time between stored slices and (bi)linearly in space."""
        ts = self.times
        if t < ts[0] - 1e-12 or t > ts[-1] + 1e-12:
            raise ValueError(f"t={t} outside [{ts[0]}, {ts[-1]}]")
        k = int(np.searchsorted(ts, t, side="right")) - 1
        k = min(max(k, 0), len(ts) - 2) if len(ts) > 1 else 0
        v0 = self.grid.interpolate(self.slices[k], x)
        if len(ts) == 1:
            return v0
        t0, t1 = ts[k], ts[k + 1]
        lam = min(max((t - t0) / (t1 - t0), 0.0), 1.0)
        v1 = self.grid.interpolate(self.slices[k + 1], x)
        return (1 - lam) * v0 + lam * v1

    def to_csv(self) -> str:
        """``t,x[,y],value`` rows, time-major then node index."""
        buf = io.StringIO()
        names = ["t", "x", "y"][: self.grid.dim + 1]
        buf.write(",".join(names + ["value"]) + "\n")
        if self.grid.dim == 1:
            ax = [fmt(x) for x in self.grid.axis(0)]
            for t, s in zip(self.times, self.slices):
                tt = fmt(t)
                for x, v in zip(ax, s):
                    buf.write(f"{tt},{x},{fmt(v)}\n")
        else:
            ax = [fmt(x) for x in self.grid.axis(0)]
            ay = [fmt(y) for y in self.grid.axis(1)]
            for t, s in zip(self.times, self.slices):
                tt = fmt(t)
                for i, x in enumerate(ax):
                    for j, y in enumerate(ay):
                        buf.write(f"{tt},{x},{y},{fmt(s[i, j])}\n")
        return buf.getvalue()


def lf_numerical_hamiltonian(H: HamiltonianSpec, x, p_minus, p_plus, alpha) -> np.ndarray:
    """Lax-Friedrichs flux ``H(x, (p- + p+)/2) - sum_k alpha_k (p+_k - p-_k)/2``.

    Arrays follow the coordinate-first convention of :mod:`hamiltonian`;
    ``alpha`` broadcasts against ``p_minus``.
    """
    x = np.asarray(x, float)
    pm = np.asarray(p_minus, float)
    pp = np.asarray(p_plus, float)
    if x.ndim == 0:
        x, pm, pp = x.reshape(1), pm.reshape(1), pp.reshape(1)
    alpha = np.broadcast_to(np.asarray(alpha, float), pm.shape)
    return H(x, 0.5 * (pm + pp)) - 0.5 * np.sum(alpha * (pp - pm), axis=0)


def _one_sided(u: np.ndarray, grid: Grid, boundary: str) -> tuple[np.ndarray, np.ndarray]:
    """Backward and forward differences per axis, shape ``(dim, *shape)``."""
    dm, dp = [], []
    for k, h in enumerate(grid.h):
        d = np.diff(u, axis=k) / h
        if boundary == LINEAR:
            first = np.take(d, [0], axis=k)
            last = np.take(d, [-1], axis=k)
        else:
            first = np.zeros_like(np.take(d, [0], axis=k))
            last = first
        dm.append(np.concatenate([first, d], axis=k))
        dp.append(np.concatenate([d, last], axis=k))
    return np.stack(dm), np.stack(dp)


def _dissipation(H: HamiltonianSpec, grid: Grid, margin: float) -> np.ndarray:
    return margin * H.local_speed(grid.points())


def stable_dt(H: HamiltonianSpec, grid: Grid, params: SolveParams) -> float:
    """Largest step keeping the scheme monotone, scaled by the CFL number.

    Returns ``inf`` when the dissipation vanishes everywhere (``H`` does not
    propagate anything).
    """
    amax = float(np.max(_dissipation(H, grid, params.margin)))
    if amax == 0.0:
        return math.inf
    return params.cfl / sum(amax / h for h in grid.h)


def time_stamps(T: float, dt: float, landmarks: Iterable[float] = ()) -> list[float]:
    """Stamps from 0 to T with step ``dt``; the step before each landmark and T shrinks."""
    stops = sorted({float(t) for t in landmarks if 0 < t < T} | {float(T)})
    stamps = [0.0]
    start = 0.0
    for stop in stops:
        n = max(1, math.ceil((stop - start) / dt - 1e-9)) if math.isfinite(dt) else 1
        stamps.extend(start + k * dt for k in range(1, n))
        stamps.append(stop)
        start = stop
    return stamps


def _kept(n_steps: int, keep, landmark_idx: set[int]) -> set[int]:
    if keep == "all":
        return set(range(n_steps + 1))
    idx = {0, n_steps} | landmark_idx
    if keep != "endpoints":
        idx |= set(range(0, n_steps + 1, int(keep)))
    return idx


def _march(H, grid, u0, steps, alpha, boundary, keep_idx):
    pts = grid.points()
    u = u0
    stored = {0: u0}
    for m, dt in enumerate(steps, start=1):
        dm, dp = _one_sided(u, grid, boundary)
        flux = H(pts, 0.5 * (dm + dp)) - 0.5 * np.sum(alpha * (dp - dm), axis=0)
        u = u - dt * flux
        if m in keep_idx:
            stored[m] = u
    return stored


def _prepare(H: HamiltonianSpec, g: GridFunction, T: float, params, landmarks):
    if not T > 0:
        raise SolverError(f"horizon must be positive, got {T}")
    if H.dim != g.grid.dim:
        raise SolverError(f"Hamiltonian dimension {H.dim} does not match grid dimension {g.grid.dim}")
    params = params or SolveParams()
    grid = g.grid
    dt = stable_dt(H, grid, params)
    if math.isfinite(dt) and (dt <= 0 or T / dt > params.max_steps):
        raise SolverError(
            f"stable step {dt:.3e} needs more than {params.max_steps} steps to reach T={T}; "
            "dissipation bound too large for this grid"
        )
    stamps = time_stamps(T, dt, landmarks)
    lm = {i for i, t in enumerate(stamps) if t in set(map(float, landmarks))}
    keep_idx = _kept(len(stamps) - 1, params.keep, lm)
    interior = grid.interior_mask(H.speed_bound, T)
    if not interior.any():
        warnings.warn(
            f"no node of the grid is free of boundary influence over T={T}; "
            "widen the domain or shorten the horizon",
            TruncationWarning,
            stacklevel=3,
        )
    alpha = _dissipation(H, grid, params.margin)
    return params, grid, dt, stamps, keep_idx, interior, alpha


def solve_forward(
    H: HamiltonianSpec, g0: GridFunction, T: float, params: SolveParams | None = None,
    times: Iterable[float] = (),
) -> SpaceTimeSolution:
    """Forward viscosity solution with ``u(0) = g0`` on ``[0, T]``.

    ``times`` adds stamps the march must land on exactly; they are always
    stored.
    """
    times = tuple(times)
    params, grid, dt, stamps, keep_idx, interior, alpha = _prepare(H, g0, T, params, times)
    steps = np.diff(stamps)
    stored = _march(H, grid, np.array(g0.values), steps, alpha, params.boundary, keep_idx)
    idx = sorted(stored)
    return SpaceTimeSolution(
        grid, dt, tuple(stamps[i] for i in idx), tuple(stored[i] for i in idx),
        FORWARD, interior, float(T),
    )


def solve_backward(
    H: HamiltonianSpec, gT: GridFunction, T: float, params: SolveParams | None = None,
    times: Iterable[float] = (),
) -> SpaceTimeSolution:
    """Backward viscosity solution with ``w(T) = gT`` via time reversal."""
    times = tuple(times)
    Hr = H.reflected()
    params, grid, dt, stamps, keep_idx, interior, alpha = _prepare(Hr, gT, T, params, times)
    K = len(stamps) - 1
    steps = [stamps[K - j] - stamps[K - j - 1] for j in range(K)]
    # step j of the reversed march lands on forward stamp index K - j
    rev_keep = {K - i for i in keep_idx}
    stored = _march(Hr, grid, -np.array(gT.values), steps, alpha, params.boundary, rev_keep)
    idx = sorted(K - j for j in stored)
    slices = []
    for i in idx:
        s = -stored[K - i]
        slices.append(s)
    # negating twice is exact in IEEE arithmetic, so w(T) is gT bit for bit
    return SpaceTimeSolution(
        grid, dt, tuple(stamps[i] for i in idx), tuple(slices), BACKWARD, interior, float(T),
    )


@dataclass(frozen=True)
class Comparison:
    gap: float
    holds: bool
    worst_time: float
    worst_node: tuple[int, ...]


def comparison_check(
    lower: SpaceTimeSolution, upper: SpaceTimeSolution, tolerance: float = 0.0,
    interior_only: bool = True,
) -> Comparison:
    """Largest ``lower - upper`` over stored slices; ``holds`` when it is <= tolerance."""
    if lower.grid != upper.grid:
        raise DomainError("solutions live on different grids")
    if lower.times != upper.times:
        raise DomainError("solutions store different time stamps")
    mask = lower.interior & upper.interior if interior_only else np.ones(lower.grid.shape, bool)
    if not mask.any():
        raise DomainError("no interior nodes to compare")
    best, bt, bn = -math.inf, lower.times[0], ()
    for t, a, b in zip(lower.times, lower.slices, upper.slices):
        d = np.where(mask, a - b, -np.inf)
        k = int(np.argmax(d))
        if d.flat[k] > best:
            best, bt, bn = float(d.flat[k]), t, np.unravel_index(k, d.shape)
    return Comparison(best, best <= tolerance, bt, tuple(int(i) for i in bn))
