"""Uniform 1D/2D grids, sampled functions on them, and their CSV form."""
from __future__ import annotations

import io
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def _tup(v, dim=None) -> tuple[float, ...]:
    t = tuple(float(a) for a in np.atleast_1d(v))
    if dim is not None and len(t) == 1 and dim > 1:
        t = t * dim
    return t


@dataclass(frozen=True)
class Grid:
    """Tensor grid with nodes ``lower + i*h`` per axis (by index, never accumulated)."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    h: tuple[float, ...]

    def __post_init__(self):
        dim = max(len(_tup(self.lower)), len(_tup(self.upper)), len(_tup(self.h)))
        lo, up, h = _tup(self.lower, dim), _tup(self.upper, dim), _tup(self.h, dim)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "h", h)
        if dim not in (1, 2) or not len(lo) == len(up) == len(h) == dim:
            raise ValueError("grid must be 1D or 2D with matching bounds and spacing")
        for a, b, d in zip(lo, up, h):
            if not d > 0:
                raise ValueError("cell width must be positive")
            if not b > a:
                raise ValueError("upper bound must exceed lower bound")
            cells = (b - a) / d
            if abs(cells - round(cells)) * d > 1e-12 * max(1.0, abs(b - a)):
                raise ValueError(f"[{a}, {b}] is not a whole number of cells of width {d}")

    @classmethod
    def uniform(cls, lower, upper, h) -> Grid:
        return cls(lower, upper, h)

    @property
    def dim(self) -> int:
        return len(self.h)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(round((b - a) / d)) + 1 for a, b, d in zip(self.lower, self.upper, self.h))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axis(self, k: int) -> np.ndarray:
        return self.lower[k] + np.arange(self.shape[k]) * self.h[k]

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``(dim, *shape)``."""
        return np.stack(np.meshgrid(*(self.axis(k) for k in range(self.dim)), indexing="ij"))

    def sample(self, f: Callable[..., np.ndarray]) -> GridFunction:
        """Evaluate ``f(x)`` (1D) or ``f(x, y)`` (2D) at every node."""
        pts = self.points()
        vals = np.asarray(f(*pts), dtype=float)
        return GridFunction(self, np.broadcast_to(vals, self.shape).copy())

    def reach_radius(self, speed: tuple[float, float], horizon: float) -> np.ndarray:
        """Per-node radius of the region that can influence the node within ``horizon``.

        With speed bound ``a + b|x|`` the distance travelled from ``x``
        satisfies ``r' <= a + b(|x| + r)``, integrated in closed form.
        """
        a, b = speed
        r0 = np.sqrt(np.sum(self.points() ** 2, axis=0))
        if b == 0:
            return np.full(self.shape, a * horizon)
        return (r0 + a / b) * np.expm1(b * horizon)

    def interior_mask(self, speed: tuple[float, float], horizon: float) -> np.ndarray:
        """Nodes whose domain of dependence over ``horizon`` stays inside the box."""
        r = self.reach_radius(speed, horizon)
        pts = self.points()
        mask = np.ones(self.shape, dtype=bool)
        tol = 1e-9 * max(self.h)
        for k in range(self.dim):
            mask &= pts[k] - r >= self.lower[k] - tol
            mask &= pts[k] + r <= self.upper[k] + tol
        return mask

    def interpolate(self, values: np.ndarray, x) -> float:
        """Linear (1D) or bilinear (2D) interpolation at a point inside the box."""
        x = _tup(x)
        idx, frac = [], []
        for k in range(self.dim):
            s = (x[k] - self.lower[k]) / self.h[k]
            if s < -1e-9 or s > self.shape[k] - 1 + 1e-9:
                raise ValueError(f"point {x} outside grid")
            i = min(max(int(np.floor(s)), 0), self.shape[k] - 2)
            idx.append(i)
            frac.append(min(max(s - i, 0.0), 1.0))
        if self.dim == 1:
            (i,), (f,) = idx, frac
            return float((1 - f) * values[i] + f * values[i + 1])
        (i, j), (f, g) = idx, frac
        return float(
            (1 - f) * (1 - g) * values[i, j]
            + f * (1 - g) * values[i + 1, j]
            + (1 - f) * g * values[i, j + 1]
            + f * g * values[i + 1, j + 1]
        )

    def cell_nodes(self, x) -> list[tuple[int, ...]]:
        """Indices of the nodes of the cell containing ``x``."""
        x = _tup(x)
        idx = []
        for k in range(self.dim):
            s = (x[k] - self.lower[k]) / self.h[k]
            i = min(max(int(np.floor(s)), 0), self.shape[k] - 2)
            idx.append((i, i + 1))
        if self.dim == 1:
            return [(i,) for i in idx[0]]
        return [(i, j) for i in idx[0] for j in idx[1]]


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = ["x", "y"][: self.grid.dim]
        buf.write(",".join(names + ["value"]) + "\n")
        _write_rows(buf, self.grid, self.values, prefix="")
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def fmt(v: float) -> str:
    return repr(float(v))


def _write_rows(buf: io.StringIO, grid: Grid, values: np.ndarray, prefix: str) -> None:
    if grid.dim == 1:
        for x, v in zip(grid.axis(0), values):
            buf.write(f"{prefix}{fmt(x)},{fmt(v)}\n")
    else:
        ax, ay = grid.axis(0), grid.axis(1)
        for i, x in enumerate(ax):
            for j, y in enumerate(ay):
                buf.write(f"{prefix}{fmt(x)},{fmt(y)},{fmt(values[i, j])}\n")


def _infer_axis(coords: np.ndarray) -> tuple[float, float, float]:
    u = np.unique(coords)
    if u.size < 2:
        raise ValueError("need at least two nodes per axis")
    h = float(u[-1] - u[0]) / (u.size - 1)
    if not np.allclose(np.diff(u), h, rtol=1e-9, atol=1e-12):
        raise ValueError("coordinates are not uniformly spaced")
    return float(u[0]), float(u[-1]), h


def read_grid_function(path_or_text: str | Path) -> GridFunction:
    """Parse the ``x[,y],value`` CSV written by :meth:`GridFunction.to_csv`."""
    text = str(path_or_text)
    if "\n" not in text:
        text = Path(text).read_text()
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    header = [c.strip() for c in lines[0].split(",")]
    if header not in (["x", "value"], ["x", "y", "value"]):
        raise ValueError(f"unexpected header {lines[0]!r}")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    dim = len(header) - 1
    axes = [_infer_axis(data[:, k]) for k in range(dim)]
    grid = Grid(tuple(a[0] for a in axes), tuple(a[1] for a in axes), tuple(a[2] for a in axes))
    vals = np.full(grid.shape, np.nan)
    idx = tuple(np.rint((data[:, k] - grid.lower[k]) / grid.h[k]).astype(int) for k in range(dim))
    vals[idx] = data[:, -1]
    if np.isnan(vals).any():
        raise ValueError("CSV does not cover every grid node")
    return GridFunction(grid, vals)


def random_piecewise_linear(
    rng: np.random.Generator, grid: Grid, knots: int = 5, slope: float = 2.0, level: float = 1.0,
) -> GridFunction:
    """Continuous piecewise-linear 1D function with ``knots`` random breakpoints.

    Slopes are drawn uniformly from ``[-slope, slope]`` and the value at the
    left end from ``[-level, level]``, so the result is ``slope``-Lipschitz.
    """
    if grid.dim != 1:
        raise ValueError("random piecewise-linear functions are one-dimensional")
    lo, hi = grid.lower[0], grid.upper[0]
    xs = np.concatenate([[lo], np.sort(rng.uniform(lo, hi, knots)), [hi]])
    slopes = rng.uniform(-slope, slope, knots + 1)
    ys = np.concatenate([[rng.uniform(-level, level)], np.diff(xs) * slopes])
    return GridFunction(grid, np.interp(grid.axis(0), xs, np.cumsum(ys)))
