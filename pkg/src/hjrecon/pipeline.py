"""Initial-condition reconstruction: forward to T, backward to 0, compare.

Verdicts are evidence from a discretisation, not proofs. Every report
carries two numbers side by side: the caller's verdict ``tolerance`` and
the ``scheme_tolerance`` that bounds what discretisation error alone can
explain. Comparisons use interior nodes only; nodes whose domain of
dependence over ``[0, T]`` reaches the truncated boundary are excluded.
"""
from __future__ import annotations

import io
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import GridFunction, fmt
from .hamiltonian import AssumptionError, HamiltonianSpec
from .solver import SolveParams, SpaceTimeSolution, solve_backward, solve_forward

# Empirical constant of the O(sqrt(h)) corner smoothing of the scheme: the
# overshoot of a forward-then-backward round trip stays below
# SCHEME_CONSTANT * Lip(g0) * sqrt(h * T * speed). The worst ratio seen on
# random piecewise-linear data is 0.39. See scripts/refinement_study.py.
SCHEME_CONSTANT = 0.5


def grid_lipschitz(g: GridFunction) -> float:
    """Largest difference quotient between neighbouring nodes."""
    return max(
        float(np.max(np.abs(np.diff(g.values, axis=k)))) / h if g.grid.shape[k] > 1 else 0.0
        for k, h in enumerate(g.grid.h)
    )


def default_scheme_tolerance(H: HamiltonianSpec, g: GridFunction, T: float, params: SolveParams | None = None) -> float:
    params = params or SolveParams()
    speed = float(np.max(H.local_speed(g.grid.points()))) * params.margin
    return SCHEME_CONSTANT * grid_lipschitz(g) * math.sqrt(max(g.grid.h) * T * speed)


def default_probes(T: float) -> tuple[float, ...]:
    return (T / 4, T / 2, 3 * T / 4)


def _boundary_margin(mask: np.ndarray, grid) -> float:
    if not mask.any():
        return math.inf
    pts = grid.points()
    dist = np.full(grid.shape, np.inf)
    for k in range(grid.dim):
        dist = np.minimum(dist, np.minimum(pts[k] - grid.lower[k], grid.upper[k] - pts[k]))
    return float(dist[mask].min())


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    g0: GridFunction
    gT: GridFunction
    w0: GridFunction
    sup_gap: float
    signed_gap: float
    overshoot: float
    verdict: bool
    tolerance: float
    scheme_tolerance: float
    boundary_margin: float
    interior: np.ndarray
    worst_node: tuple[int, ...]
    probe_gaps: dict[float, float] = field(default_factory=dict)
    u: SpaceTimeSolution | None = None
    w: SpaceTimeSolution | None = None

    def to_text(self) -> str:
        grid = self.g0.grid
        worst = grid.points()[(slice(None),) + self.worst_node]
        lines = [
            f"verdict: {'reconstructible' if self.verdict else 'not-reconstructible'}",
            f"sup_gap: {fmt(self.sup_gap)}",
            f"signed_gap: {fmt(self.signed_gap)}",
            f"overshoot: {fmt(self.overshoot)}",
            f"tolerance: {fmt(self.tolerance)}",
            f"scheme_tolerance: {fmt(self.scheme_tolerance)}",
            f"boundary_margin: {fmt(self.boundary_margin)}",
            f"interior_nodes: {int(self.interior.sum())}",
            "worst_point: " + ",".join(fmt(c) for c in worst),
        ]
        for t, gap in sorted(self.probe_gaps.items()):
            lines.append(f"probe_gap[{fmt(t)}]: {fmt(gap)}")
        return "\n".join(lines) + "\n"

    def probes_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,max_abs_gap\n")
        for t, gap in sorted(self.probe_gaps.items()):
            buf.write(f"{fmt(t)},{fmt(gap)}\n")
        return buf.getvalue()

    def write(self, outdir: str | Path) -> list[Path]:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "report.txt": self.to_text(),
            "g0.csv": self.g0.to_csv(),
            "gT.csv": self.gT.to_csv(),
            "w0.csv": self.w0.to_csv(),
            "probes.csv": self.probes_csv(),
        }
        paths = []
        for name, text in files.items():
            p = out / name
            p.write_text(text)
            paths.append(p)
        return paths


def make_reconstructible(
    H: HamiltonianSpec, g: GridFunction, T: float, params: SolveParams | None = None,
    times: Iterable[float] = (),
) -> tuple[GridFunction, SpaceTimeSolution]:
    """``g0 = v(0, .)`` for the backward solution ``v`` with ``v(T) = g``."""
    v = solve_backward(H, g, T, params, times)
    return v.initial, v


def reconstruct(
    H: HamiltonianSpec,
    g0: GridFunction,
    T: float,
    params: SolveParams | None = None,
    tolerance: float = 0.05,
    probe_times: Sequence[float] | None = (),
    scheme_tolerance: float | None = None,
) -> ReconstructionReport:
    """Solve forward from ``g0``, backward from ``u(T)``, and compare ``w(0)`` with ``g0``.

    ``probe_times=None`` uses the quarter points of ``[0, T]``; an empty
    sequence records no probes.
    """
    probes = default_probes(T) if probe_times is None else tuple(probe_times)
    u = solve_forward(H, g0, T, params, probes)
    gT = u.final
    w = solve_backward(H, gT, T, params, probes)
    w0 = w.initial
    mask = u.interior
    diff = g0.values - w0.values
    if mask.any():
        absd = np.where(mask, np.abs(diff), -np.inf)
        k = int(np.argmax(absd))
        sup_gap = float(absd.flat[k])
        worst = tuple(int(i) for i in np.unravel_index(k, diff.shape))
        signed = float(diff[mask].max())
        over = float((-diff)[mask].max())
    else:
        sup_gap, signed, over, worst = math.inf, math.nan, math.nan, (0,) * g0.grid.dim
    probe_gaps = {}
    for t in probes:
        d = np.abs(u.at(t).values - w.at(t).values)
        probe_gaps[t] = float(d[mask].max()) if mask.any() else math.inf
    if scheme_tolerance is None:
        scheme_tolerance = default_scheme_tolerance(H, g0, T, params)
    return ReconstructionReport(
        g0=g0, gT=gT, w0=w0,
        sup_gap=sup_gap, signed_gap=signed, overshoot=over,
        verdict=bool(sup_gap <= tolerance),
        tolerance=float(tolerance), scheme_tolerance=float(scheme_tolerance),
        boundary_margin=_boundary_margin(mask, g0.grid),
        interior=mask, worst_node=worst, probe_gaps=probe_gaps, u=u, w=w,
    )


@dataclass(frozen=True)
class SandwichResult:
    """Worst violations: ``u_below_w = max(w - u)`` and ``w_below_v = max(v - w)``."""

    u_below_w: float
    w_below_v: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.u_below_w <= self.tolerance and self.w_below_v <= self.tolerance


def sandwich_check(
    H: HamiltonianSpec,
    g: GridFunction,
    T: float,
    params: SolveParams | None = None,
    tolerance: float = 0.0,
    reference_v: Callable | None = None,
) -> SandwichResult:
    """Check ``u >= w >= v`` on every stored slice over interior nodes.

    ``v`` is the backward solution from ``g`` (or ``reference_v(t, *coords)``
    when supplied), ``u`` the forward solution from ``v(0)``, ``w`` the
    backward solution from ``u(T)``.
    """
    g0, v = make_reconstructible(H, g, T, params)
    u = solve_forward(H, g0, T, params)
    w = solve_backward(H, u.final, T, params)
    if not (u.times == v.times == w.times):
        raise RuntimeError("solves disagree on time stamps")
    mask = u.interior
    if not mask.any():
        raise ValueError("no interior nodes to compare")
    pts = g.grid.points()
    uw = wv = -math.inf
    for t, us, vs, ws in zip(u.times, u.slices, v.slices, w.slices):
        if reference_v is not None:
            vs = np.asarray(reference_v(t, *pts), float)
        uw = max(uw, float((ws - us)[mask].max()))
        wv = max(wv, float((vs - ws)[mask].max()))
    return SandwichResult(uw, wv, float(tolerance))


def bilateral_probe_1d(
    H: HamiltonianSpec,
    g0: GridFunction,
    T: float,
    params: SolveParams | None = None,
    probe_times: Sequence[float] | None = None,
    tolerance: float = 0.05,
) -> float:
    """Largest ``|u - w|`` at interior probe times for a reconstructible 1D ``g0``.

    Only one-dimensional, positively homogeneous Hamiltonians are accepted:
    outside that class equality of ``u`` and ``w`` is not known to hold.
    """
    if H.dim != 1:
        raise AssumptionError("bilateral probe is restricted to one space dimension")
    if not H.positively_homogeneous:
        raise AssumptionError(f"{H.name} is not positively homogeneous in p")
    probes = default_probes(T) if probe_times is None else tuple(probe_times)
    if not probes or any(not 0 < t < T for t in probes):
        raise ValueError("probe times must lie strictly inside (0, T)")
    rep = reconstruct(H, g0, T, params, tolerance, probes)
    if not rep.verdict:
        raise AssumptionError(
            f"g0 is not reconstructible at tolerance {tolerance} (sup_gap={rep.sup_gap:.3g})"
        )
    return max(rep.probe_gaps.values())
