"""Hamiltonians ``H(x, p)`` with declared structure, Legendre transform, velocity sets.

Points are arrays whose *leading* axis is the coordinate index, so a batch of
1D points has shape ``(1, N)`` and ``H`` returns shape ``(N,)``. All the
built-in Hamiltonians are vectorised this way.

Structural flags (convexity in p, positive homogeneity, concavity in x) are
declared by whoever builds the Hamiltonian. They are audited on samples by
the ``check_*``/``validate_*`` helpers, never inferred.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

HFunc = Callable[[np.ndarray, np.ndarray], np.ndarray]


class AssumptionError(ValueError):
    """A Hamiltonian lacks the structure an operation relies on."""


def _norm(z: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(z * z, axis=0))


@dataclass(frozen=True)
class HamiltonianSpec:
    """Evaluatable ``H(x, p)`` plus the assumptions it is declared to satisfy.

    ``speed`` is an affine bound ``(a, b)`` on the propagation speed,
    ``sup_p |dH/dp(x, p)| <= a + b|x|``. It drives the numerical dissipation
    and the boundary-layer width of the grid solver. When omitted it falls
    back to the bound ``M(1 + |x|)`` implied by the Lipschitz constant.
    """

    evaluate: HFunc
    dim: int = 1
    lipschitz_M: float | None = None
    convex_in_p: bool = False
    positively_homogeneous: bool = False
    concave_in_x: bool = False
    gradient_p: HFunc | None = None
    gradient_x: HFunc | None = None
    speed: tuple[float, float] | None = None
    nonsmooth: Callable[[np.ndarray, np.ndarray], bool] | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if self.lipschitz_M is not None and self.lipschitz_M < 0:
            raise ValueError("lipschitz_M must be nonnegative")

    def __call__(self, x, p) -> np.ndarray:
        return self.evaluate(np.asarray(x, float), np.asarray(p, float))

    @property
    def speed_bound(self) -> tuple[float, float]:
        if self.speed is not None:
            return self.speed
        if self.lipschitz_M is None:
            raise AssumptionError(f"{self.name}: no Lipschitz constant or speed bound declared")
        return (self.lipschitz_M, self.lipschitz_M)

    def local_speed(self, x: np.ndarray) -> np.ndarray:
        """Upper bound on ``|dH/dp|`` at the points ``x`` (shape ``(dim, ...)``)."""
        a, b = self.speed_bound
        return a + b * _norm(np.asarray(x, float))

    def reflected(self) -> HamiltonianSpec:
        """``H~(x, p) = H(x, -p)``, the Hamiltonian of the time-reversed equation."""
        f = self.evaluate
        gp, gx = self.gradient_p, self.gradient_x
        ns = self.nonsmooth
        return HamiltonianSpec(
            evaluate=lambda x, p: f(x, -p),
            dim=self.dim,
            lipschitz_M=self.lipschitz_M,
            convex_in_p=self.convex_in_p,
            positively_homogeneous=self.positively_homogeneous,
            concave_in_x=self.concave_in_x,
            gradient_p=None if gp is None else (lambda x, p: -gp(x, -p)),
            gradient_x=None if gx is None else (lambda x, p: gx(x, -p)),
            speed=self.speed,
            nonsmooth=None if ns is None else (lambda x, p: ns(x, -p)),
            name=f"reflected({self.name})",
            params=dict(self.params),
        )


# -- built-ins ------------------------------------------------------------

def eikonal(dim: int = 1) -> HamiltonianSpec:
    """``H(x, p) = |p|``."""
    return HamiltonianSpec(
        evaluate=lambda x, p: _norm(p),
        dim=dim,
        lipschitz_M=1.0,
        convex_in_p=True,
        positively_homogeneous=True,
        concave_in_x=True,
        gradient_p=lambda x, p: p / _norm(p),
        gradient_x=lambda x, p: np.zeros_like(x),
        speed=(1.0, 0.0),
        nonsmooth=lambda x, p: bool(np.any(_norm(p) == 0.0)),
        name="eikonal",
    )


def xeikonal(dim: int = 1) -> HamiltonianSpec:
    """``H(x, p) = |x||p|``: convex and homogeneous in p, not concave in x."""
    return HamiltonianSpec(
        evaluate=lambda x, p: _norm(x) * _norm(p),
        dim=dim,
        lipschitz_M=1.0,
        convex_in_p=True,
        positively_homogeneous=True,
        concave_in_x=False,
        gradient_p=lambda x, p: _norm(x) * p / _norm(p),
        gradient_x=lambda x, p: _norm(p) * x / _norm(x),
        speed=(0.0, 1.0),
        nonsmooth=lambda x, p: bool(np.any(_norm(p) == 0.0) or np.any(_norm(x) == 0.0)),
        name="xeikonal",
    )


def drift(c, dim: int | None = None) -> HamiltonianSpec:
    """``H(x, p) = <c, p>``, transport with constant velocity c."""
    c = np.atleast_1d(np.asarray(c, float))
    if dim is not None and c.size == 1 and dim > 1:
        c = np.repeat(c, dim)
    d = c.size

    def f(x, p):
        return np.tensordot(c, p, axes=(0, 0))

    def gp(x, p):
        return np.broadcast_to(c.reshape((d,) + (1,) * (p.ndim - 1)), p.shape).copy()

    speed = float(np.sqrt(np.sum(c * c)))
    return HamiltonianSpec(
        evaluate=f,
        dim=d,
        lipschitz_M=speed,
        convex_in_p=True,
        positively_homogeneous=True,
        concave_in_x=True,
        gradient_p=gp,
        gradient_x=lambda x, p: np.zeros_like(x),
        speed=(speed, 0.0),
        nonsmooth=lambda x, p: False,
        name="drift:" + ",".join(f"{v:g}" for v in c),
        params={"c": tuple(c.tolist())},
    )


def shifted_eikonal(a: float, b: float, dim: int = 1) -> HamiltonianSpec:
    """``H(x, p) = a|p| - b|x|``; convex in p and concave in x when a, b >= 0."""
    if a < 0 or b < 0:
        raise ValueError("shifted-eikonal needs a, b >= 0")
    return HamiltonianSpec(
        evaluate=lambda x, p: a * _norm(p) - b * _norm(x),
        dim=dim,
        lipschitz_M=max(a, b),
        convex_in_p=True,
        positively_homogeneous=(b == 0),
        concave_in_x=True,
        gradient_p=lambda x, p: a * p / _norm(p),
        gradient_x=lambda x, p: -b * x / _norm(x),
        speed=(float(a), 0.0),
        nonsmooth=lambda x, p: bool(np.any(_norm(p) == 0.0) or (b != 0 and np.any(_norm(x) == 0.0))),
        name=f"shifted-eikonal:{a:g},{b:g}",
        params={"a": a, "b": b},
    )


def quadratic(dim: int = 1) -> HamiltonianSpec:
    """``H(x, p) = |p|^2 / 2``. Superlinear, so no Lipschitz constant is declared."""
    return HamiltonianSpec(
        evaluate=lambda x, p: 0.5 * np.sum(p * p, axis=0),
        dim=dim,
        convex_in_p=True,
        gradient_p=lambda x, p: p.copy(),
        gradient_x=lambda x, p: np.zeros_like(x),
        name="quadratic",
    )


def from_name(spec: str, dim: int = 1) -> HamiltonianSpec:
    """Parse ``eikonal``, ``xeikonal``, ``drift:c[,c2]``, ``shifted-eikonal:a,b``."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "eikonal" and not arg:
        return eikonal(dim)
    if name == "xeikonal" and not arg:
        return xeikonal(dim)
    if name == "drift":
        vals = [float(v) for v in arg.split(",")] if arg else [0.0]
        if len(vals) not in (1, dim):
            raise ValueError(f"drift needs 1 or {dim} components")
        return drift(vals, dim=dim)
    if name == "shifted-eikonal":
        try:
            a, b = (float(v) for v in arg.split(","))
        except ValueError:
            raise ValueError("shifted-eikonal expects 'shifted-eikonal:a,b'") from None
        return shifted_eikonal(a, b, dim)
    raise ValueError(f"unknown Hamiltonian {spec!r}")


# -- Legendre transform ---------------------------------------------------

@dataclass(frozen=True)
class LagrangianSample:
    x: tuple[float, ...]
    v: tuple[float, ...]
    value: float
    infinite: bool

    def __post_init__(self):
        if self.infinite != math.isinf(self.value):
            raise ValueError("infinite flag must agree with the value")


def _grid_points(center: np.ndarray, half_width: float, n: int, dim: int) -> np.ndarray:
    axes = [np.linspace(c - half_width, c + half_width, n) for c in center]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh])


def _shell(radius: float, dim: int, n: int) -> np.ndarray:
    if dim == 1:
        return np.array([[-radius, radius]])
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return radius * np.stack([np.cos(theta), np.sin(theta)])


def legendre_transform(
    H: HamiltonianSpec,
    x,
    v,
    search_radius: float = 100.0,
    refinement_levels: int = 6,
    allow_superlinear: bool = False,
    points_per_axis: int = 201,
    growth_tol: float = 1e-9,
) -> LagrangianSample:
    """``sup_p <v, p> - H(x, p)`` by coarse-to-fine grid search on ``|p| <= R``.

    The supremum is declared infinite when the objective is still increasing
    on the outermost shell: the best shell value at ``R`` beats the best at
    ``R/2`` by more than ``growth_tol * R``. Under a linear growth bound the
    objective is eventually affine along rays, so this separates the two cases.
    """
    if not H.convex_in_p:
        raise AssumptionError(f"{H.name}: Legendre transform requires H convex in p")
    if H.lipschitz_M is None and not allow_superlinear:
        raise AssumptionError(
            f"{H.name}: no linear growth bound declared; pass allow_superlinear=True to force"
        )
    if search_radius <= 0:
        raise ValueError("search_radius must be positive")
    if H.dim > 2:
        raise ValueError("transform supported in dimensions 1 and 2")
    d = H.dim
    xa = np.asarray(x, float).reshape(d, 1)
    va = np.asarray(v, float).reshape(d)

    def objective(p):
        return va @ p - H(np.broadcast_to(xa, p.shape), p)

    outer = objective(_shell(search_radius, d, 720)).max()
    inner = objective(_shell(search_radius / 2, d, 720)).max()
    if outer - inner > growth_tol * search_radius:
        return LagrangianSample(tuple(map(float, xa.ravel())), tuple(map(float, va)), math.inf, True)

    center = np.zeros(d)
    half = search_radius
    best = -math.inf
    n = points_per_axis if d == 1 else min(points_per_axis, 101)
    for _ in range(refinement_levels + 1):
        pts = _grid_points(center, half, n, d)
        pts = pts[:, _norm(pts) <= search_radius * (1 + 1e-12)]
        if pts.shape[1] == 0:
            break
        vals = objective(pts)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
        center = pts[:, k]
        half = 2 * half / (n - 1)
    best = max(best, float(outer))
    return LagrangianSample(tuple(map(float, xa.ravel())), tuple(map(float, va)), best, False)


def support_set_1d(H: HamiltonianSpec, x: float) -> tuple[float, float]:
    """Velocity set ``{v : v p <= H(x, p) for all p}`` of a 1D homogeneous convex H."""
    if H.dim != 1:
        raise AssumptionError("support_set_1d is one-dimensional")
    if not (H.positively_homogeneous and H.convex_in_p):
        raise AssumptionError(f"{H.name}: needs a positively homogeneous, convex-in-p Hamiltonian")
    xa = np.array([[float(x)]])
    hi = float(H(xa, np.array([[1.0]]))[0])
    lo = -float(H(xa, np.array([[-1.0]]))[0])
    if hi + (-lo) < 0:
        raise AssumptionError(f"H(x,1) + H(x,-1) < 0 at x={x}: not sublinear in p")
    return lo, hi


# -- audits ---------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionReport:
    p_ratio: float
    x_ratio: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.p_ratio <= 1 + 1e-9 and self.x_ratio <= 1 + 1e-9


def _ball(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    z = rng.normal(size=(dim, n))
    z /= np.maximum(_norm(z), 1e-300)
    r = radius * rng.random(n) ** (1.0 / dim)
    return z * r


def validate_assumption_A(
    H: HamiltonianSpec, sample_count: int = 10_000, domain_radius: float = 1.0, seed=0
) -> AssumptionReport:
    """Worst sampled ratios of the two Lipschitz bounds to their allowances.

    ``p_ratio = max |H(x,p) - H(x,q)| / (M(1+|x|)|p-q|)`` and likewise
    ``x_ratio`` with ``M(1+|p|)|x-y|``. Values above one falsify the
    declared constant.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if H.lipschitz_M is None:
        raise AssumptionError(f"{H.name}: no Lipschitz constant declared")
    rng = np.random.default_rng(seed)
    d, M = H.dim, H.lipschitz_M
    x, y, p, q = (_ball(rng, sample_count, d, domain_radius) for _ in range(4))
    with np.errstate(divide="ignore", invalid="ignore"):
        num_p = np.abs(H(x, p) - H(x, q))
        den_p = M * (1 + _norm(x)) * _norm(p - q)
        num_x = np.abs(H(x, p) - H(y, p))
        den_x = M * (1 + _norm(p)) * _norm(x - y)
        rp = np.where(num_p == 0, 0.0, num_p / den_p)
        rx = np.where(num_x == 0, 0.0, num_x / den_x)
    return AssumptionReport(float(np.max(rp)), float(np.max(rx)), sample_count)


def check_homogeneity(
    H: HamiltonianSpec, sample_count: int = 1000, radius: float = 5.0, seed=0,
    factors=(0.5, 2.0, 10.0), rtol: float = 1e-12,
) -> bool:
    """Sampled ``H(x, a p) == a H(x, p)`` for the given positive factors."""
    rng = np.random.default_rng(seed)
    x = _ball(rng, sample_count, H.dim, radius)
    p = _ball(rng, sample_count, H.dim, radius)
    base = H(x, p)
    for a in factors:
        scaled = H(x, a * p)
        if not np.all(np.abs(scaled - a * base) <= rtol * np.maximum(np.abs(a * base), 1.0)):
            return False
    return True
