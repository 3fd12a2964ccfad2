"""Discrete-time Mayer and inverse Mayer problems on a finite state space.

States are 0-based internally. Instance files and printed tables use the
1-based labels ``1..n``.

Everything here is exact: values are ints or Fractions and all comparisons
are equality tests, no tolerances.
"""
from __future__ import annotations

import io
import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .galois import OperatorPair

FORWARD = "forward"
BACKWARD = "backward"

BRUTE_FORCE_MAX_STATES = 8
BRUTE_FORCE_MAX_HORIZON = 8


class InvariantError(ValueError):
    """A transition map has an empty row (no successor) or empty column (not onto)."""


class SizeGuardError(ValueError):
    """Refusal to enumerate trajectories beyond the brute-force size guard."""


@dataclass(frozen=True)
class TransitionMap:
    """Set-valued map ``phi`` as a boolean adjacency matrix, ``adj[i][j]`` iff j in phi(i)."""

    adjacency: tuple[tuple[bool, ...], ...]

    def __post_init__(self):
        adj = tuple(tuple(bool(a) for a in row) for row in self.adjacency)
        object.__setattr__(self, "adjacency", adj)
        n = len(adj)
        if n == 0 or any(len(row) != n for row in adj):
            raise InvariantError("adjacency must be a nonempty square matrix")
        for i, row in enumerate(adj):
            if not any(row):
                raise InvariantError(f"state {i + 1} has no successor")
        for j in range(n):
            if not any(adj[i][j] for i in range(n)):
                raise InvariantError(f"state {j + 1} is not reachable (map is not onto)")

    @classmethod
    def from_successors(cls, successors: Sequence[Sequence[int]], one_based: bool = True) -> TransitionMap:
        n = len(successors)
        off = 1 if one_based else 0
        adj = [[False] * n for _ in range(n)]
        for i, js in enumerate(successors):
            for j in js:
                adj[i][j - off] = True
        return cls(tuple(map(tuple, adj)))

    @classmethod
    def identity(cls, n: int) -> TransitionMap:
        return cls(tuple(tuple(i == j for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, a in enumerate(self.adjacency[i]) if a)

    def predecessors(self, j: int) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.adjacency[i][j])

    def power(self, k: int) -> TransitionMap:
        """Map ``x0 -> {x(k)}`` over trajectories of length k."""
        m = np.eye(self.n, dtype=bool)
        a = np.array(self.adjacency, dtype=bool)
        for _ in range(k):
            m = (m.astype(int) @ a.astype(int)) > 0
        return TransitionMap(tuple(map(tuple, m.tolist())))

    def relabel(self, perm: Sequence[int]) -> TransitionMap:
        """Rename state ``i`` to ``perm[i]``."""
        n = self.n
        adj = [[False] * n for _ in range(n)]
        for i in range(n):
            for j in self.successors(i):
                adj[perm[i]][perm[j]] = True
        return TransitionMap(tuple(map(tuple, adj)))

    def operator_pair(self) -> OperatorPair:
        return OperatorPair(lambda g: forward_step(self, g), lambda g: backward_step(self, g))


@dataclass(frozen=True)
class ValueTable:
    """Rows ``k = 0..T`` of a value function; ``rows[k][i]`` is the value at state i."""

    horizon: int
    rows: tuple[tuple, ...]
    direction: str

    def row(self, k: int) -> tuple:
        return self.rows[k]

    def __getitem__(self, key):
        k, i = key
        return self.rows[k][i]


def _check_len(phi: TransitionMap, g: Sequence) -> tuple:
    g = tuple(g)
    if len(g) != phi.n:
        raise ValueError(f"value vector has length {len(g)}, map has {phi.n} states")
    return g


def forward_step(phi: TransitionMap, g: Sequence) -> tuple:
    """``F1(g)(j) = min{ g(i) : j in phi(i) }``."""
    g = _check_len(phi, g)
    return tuple(min(g[i] for i in phi.predecessors(j)) for j in range(phi.n))


def backward_step(phi: TransitionMap, g: Sequence) -> tuple:
    """``B1(g)(i) = max{ g(j) : j in phi(i) }``."""
    g = _check_len(phi, g)
    return tuple(max(g[j] for j in phi.successors(i)) for i in range(phi.n))


def forward_table(phi: TransitionMap, g0: Sequence, T: int) -> ValueTable:
    if T < 0:
        raise ValueError("horizon must be nonnegative")
    rows = [_check_len(phi, g0)]
    for _ in range(T):
        rows.append(forward_step(phi, rows[-1]))
    return ValueTable(T, tuple(rows), FORWARD)


def backward_table(phi: TransitionMap, gT: Sequence, T: int) -> ValueTable:
    if T < 0:
        raise ValueError("horizon must be nonnegative")
    rows = [_check_len(phi, gT)]
    for _ in range(T):
        rows.append(backward_step(phi, rows[-1]))
    return ValueTable(T, tuple(reversed(rows)), BACKWARD)


def trajectories(phi: TransitionMap, T: int) -> Iterator[tuple[int, ...]]:
    """All state sequences ``x(0..T)`` with ``x(k+1) in phi(x(k))``."""
    stack = [(i,) for i in range(phi.n)]
    while stack:
        path = stack.pop()
        if len(path) == T + 1:
            yield path
            continue
        for j in phi.successors(path[-1]):
            stack.append(path + (j,))


def brute_force_value(phi: TransitionMap, g: Sequence, T: int, direction: str) -> ValueTable:
    """Value table by enumerating every trajectory (independent of the recursion)."""
    if phi.n > BRUTE_FORCE_MAX_STATES or T > BRUTE_FORCE_MAX_HORIZON:
        raise SizeGuardError(
            f"enumeration limited to n <= {BRUTE_FORCE_MAX_STATES}, T <= {BRUTE_FORCE_MAX_HORIZON}"
        )
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"unknown direction {direction!r}")
    g = _check_len(phi, g)
    best: list[list] = [[None] * phi.n for _ in range(T + 1)]
    for path in trajectories(phi, T):
        val = g[path[0]] if direction == FORWARD else g[path[-1]]
        for k, xk in enumerate(path):
            cur = best[k][xk]
            if cur is None or (val < cur if direction == FORWARD else val > cur):
                best[k][xk] = val
    return ValueTable(T, tuple(tuple(r) for r in best), direction)


@dataclass(frozen=True)
class DiscreteReconstruction:
    g: tuple
    g0: tuple
    U: ValueTable
    V: ValueTable
    W: ValueTable
    verdict: bool

    def interior_mismatches(self) -> list[tuple[int, int]]:
        """(k, state) pairs with ``U(k, i) != W(k, i)``, 0-based."""
        T = self.U.horizon
        return [
            (k, i)
            for k in range(T + 1)
            for i in range(len(self.g0))
            if self.U[k, i] != self.W[k, i]
        ]


def reconstruct_discrete(phi: TransitionMap, g: Sequence, T: int) -> DiscreteReconstruction:
    """Build ``g0 = B1^T(g)``, run it forward, then back from ``U(T, .)``."""
    V = backward_table(phi, g, T)
    g0 = V.row(0)
    U = forward_table(phi, g0, T)
    W = backward_table(phi, U.row(T), T)
    return DiscreteReconstruction(tuple(g), g0, U, V, W, W.row(0) == g0)


def surjective_maps(n: int) -> Iterator[TransitionMap]:
    """Every onto map with nonempty values on n states, sparsest first."""
    for edges in range(n, n * n + 1):
        for cells in itertools.combinations(range(n * n), edges):
            bits = [False] * (n * n)
            for c in cells:
                bits[c] = True
            rows = [tuple(bits[i * n:(i + 1) * n]) for i in range(n)]
            if all(any(r[j] for r in rows) for j in range(n)) and all(any(r) for r in rows):
                yield TransitionMap(tuple(rows))


def random_surjective(rng: np.random.Generator, n: int, density: float = 0.4) -> TransitionMap:
    """Rejection-sample an onto map with nonempty values."""
    while True:
        adj = rng.random((n, n)) < density
        if adj.any(axis=1).all() and adj.any(axis=0).all():
            return TransitionMap(tuple(map(tuple, adj.tolist())))


def value_ranks(g: Sequence) -> tuple[int, ...]:
    """Dense ranks ``1..m`` of the values; min/max commute with monotone relabelling."""
    levels = sorted(set(g))
    return tuple(levels.index(v) + 1 for v in g)


def canonical_instance(phi: TransitionMap, g: Sequence) -> tuple:
    """Representative of ``(phi, g)`` up to relabelling of states."""
    best = None
    for perm in itertools.permutations(range(phi.n)):
        adj = phi.relabel(perm).adjacency
        gp = [None] * phi.n
        for i, p in enumerate(perm):
            gp[p] = g[i]
        key = (tuple(gp), adj)
        if best is None or key < best:
            best = key
    return best


@dataclass(frozen=True)
class GapInstance:
    phi: TransitionMap
    g: tuple
    g0: tuple
    mismatches: tuple[tuple[int, int], ...]

    def key(self) -> tuple:
        return canonical_instance(self.phi, value_ranks(self.g0))


def search_uv_gap(
    n: int,
    T: int,
    value_range: tuple[int, int],
    budget: int,
    seed: int = 0,
    max_trials: int = 100_000,
    exhaustive_limit: int = 200_000,
) -> list[GapInstance]:
    """Instances ``(phi, g)`` that reconstruct exactly yet have ``U != W`` at some 0 < k < T.

    Two instances count as the same when their reconstruction problems
    ``(phi, g0)`` agree after relabelling states and replacing ``g0`` by its
    value ranks; one representative per class is kept. Small search spaces
    are enumerated exhaustively (sparsest maps first, then ``g`` with the most
    distinct values first), larger ones sampled with ``max_trials`` random
    draws. Every emitted instance is re-verified by trajectory enumeration
    when it fits the brute-force guard.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    lo, hi = value_range
    values = range(lo, hi + 1)
    if n < 2 or T < 2 or lo >= hi:
        return []

    space = 2 ** (n * n) * len(values) ** n
    if space <= exhaustive_limit:
        gs = sorted(itertools.product(values, repeat=n), key=lambda g: (-len(set(g)), g))
        candidates = ((phi, g) for phi in surjective_maps(n) for g in gs)
    else:
        rng = np.random.default_rng(seed)

        def sample():
            for _ in range(max_trials):
                phi = random_surjective(rng, n)
                g = tuple(int(v) for v in rng.integers(lo, hi + 1, size=n))
                yield phi, g

        candidates = sample()

    found: list[GapInstance] = []
    seen = set()
    for phi, g in candidates:
        rec = reconstruct_discrete(phi, g, T)
        if not rec.verdict:
            continue
        gaps = tuple(m for m in rec.interior_mismatches() if 0 < m[0] < T)
        if not gaps:
            continue
        inst = GapInstance(phi, tuple(g), rec.g0, gaps)
        key = inst.key()
        if key in seen:
            continue
        if not _verified_gap(phi, rec, T):
            continue
        seen.add(key)
        found.append(inst)
        if len(found) >= budget:
            break
    return found


def _verified_gap(phi: TransitionMap, rec: DiscreteReconstruction, T: int) -> bool:
    if phi.n > BRUTE_FORCE_MAX_STATES or T > BRUTE_FORCE_MAX_HORIZON:
        return True
    U = brute_force_value(phi, rec.g0, T, FORWARD)
    W = brute_force_value(phi, U.row(T), T, BACKWARD)
    return U == rec.U and W == rec.W and W.row(0) == rec.g0


# -- instance files -------------------------------------------------------

def _parse_value(tok: str):
    return Fraction(tok) if "/" in tok or "." in tok else int(tok)


def parse_instance(text: str) -> tuple[TransitionMap, tuple, int]:
    """Parse ``n T`` / n adjacency rows / the n values of g."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty instance")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("first line must be 'n T'")
    n, T = int(head[0]), int(head[1])
    if n < 1 or T < 0:
        raise ValueError("need n >= 1 and T >= 0")
    if len(lines) != n + 2:
        raise ValueError(f"expected {n + 2} non-empty lines, got {len(lines)}")
    rows = []
    for ln in lines[1:n + 1]:
        toks = ln.split()
        if len(toks) != n or any(t not in ("0", "1") for t in toks):
            raise ValueError(f"bad adjacency row: {ln!r}")
        rows.append(tuple(t == "1" for t in toks))
    g = tuple(_parse_value(t) for t in lines[n + 1].split())
    if len(g) != n:
        raise ValueError(f"expected {n} values of g, got {len(g)}")
    return TransitionMap(tuple(rows)), g, T


def read_instance(path: str | Path) -> tuple[TransitionMap, tuple, int]:
    return parse_instance(Path(path).read_text())


def format_instance(phi: TransitionMap, g: Sequence, T: int) -> str:
    out = [f"{phi.n} {T}"]
    out += [" ".join("1" if a else "0" for a in row) for row in phi.adjacency]
    out.append(" ".join(str(v) for v in g))
    return "\n".join(out) + "\n"


def tables_csv(tables: dict[str, ValueTable]) -> str:
    """CSV ``k,state,value,table`` with 1-based states, in the printed row order."""
    buf = io.StringIO()
    buf.write("k,state,value,table\n")
    for name, tab in tables.items():
        for k in _row_order(tab):
            for i, v in enumerate(tab.row(k)):
                buf.write(f"{k},{i + 1},{v},{name}\n")
    return buf.getvalue()


def _row_order(tab: ValueTable) -> range:
    if tab.direction == FORWARD:
        return range(tab.horizon + 1)
    return range(tab.horizon, -1, -1)


def format_table(name: str, tab: ValueTable) -> str:
    lines = []
    for k in _row_order(tab):
        vals = " ".join(str(v) for v in tab.row(k))
        lines.append(f"{name}({k},.) = ( {vals} )")
    return "\n".join(lines)


EXAMPLE_PHI = TransitionMap.from_successors([[2], [1, 3], [1]])
EXAMPLE_G = (1, 2, 3)
EXAMPLE_T = 3
