"""Monotone forward/backward operator pairs on finite function spaces.

A function on a finite set is stored as a tuple of extended reals. Finite
values may be ``int`` or ``fractions.Fraction`` (exact) or ``float``;
``math.inf`` and ``-math.inf`` play the role of the two infinities, which
Python already orders totally against ints and Fractions.

For a pair ``(F, B)`` of monotone operators with ``B(F(g)) <= g`` and
``F(B(g)) >= g`` the composition ``B o F o B`` collapses to ``B``. The
functions below check those hypotheses on samples and evaluate both sides
of the identity.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

Scalar = object  # int | Fraction | float, including +-inf
FiniteFunction = tuple
Operator = Callable[[FiniteFunction], FiniteFunction]


class DomainError(ValueError):
    """Raised when two finite functions are compared across different domains."""


def as_function(values: Iterable) -> FiniteFunction:
    g = tuple(values)
    if not g:
        raise DomainError("a finite function needs at least one value")
    return g


def leq(g: Sequence, h: Sequence) -> bool:
    """Pointwise ``g <= h``."""
    if len(g) != len(h):
        raise DomainError(f"length mismatch: {len(g)} vs {len(h)}")
    return all(a <= b for a, b in zip(g, h))


def ext_min(values: Iterable) -> Scalar:
    # inf of the empty set is +inf
    return min(values, default=math.inf)


def ext_max(values: Iterable) -> Scalar:
    return max(values, default=-math.inf)


@dataclass(frozen=True)
class OperatorPair:
    forward: Operator
    backward: Operator

    def compose(self, times: int) -> OperatorPair:
        """Pair ``(F^times, B^times)``; ``times=0`` gives the identity pair."""
        if times < 0:
            raise ValueError("times must be nonnegative")
        f, b = self.forward, self.backward

        def fwd(g):
            for _ in range(times):
                g = f(g)
            return tuple(g)

        def bwd(g):
            for _ in range(times):
                g = b(g)
            return tuple(g)

        return OperatorPair(fwd, bwd)


IDENTITY = OperatorPair(tuple, tuple)


def setvalued_pair(successors: Sequence[Iterable[int]], n_target: int | None = None) -> OperatorPair:
    """Inf/sup operators of a set-valued map ``phi: X ~> Y``.

    ``successors[x]`` lists the (0-based) points of ``phi(x)``. The forward
    operator takes the infimum of ``g0`` over the preimage of ``y``; the
    backward operator takes the supremum of ``g1`` over ``phi(x)``.
    """
    succ = [tuple(sorted(set(s))) for s in successors]
    if n_target is None:
        n_target = 1 + max((j for s in succ for j in s), default=-1)
    preimage: list[list[int]] = [[] for _ in range(n_target)]
    for x, ys in enumerate(succ):
        for y in ys:
            preimage[y].append(x)

    def forward(g0):
        if len(g0) != len(succ):
            raise DomainError(f"expected {len(succ)} values, got {len(g0)}")
        return tuple(ext_min(g0[x] for x in xs) for xs in preimage)

    def backward(g1):
        if len(g1) != n_target:
            raise DomainError(f"expected {n_target} values, got {len(g1)}")
        return tuple(ext_max(g1[y] for y in ys) for ys in succ)

    return OperatorPair(forward, backward)


def check_monotone(op: Operator, samples: Iterable[tuple[Sequence, Sequence]]) -> bool:
    """True iff ``op(g) <= op(g2)`` for every sampled ordered pair ``g <= g2``."""
    for g, g2 in samples:
        if len(g) != len(g2):
            raise DomainError(f"length mismatch: {len(g)} vs {len(g2)}")
        if not leq(g, g2):
            raise ValueError("sample pair is not ordered")
        if not leq(op(tuple(g)), op(tuple(g2))):
            return False
    return True


def check_galois_inequalities(pair: OperatorPair, g0: Sequence, g1: Sequence) -> tuple[bool, bool]:
    """Return ``(B(F(g0)) <= g0, F(B(g1)) >= g1)``."""
    g0, g1 = tuple(g0), tuple(g1)
    bf = pair.backward(pair.forward(g0))
    fb = pair.forward(pair.backward(g1))
    return leq(bf, g0), leq(g1, fb)


def reconstruction_identity(pair: OperatorPair, g: Sequence) -> tuple[FiniteFunction, FiniteFunction, bool]:
    """Evaluate ``B(g)`` and ``B(F(B(g)))`` and whether they coincide."""
    bg = tuple(pair.backward(tuple(g)))
    bfbg = tuple(pair.backward(pair.forward(bg)))
    return bg, bfbg, bg == bfbg
