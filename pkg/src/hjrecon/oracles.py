"""Closed-form solutions of five one-dimensional reconstruction instances.

Each instance provides the initial function ``g0``, the forward solution
``u``, the terminal function ``gT = u(T, .)``, the backward solution ``w``
from ``gT``, and where one exists a backward solution ``v`` with
``v(0, .) = g0``. All formulas are exact and vectorised over ``x``.

=================  ===========  ==========================================
name               Hamiltonian  initial function
=================  ===========  ==========================================
ramp-collapse      ``|p|``      ``max(0, T - |x|)``
vee-spread         ``|p|``      ``|x|``
xeik-bilateral     ``|x||p|``   ``max(1 - |x|e^-T, |x|e^T - 1)``
valpha             ``|p|``      ``0``
horizon-limit      ``|p|``      ``min(0, 1 - |x|)``
=================  ===========  ==========================================
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

FIELDS = ("g0", "u", "gT", "w", "v")


class UnknownOracle(KeyError):
    pass


class NoSuchSolution(ValueError):
    """The requested field does not exist for this instance and horizon."""


@dataclass(frozen=True)
class OracleInstance:
    name: str
    hamiltonian: str
    g0: Callable
    u: Callable
    gT: Callable
    w: Callable
    v: Callable | None
    verdict: Callable[[float], bool]
    default_T: float = 1.0


def _abs(x):
    return np.abs(np.asarray(x, float))


def _ramp_v(t, x, T):
    raise NoSuchSolution("max(0, T - |x|) is not the time-0 slice of any backward solution")


def _plateau(t, T):
    e = np.exp(2 * (T - t))
    return (e - 1) / (e + 1)


def _xeik_v(t, x, T):
    ax = _abs(x)
    return np.maximum(1 - ax * np.exp(t - T), ax * np.exp(T - t) - 1)


def _xeik_u(t, x, T):
    # bilateral, so it is both the forward solution and the backward one from u(T)
    return np.maximum(_xeik_v(t, x, T), _plateau(0.0, T))


def _hl_v(t, x, T):
    if T > 1:
        raise NoSuchSolution("min(0, 1 - |x|) is not reconstructible for T > 1")
    return np.minimum(0.0, 1 - t - _abs(x))


_INSTANCES = {
    "ramp-collapse": OracleInstance(
        name="ramp-collapse",
        hamiltonian="eikonal",
        g0=lambda x, T: np.maximum(0.0, T - _abs(x)),
        u=lambda t, x, T: np.maximum(0.0, T - t - _abs(x)),
        gT=lambda x, T: np.zeros_like(_abs(x)),
        w=lambda t, x, T: np.zeros(np.broadcast(t, x).shape),
        v=_ramp_v,
        verdict=lambda T: False,
    ),
    "vee-spread": OracleInstance(
        name="vee-spread",
        hamiltonian="eikonal",
        g0=lambda x, T: _abs(x),
        u=lambda t, x, T: np.maximum(0.0, _abs(x) - t),
        gT=lambda x, T: np.maximum(0.0, _abs(x) - T),
        w=lambda t, x, T: np.maximum(0.0, _abs(x) - t),
        v=lambda t, x, T: np.maximum(0.0, _abs(x) - t),
        verdict=lambda T: True,
    ),
    "xeik-bilateral": OracleInstance(
        name="xeik-bilateral",
        hamiltonian="xeikonal",
        g0=lambda x, T: _xeik_v(0.0, x, T),
        u=_xeik_u,
        gT=lambda x, T: _xeik_u(T, x, T),
        w=_xeik_u,
        v=_xeik_v,
        verdict=lambda T: True,
    ),
    "valpha": OracleInstance(
        name="valpha",
        hamiltonian="eikonal",
        g0=lambda x, T: np.zeros_like(_abs(x)),
        u=lambda t, x, T: np.zeros(np.broadcast(t, x).shape),
        gT=lambda x, T: np.zeros_like(_abs(x)),
        w=lambda t, x, T: np.zeros(np.broadcast(t, x).shape),
        v=None,  # family, see valpha()
        verdict=lambda T: True,
    ),
    "horizon-limit": OracleInstance(
        name="horizon-limit",
        hamiltonian="eikonal",
        g0=lambda x, T: np.minimum(0.0, 1 - _abs(x)),
        u=lambda t, x, T: np.minimum(0.0, 1 - t - _abs(x)),
        gT=lambda x, T: np.minimum(0.0, 1 - T - _abs(x)),
        w=lambda t, x, T: np.minimum.reduce([
            np.zeros(np.broadcast(t, x).shape),
            np.full(np.broadcast(t, x).shape, 1.0 - T),
            1 - t - _abs(x),
        ]),
        v=_hl_v,
        verdict=lambda T: T <= 1,
    ),
}

NAMES = tuple(_INSTANCES)


def valpha(t, x, alpha: float = 1.0):
    """Backward solutions ``alpha * min(0, |x| - t)`` of the eikonal equation, all zero at t=0."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return alpha * np.minimum(0.0, _abs(x) - t)


def get(name: str) -> OracleInstance:
    try:
        return _INSTANCES[name]
    except KeyError:
        raise UnknownOracle(f"unknown oracle instance {name!r}; known: {', '.join(NAMES)}") from None


def oracle_eval(name: str, field: str, t, x, T: float | None = None, alpha: float = 1.0):
    """Evaluate one field of an instance. ``g0``/``gT`` ignore ``t``."""
    inst = get(name)
    T = inst.default_T if T is None else float(T)
    if field not in FIELDS:
        raise ValueError(f"field must be one of {FIELDS}")
    tt = np.asarray(t, float)
    if np.any(tt < 0) or np.any(tt > T):
        raise ValueError(f"t must lie in [0, {T}]")
    if field == "g0":
        out = inst.g0(x, T)
    elif field == "gT":
        out = inst.gT(x, T)
    elif field == "v":
        out = valpha(tt, x, alpha) if name == "valpha" else inst.v(tt, x, T)
    else:
        out = getattr(inst, field)(tt, x, T)
    out = np.asarray(out, float)
    return float(out) if out.ndim == 0 else out


def oracle_verdict(name: str, T: float) -> bool:
    """Whether ``g0`` of the instance is reconstructible in time T."""
    if not T > 0:
        raise ValueError("T must be positive")
    return bool(get(name).verdict(float(T)))
