"""Command line front end.

Exit codes: 0 success / verdict true, 3 verdict false, 1 runtime error,
2 bad configuration or usage.
"""
from __future__ import annotations

import argparse
import io
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import mayer, oracles
from .characteristics import (
    ArcExit,
    NonSmoothPoint,
    integrate_characteristic,
    selection_from,
    subgradients_1d,
    verify_bilateral_along,
)
from .grid import Grid, GridFunction, fmt, read_grid_function
from .hamiltonian import from_name
from .pipeline import bilateral_probe_1d, make_reconstructible, reconstruct, sandwich_check
from .solver import CLAMPED, LINEAR, SolveParams, solve_backward, solve_forward

log = logging.getLogger("hjrecon")

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_FALSE = 0, 1, 2, 3

COMMANDS = (
    "solve-forward", "solve-backward", "reconstruct", "make-reconstructible", "sandwich",
    "bilateral-probe", "discrete", "search-gap", "characteristics", "oracle-check",
)

DEFAULTS = {
    "hamiltonian": "eikonal",
    "T": "1.0",
    "xmin": "-3",
    "xmax": "3",
    "h": "0.01",
    "dim": "1",
    "cfl": "0.9",
    "margin": "1.0",
    "boundary": "linear",
    "keep": "endpoints",
    "tol": "0.05",
    "seed": "0",
    "step": "0.001",
    "budget": "10",
    "n": "3",
    "range": "1,3",
}


class ConfigError(ValueError):
    pass


# -- named functions ------------------------------------------------------

def _radial(r, name: str, T: float):
    kind, _, arg = name.partition(":")
    a = float(arg) if arg else None
    if kind == "zero":
        return np.zeros_like(r)
    if kind == "abs":
        return r
    if kind == "const":
        return np.full_like(r, a)
    if kind == "ramp":
        return np.maximum(0.0, (T if a is None else a) - r)
    if kind == "min0":
        return np.minimum(0.0, (1.0 if a is None else a) - r)
    if kind == "absdev":
        return np.abs(r - (1.0 if a is None else a))
    if kind == "xeik":
        s = T if a is None else a
        return np.maximum(1 - r * math.exp(-s), r * math.exp(s) - 1)
    raise ConfigError(f"unknown function {name!r}")


def make_function(spec: str, grid: Grid, T: float) -> GridFunction:
    """Built-in name (``abs``, ``zero``, ``const:c``, ``ramp:a``, ``min0:a``,
    ``absdev:a``, ``xeik:T``, ``oracle:NAME:FIELD``) or a CSV file."""
    if spec.startswith("oracle:"):
        _, name, fld = spec.split(":")
        if grid.dim != 1:
            raise ConfigError("oracle functions are one-dimensional")
        if fld not in ("g0", "gT"):
            raise ConfigError("oracle field must be g0 or gT")
        return grid.sample(lambda x: oracles.oracle_eval(name, fld, 0.0, x, T=T))
    path = Path(spec)
    if spec.endswith(".csv") or path.is_file():
        g = read_grid_function(path)
        if g.grid != grid:
            raise ConfigError(f"{spec}: grid does not match --xmin/--xmax/--h")
        return g
    return grid.sample(lambda *xs: _radial(np.sqrt(sum(x * x for x in xs)), spec, T))


# -- configuration --------------------------------------------------------

def read_config(path: str) -> dict[str, str]:
    out = {}
    for ln in Path(path).read_text().splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ConfigError(f"bad config line {ln!r}")
        k, v = ln.split("=", 1)
        out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hjrecon", description="Initial-condition reconstruction for Hamilton-Jacobi equations")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("instance", nargs="?", help="instance file (discrete) or oracle name (oracle-check)")
    p.add_argument("--config", help="key=value file; command-line flags win")
    p.add_argument("--hamiltonian")
    p.add_argument("--g0")
    p.add_argument("--gT")
    p.add_argument("--T")
    p.add_argument("--xmin")
    p.add_argument("--xmax")
    p.add_argument("--h")
    p.add_argument("--dim")
    p.add_argument("--cfl")
    p.add_argument("--margin")
    p.add_argument("--boundary", help="linear or clamped")
    p.add_argument("--keep", help="all, endpoints or a stride")
    p.add_argument("--tol")
    p.add_argument("--probes", help="comma separated probe times")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed")
    p.add_argument("--x0", help="comma separated arc start points")
    p.add_argument("--step")
    p.add_argument("--n")
    p.add_argument("--budget")
    p.add_argument("--range", help="lo,hi integer value range")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "verbose"):
            cfg[k] = v
    return cfg


def _num(cfg, key, kind=float):
    try:
        return kind(cfg[key])
    except (KeyError, ValueError):
        raise ConfigError(f"--{key} must be a {kind.__name__}, got {cfg.get(key)!r}") from None


def solver_setup(cfg: dict):
    T = _num(cfg, "T")
    h = _num(cfg, "h")
    cfl = _num(cfg, "cfl")
    dim = _num(cfg, "dim", int)
    if not T > 0:
        raise ConfigError("--T must be positive")
    if not h > 0:
        raise ConfigError("--h must be positive")
    if not 0 < cfl <= 1:
        raise ConfigError("--cfl must lie in (0, 1]")
    boundary = {"linear": LINEAR, "clamped": CLAMPED}.get(cfg["boundary"], cfg["boundary"])
    keep = cfg["keep"]
    keep = int(keep) if keep.isdigit() else keep
    try:
        params = SolveParams(cfl=cfl, margin=_num(cfg, "margin"), boundary=boundary, keep=keep)
        lo, hi = _num(cfg, "xmin"), _num(cfg, "xmax")
        grid = Grid((lo,) * dim, (hi,) * dim, (h,) * dim)
        H = from_name(cfg["hamiltonian"], dim)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return H, grid, T, params


def _probes(cfg, T):
    if not cfg.get("probes"):
        return None
    return tuple(float(t) for t in cfg["probes"].split(","))


def _outdir(cfg) -> Path | None:
    if not cfg.get("out"):
        return None
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _need(cfg, key):
    if not cfg.get(key):
        raise ConfigError(f"--{key} is required for this command")
    return cfg[key]


# -- commands -------------------------------------------------------------

def cmd_solve(cfg, backward: bool) -> int:
    H, grid, T, params = solver_setup(cfg)
    key = "gT" if backward else "g0"
    g = make_function(_need(cfg, key), grid, T)
    probes = _probes(cfg, T) or ()
    sol = (solve_backward if backward else solve_forward)(H, g, T, params, probes)
    out = _outdir(cfg)
    name = "w.csv" if backward else "u.csv"
    if out:
        (out / name).write_text(sol.to_csv())
    print(f"direction: {sol.direction}")
    print(f"dt: {fmt(sol.dt)}")
    print(f"stored_slices: {len(sol.times)}")
    print(f"interior_nodes: {int(sol.interior.sum())}")
    return EXIT_OK


def cmd_reconstruct(cfg) -> int:
    H, grid, T, params = solver_setup(cfg)
    g0 = make_function(_need(cfg, "g0"), grid, T)
    probes = _probes(cfg, T)
    rep = reconstruct(H, g0, T, params, _num(cfg, "tol"), probes)
    sys.stdout.write(rep.to_text())
    out = _outdir(cfg)
    if out:
        rep.write(out)
    return EXIT_OK if rep.verdict else EXIT_FALSE


def cmd_make_reconstructible(cfg) -> int:
    H, grid, T, params = solver_setup(cfg)
    g = make_function(_need(cfg, "gT"), grid, T)
    g0, v = make_reconstructible(H, g, T, params)
    out = _outdir(cfg)
    if out:
        g0.save(out / "g0.csv")
        (out / "v.csv").write_text(v.to_csv())
    else:
        sys.stdout.write(g0.to_csv())
    return EXIT_OK


def cmd_sandwich(cfg) -> int:
    H, grid, T, params = solver_setup(cfg)
    g = make_function(_need(cfg, "gT"), grid, T)
    res = sandwich_check(H, g, T, params, _num(cfg, "tol"))
    print(f"u_below_w: {fmt(res.u_below_w)}")
    print(f"w_below_v: {fmt(res.w_below_v)}")
    print(f"tolerance: {fmt(res.tolerance)}")
    print(f"holds: {res.holds}")
    return EXIT_OK if res.holds else EXIT_FALSE


def cmd_bilateral(cfg) -> int:
    H, grid, T, params = solver_setup(cfg)
    g0 = make_function(_need(cfg, "g0"), grid, T)
    tol = _num(cfg, "tol")
    gap = bilateral_probe_1d(H, g0, T, params, _probes(cfg, T), tol)
    print(f"max_probe_gap: {fmt(gap)}")
    print(f"tolerance: {fmt(tol)}")
    return EXIT_OK if gap <= tol else EXIT_FALSE


def cmd_discrete(cfg) -> int:
    path = cfg.get("instance")
    if not path:
        raise ConfigError("discrete needs an instance file")
    phi, g, T = mayer.read_instance(path)
    rec = mayer.reconstruct_discrete(phi, g, T)
    tables = {"V": rec.V, "U": rec.U, "W": rec.W}
    for name, tab in tables.items():
        print(mayer.format_table(name, tab))
        print()
    mism = rec.interior_mismatches()
    print(f"reconstructed: {rec.verdict}")
    if mism:
        for k, i in mism:
            print(f"U({k},{i + 1})={rec.U[k, i]} != W({k},{i + 1})={rec.W[k, i]}")
    else:
        print("U == W everywhere")
    out = _outdir(cfg)
    if out:
        (out / "tables.csv").write_text(mayer.tables_csv(tables))
    return EXIT_OK


def cmd_search_gap(cfg) -> int:
    n = _num(cfg, "n", int)
    T = int(float(cfg["T"]))
    lo, hi = (int(v) for v in cfg["range"].split(","))
    budget = _num(cfg, "budget", int)
    if n < 1 or T < 0 or budget < 1 or lo > hi:
        raise ConfigError("search-gap needs n >= 1, T >= 0, budget >= 1 and lo <= hi")
    found = mayer.search_uv_gap(n, T, (lo, hi), budget, seed=_num(cfg, "seed", int))
    buf = io.StringIO()
    buf.write("index,n,T,adjacency,g,g0,mismatches\n")
    for idx, inst in enumerate(found):
        adj = ";".join("".join("1" if a else "0" for a in row) for row in inst.phi.adjacency)
        g = " ".join(map(str, inst.g))
        g0 = " ".join(map(str, inst.g0))
        mm = " ".join(f"({k};{i + 1})" for k, i in inst.mismatches)
        buf.write(f"{idx},{n},{T},{adj},{g},{g0},{mm}\n")
    sys.stdout.write(buf.getvalue())
    out = _outdir(cfg)
    if out:
        (out / "gaps.csv").write_text(buf.getvalue())
    return EXIT_OK


def cmd_characteristics(cfg) -> int:
    H, grid, T, params = solver_setup(cfg)
    if grid.dim != 1:
        raise ConfigError("characteristics command is one-dimensional")
    spec = _need(cfg, "g0")
    g0 = make_function(spec, grid, T)
    starts = [float(v) for v in _need(cfg, "x0").split(",")]
    step = _num(cfg, "step")
    tol = _num(cfg, "tol")
    rep = reconstruct(H, g0, T, params, tol, probe_times=())
    sel = selection_from(H)
    ax = grid.axis(0)

    def g0_fn(x):
        return float(np.interp(x, ax, g0.values))

    out = _outdir(cfg)
    worst = 0.0
    status = EXIT_OK
    print("arc,x0,p0,H_drift,max_gap")
    arc_no = 0
    for x0 in starts:
        for p0 in subgradients_1d(g0_fn, x0, k=1, delta=grid.h[0]):
            try:
                arc = integrate_characteristic(sel, [x0], [p0], T, step)
                gap = verify_bilateral_along(arc, rep.u, rep.w)
            except (NonSmoothPoint, ArcExit) as e:
                print(f"{arc_no},{fmt(x0)},{fmt(p0)},nan,nan  # {e}")
                status = EXIT_ERROR
                arc_no += 1
                continue
            worst = max(worst, gap)
            print(f"{arc_no},{fmt(x0)},{fmt(p0)},{fmt(arc.energy_drift(H))},{fmt(gap)}")
            if out:
                (out / f"arc{arc_no}.csv").write_text(arc.to_csv(H))
            arc_no += 1
    if status != EXIT_OK:
        return status
    return EXIT_OK if worst <= tol else EXIT_FALSE


def cmd_oracle_check(cfg) -> int:
    names = [cfg["instance"]] if cfg.get("instance") else list(oracles.NAMES)
    T = _num(cfg, "T")
    h = _num(cfg, "h")
    params = solver_setup(cfg)[3]
    buf = io.StringIO()
    buf.write("instance,hamiltonian,T,h,field,max_abs_error,interior_nodes\n")
    for name in names:
        inst = oracles.get(name)
        H = from_name(inst.hamiltonian)
        grid = Grid(_num(cfg, "xmin"), _num(cfg, "xmax"), h)
        x = grid.axis(0)
        g0 = grid.sample(lambda x: oracles.oracle_eval(name, "g0", 0.0, x, T=T))
        u = solve_forward(H, g0, T, params)
        w = solve_backward(H, u.final, T, params)
        m = u.interior
        rows = [
            ("u(T)", u.final.values, oracles.oracle_eval(name, "u", T, x, T=T)),
            ("w(0)", w.initial.values, oracles.oracle_eval(name, "w", 0.0, x, T=T)),
        ]
        for fld, num, exact in rows:
            err = float(np.max(np.abs(num - exact)[m])) if m.any() else math.nan
            buf.write(f"{name},{inst.hamiltonian},{fmt(T)},{fmt(h)},{fld},{fmt(err)},{int(m.sum())}\n")
    sys.stdout.write(buf.getvalue())
    out = _outdir(cfg)
    if out:
        (out / "oracle_check.csv").write_text(buf.getvalue())
    return EXIT_OK


HANDLERS = {
    "solve-forward": lambda c: cmd_solve(c, backward=False),
    "solve-backward": lambda c: cmd_solve(c, backward=True),
    "reconstruct": cmd_reconstruct,
    "make-reconstructible": cmd_make_reconstructible,
    "sandwich": cmd_sandwich,
    "bilateral-probe": cmd_bilateral,
    "discrete": cmd_discrete,
    "search-gap": cmd_search_gap,
    "characteristics": cmd_characteristics,
    "oracle-check": cmd_oracle_check,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve(args)
        return HANDLERS[args.command](cfg)
    except (ConfigError, FileNotFoundError) as e:
        print(f"hjrecon: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - exit-code contract
        log.debug("failure", exc_info=True)
        print(f"hjrecon: error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
