"""Command-line front end: ``tgdelta <command> [options]``.

Every command writes one table: ``#``-prefixed ``key=value`` metadata lines,
a header row, then rows with 12 significant digits (CSV), or the same
content as a JSON object with ``meta`` and ``data``.  Matrices are written
as (x, x', value) triples.  Output is byte-stable: the elapsed wall-clock
time goes to stderr unless ``--record-timing`` asks for it in the metadata.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure
(non-convergence or non-finite output), 4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .grid import SpatialGrid, default_grid
from .specfun import ConvergenceError
from .spectrum import GridResolutionError, TrapConfig, build_spectrum, level_energies

COMMANDS = ("spectrum", "density", "pairdist", "rspdm", "orbitals", "occupation", "momentum", "evolve")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple]
    extra_meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunRequest:
    command: str
    kappa: float
    n_particles: int
    species: str
    half_width: float | None
    grid_points: int | None
    times: tuple[float, ...] | None
    k_max: float | None
    n_range: tuple[int, int] | None
    output: str | None
    fmt: str
    stride: int
    n_orbitals: int
    window: float | None
    visibility_window: float
    record_timing: bool


def _parse_times(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --times value {text!r}") from exc
    if not vals:
        raise ConfigError("--times needs at least one value")
    if any(not math.isfinite(t) or t < 0 for t in vals):
        raise ConfigError("times must be finite and non-negative")
    return vals


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad --n-range value {text!r}; expected a:b") from exc
    if lo < 1 or hi < lo:
        raise ConfigError("--n-range needs 1 <= a <= b")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tgdelta", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--kappa", type=float, required=True, help="strength of the attractive delta")
    p.add_argument("--n", type=int, default=None, help="particle number")
    p.add_argument("--species", choices=("boson", "fermion"), default="boson")
    p.add_argument("--half-width", type=float, default=None, help="spatial grid half-width L")
    p.add_argument("--grid-points", type=int, default=None, help="odd number of spatial grid points")
    p.add_argument("--k-max", type=float, default=None, help="momentum cutoff")
    p.add_argument("--times", type=str, default=None, help="comma-separated expansion times")
    p.add_argument("--n-range", type=str, default=None, help="inclusive particle-number sweep a:b")
    p.add_argument("--output", type=str, default=None, help="output file (default: stdout)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--stride", type=int, default=1, help="grid stride for matrix outputs")
    p.add_argument("--n-orbitals", type=int, default=5, help="natural orbitals to write")
    p.add_argument("--window", type=float, default=None, help="evolve: write |x| <= window only")
    p.add_argument("--visibility-window", type=float, default=5.0,
                   help="evolve: half-width of the fringe-visibility window")
    p.add_argument("--record-timing", action="store_true",
                   help="add elapsed wall-clock seconds to the metadata (breaks byte stability)")
    return p


def make_request(ns: argparse.Namespace) -> RunRequest:
    if not math.isfinite(ns.kappa) or ns.kappa < 0:
        raise ConfigError("--kappa must be finite and non-negative")
    n_range = _parse_range(ns.n_range) if ns.n_range else None
    n = ns.n
    if n is None:
        if n_range is None:
            raise ConfigError("--n is required")
        n = n_range[1]
    if n < 1:
        raise ConfigError("--n must be positive")
    if n_range is not None and ns.command != "occupation":
        raise ConfigError("--n-range applies to the occupation command only")
    times = _parse_times(ns.times) if ns.times is not None else None
    if ns.command == "evolve" and times is None:
        raise ConfigError("evolve needs --times")
    if ns.command == "pairdist" and n < 2:
        raise ConfigError("pairdist needs at least two particles")
    if ns.grid_points is not None and (ns.grid_points < 17 or ns.grid_points % 2 == 0):
        raise ConfigError("--grid-points must be odd and at least 17")
    if ns.half_width is not None and not ns.half_width > 0:
        raise ConfigError("--half-width must be positive")
    if ns.k_max is not None and not ns.k_max > 0:
        raise ConfigError("--k-max must be positive")
    if ns.stride < 1 or ns.n_orbitals < 1:
        raise ConfigError("--stride and --n-orbitals must be positive")
    return RunRequest(ns.command, ns.kappa, n, ns.species, ns.half_width, ns.grid_points, times,
                      ns.k_max, n_range, ns.output, ns.fmt, ns.stride, ns.n_orbitals, ns.window,
                      ns.visibility_window, ns.record_timing)


def _grid_for(req: RunRequest, n: int) -> SpatialGrid:
    base = default_grid(req.kappa, max(level_energies(req.kappa, n)))
    if req.half_width is None and req.grid_points is None:
        return base
    half = req.half_width if req.half_width is not None else base.half_width
    if req.grid_points is not None:
        return SpatialGrid(half, req.grid_points)
    m = int(math.ceil(2.0 * half / base.spacing))
    return SpatialGrid(half, m + 1 + (m % 2))


def _spectrum(req: RunRequest, n: int | None = None):
    n = n or req.n_particles
    grid = _grid_for(req, n)
    return build_spectrum(TrapConfig(req.kappa, n), grid)


def _symmetric_indices(grid: SpatialGrid, stride: int, mask=None) -> np.ndarray:
    """Every ``stride``-th node counted outward from x = 0, so x = 0 is always kept."""
    c = grid.center
    j = c // stride
    idx = c + stride * np.arange(-j, j + 1)
    return idx if mask is None else idx[mask[idx]]


def _triples(grid: SpatialGrid, mat: np.ndarray, stride: int) -> list[tuple]:
    idx = _symmetric_indices(grid, stride)
    x = grid.points[idx]
    sub = mat[np.ix_(idx, idx)]
    return [(x[a], x[b], sub[a, b]) for a in range(len(idx)) for b in range(len(idx))]


def cmd_spectrum(req):
    sp = _spectrum(req)
    rows = [(s.index, s.parity, s.energy) for s in sp.states]
    return Table(["n", "parity", "energy"], rows), sp.grid


def cmd_density(req):
    from .observables import density

    sp = _spectrum(req)
    d = density(sp)
    rows = list(zip(d.grid.points, d.values, d.grid.weights))
    return Table(["x", "density", "weight"], rows), sp.grid


def cmd_pairdist(req):
    from .observables import pair_distribution_grid

    sp = _spectrum(req)
    return Table(["x1", "x2", "pair_distribution"], _triples(sp.grid, pair_distribution_grid(sp), req.stride)), sp.grid


def _rspdm(req, sp):
    if req.species == "fermion":
        from .observables import fermi_rspdm

        return fermi_rspdm(sp)
    from .bose import bose_rspdm

    return bose_rspdm(sp)


def cmd_rspdm(req):
    sp = _spectrum(req)
    r = _rspdm(req, sp)
    return Table(["x", "x_prime", "rho"], _triples(sp.grid, r.entries, req.stride)), sp.grid


def cmd_orbitals(req):
    from .bose import natural_orbitals

    sp = _spectrum(req)
    dec = natural_orbitals(_rspdm(req, sp))
    m = min(req.n_orbitals, len(dec.occupations))
    occ = dec.reported_occupations[:m]
    cols = ["x"] + [f"phi_{j}" for j in range(m)]
    rows = [(x, *dec.orbitals[:m, a]) for a, x in enumerate(sp.grid.points)]
    meta = {"occupations": " ".join(_fmt(v) for v in occ),
            "parities": " ".join(str(int(v)) for v in dec.parities[:m])}
    return Table(cols, rows, meta), sp.grid


def cmd_occupation(req):
    from .bose import natural_orbitals, occupation_fraction

    lo, hi = req.n_range or (req.n_particles, req.n_particles)
    rows = []
    grid = None
    for n in range(lo, hi + 1):
        sp = _spectrum(req, n)
        dec = natural_orbitals(_rspdm(req, sp))
        rows.append((n, dec.occupations[0], occupation_fraction(dec)))
        grid = sp.grid
    return Table(["n_particles", "lambda_0", "occupation_fraction"], rows), grid


def cmd_momentum(req):
    from .bose import natural_orbitals
    from .momentum import MomentumGrid, default_momentum_grid, momentum_distribution

    sp = _spectrum(req)
    if req.k_max is not None:
        half = max(int(math.ceil(req.k_max / 0.05)), 500)
        mgrid = MomentumGrid(req.k_max, 2 * half + 1)
    else:
        mgrid = default_momentum_grid(sp, species=req.species)
    source = sp if req.species == "fermion" else natural_orbitals(_rspdm(req, sp))
    dist = momentum_distribution(source, mgrid)
    rows = list(zip(mgrid.points, dist.values, mgrid.weights))
    return Table(["k", "n_k", "weight"], rows, {"k_max": _fmt(mgrid.k_max)}), sp.grid


def cmd_evolve(req):
    from .dynamics import free_evolve, fringe_visibility

    sp = _spectrum(req)
    res = free_evolve(sp, sp.grid, req.times)
    g = res.grid
    window = req.window
    if window is None:
        window = (math.sqrt(max(2.0 * float(np.max(sp.energies)), 0.0)) + 5.0) * (1.0 + max(req.times))
    sel = _symmetric_indices(g, req.stride, np.abs(g.points) <= window)
    cols = ["x"] + [f"rho_t{i}" for i in range(len(res.times))]
    rows = [(g.points[a], *res.snapshots[:, a]) for a in sel]
    vis = [fringe_visibility(res.snapshot(i), min(req.visibility_window, g.half_width))
           for i in range(len(res.times))]
    meta = {"times": " ".join(_fmt(t) for t in res.times),
            "fringe_visibility": " ".join(_fmt(v) for v in vis),
            "dynamic_half_width": _fmt(g.half_width),
            "dynamic_grid_points": str(g.n_points)}
    return Table(cols, rows, meta), sp.grid


HANDLERS = {
    "spectrum": cmd_spectrum,
    "density": cmd_density,
    "pairdist": cmd_pairdist,
    "rspdm": cmd_rspdm,
    "orbitals": cmd_orbitals,
    "occupation": cmd_occupation,
    "momentum": cmd_momentum,
    "evolve": cmd_evolve,
}


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    out = f"{float(v):.12g}"
    return "0" if out == "-0" else out


def _check_finite(table: Table) -> None:
    for row in table.rows:
        for v in row:
            if not isinstance(v, str) and not math.isfinite(float(v)):
                raise NumericError("non-finite value in output")


def _metadata(req: RunRequest, grid: SpatialGrid, table: Table) -> dict:
    meta = {
        "kappa": _fmt(req.kappa),
        "n_particles": str(req.n_particles),
        "species": req.species,
        "half_width": _fmt(grid.half_width),
        "grid_points": str(grid.n_points),
        "command": req.command,
        "version": __version__,
    }
    if req.n_range:
        meta["n_range"] = f"{req.n_range[0]}:{req.n_range[1]}"
    meta.update(table.extra_meta)
    return meta


def render(table: Table, meta: dict, fmt: str) -> str:
    if fmt == "csv":
        lines = [f"# {k}={v}" for k, v in meta.items()]
        lines.append(",".join(table.columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in table.rows)
        return "\n".join(lines) + "\n"
    rows = [[v if isinstance(v, str) else (int(v) if isinstance(v, (int, np.integer)) else float(_fmt(v)))
             for v in row] for row in table.rows]
    doc = {"meta": meta, "data": {"columns": table.columns, "rows": rows}}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def run(req: RunRequest) -> int:
    start = time.perf_counter()
    try:
        table, grid = HANDLERS[req.command](req)
        _check_finite(table)
    except (ConfigError, GridResolutionError, ValueError, MemoryError) as exc:
        print(f"tgdelta: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, NumericError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"tgdelta: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - start
    meta = _metadata(req, grid, table)
    if req.record_timing:
        meta["wall_clock_seconds"] = f"{elapsed:.3f}"
    text = render(table, meta, req.fmt)
    try:
        if req.output:
            with open(req.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"tgdelta: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"tgdelta: {req.command} done in {elapsed:.2f} s", file=sys.stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        req = make_request(ns)
    except ConfigError as exc:
        print(f"tgdelta: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(req)


if __name__ == "__main__":
    sys.exit(main())
