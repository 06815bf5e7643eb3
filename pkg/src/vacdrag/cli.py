"""Batch front end: JSON config in, CSV sweep data out.

vacdrag <config.json> [--command override] [--output override] [--threads N]

Commands: modes (guided-mode branches), hybrid (complex eigenfrequency
vs kx at ky = 0), force-sweep (force vs relative velocity for every
requested method/polarization), pendry (contour vs Pendry comparison on
sheets), evolve (force expectation vs time).  CSV files carry '#'
metadata headers recording the config hash and the unit convention, and
identical configs reproduce byte-identical files.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .core import (MovingBody, Polarization, Scenario, SheetMedium,
                   SlabMedium, Units)
from .errors import ConfigError, VacdragError
from .force import (ForceGrid, first_excitation_force, force_contour,
                    force_mode_sum, force_pendry_c16, force_time_series,
                    force_weak_coupling)
from .instability import find_complex_modes, solve_selection
from .modes import find_pole_frequencies, trace_branch

_COMMANDS = ("modes", "hybrid", "force-sweep", "pendry", "evolve")
_METHODS = {
    "mode_sum": force_mode_sum,
    "contour": force_contour,
    "weak_coupling": force_weak_coupling,
    "pendry_c16": force_pendry_c16,
}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    units: Units
    polarizations: tuple
    command: str
    grid: ForceGrid
    sweep: tuple | None          # (quantity, start, stop, steps)
    methods: tuple
    eta_sequence: tuple | None
    times: tuple | None
    output_path: str
    n_branches: int
    config_hash: str
    threads: int = 1


def _want(doc, key, types, path, default=KeyError):
    if key not in doc:
        if default is KeyError:
            raise ConfigError(f"{path}{key}", "missing required field")
        return default
    val = doc[key]
    if types and not isinstance(val, types):
        raise ConfigError(f"{path}{key}",
                          f"expected {types}, got {type(val).__name__}")
    return val


def _parse_body(doc, path):
    kind = _want(doc, "type", str, path)
    v = float(_want(doc, "v", (int, float), path))
    if kind == "slab":
        n = float(_want(doc, "n", (int, float), path))
        h = float(_want(doc, "h", (int, float), path, default=1.0))
        try:
            return MovingBody(SlabMedium(n_d=n, h=h), v)
        except (ValueError, TypeError) as exc:
            raise ConfigError(path.rstrip("."), str(exc))
    if kind == "sheet":
        wsp = float(_want(doc, "omega_sp", (int, float), path))
        try:
            return MovingBody(SheetMedium(omega_sp=wsp), v)
        except (ValueError, TypeError) as exc:
            raise ConfigError(path.rstrip("."), str(exc))
    raise ConfigError(f"{path}type", f"unknown body type {kind!r}")


def parse_config(text):
    """Validate a JSON config document into a RunConfig.

    Defaults are filled here so the emitted metadata echoes the complete
    effective configuration.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be an object")

    bodies = _want(doc, "bodies", list, "")
    if len(bodies) != 2:
        raise ConfigError("bodies", "exactly two bodies required")
    body1 = _parse_body(bodies[0], "bodies[0].")
    body2 = _parse_body(bodies[1], "bodies[1].")
    gap = float(_want(doc, "gap", (int, float), ""))
    gap_model = _want(doc, "gap_model", str, "", default="auto")
    try:
        scenario = Scenario(body1, body2, d=gap, gap_model=gap_model)
    except (ValueError, TypeError) as exc:
        raise ConfigError("gap", str(exc))

    units = Units(float(_want(doc, "h_s_meters", (int, float), "",
                              default=1e-6)))
    pols = _want(doc, "pol", list, "", default=["s", "p"])
    try:
        pols = tuple(Polarization(p) for p in pols)
    except ValueError as exc:
        raise ConfigError("pol", str(exc))
    if not pols:
        raise ConfigError("pol", "at least one polarization required")

    command = _want(doc, "command", str, "")
    if command not in _COMMANDS:
        raise ConfigError("command", f"must be one of {_COMMANDS}")
    if command == "modes" and not scenario.is_slab:
        raise ConfigError("command", "modes requires slab media")

    gdoc = _want(doc, "grid", dict, "", default={})
    try:
        grid = ForceGrid(
            kx_max=float(_want(gdoc, "kx_max", (int, float), "grid.",
                               default=40.0)),
            ky_max=float(_want(gdoc, "ky_max", (int, float), "grid.",
                               default=40.0)),
            n_ky=int(_want(gdoc, "n_ky", int, "grid.", default=49)),
            panel_points=int(_want(gdoc, "panel_points", int, "grid.",
                                   default=16)),
            contour_window=_want(gdoc, "contour_window", str, "grid.",
                                 default="full"),
        )
    except ValueError as exc:
        raise ConfigError("grid", str(exc))

    sweep = None
    sdoc = _want(doc, "sweep", dict, "", default=None)
    if sdoc is not None:
        quantity = _want(sdoc, "quantity", str, "sweep.",
                         default="dv_over_c")
        if quantity not in ("dv_nd_over_2c", "dv_over_c"):
            raise ConfigError("sweep.quantity",
                              "must be dv_nd_over_2c or dv_over_c")
        if quantity == "dv_nd_over_2c" and not scenario.is_slab:
            raise ConfigError("sweep.quantity",
                              "dv_nd_over_2c requires slab media")
        start = float(_want(sdoc, "start", (int, float), "sweep."))
        stop = float(_want(sdoc, "stop", (int, float), "sweep."))
        steps = _want(sdoc, "steps", int, "sweep.")
        if steps < 2:
            raise ConfigError("sweep.steps", "need at least 2 steps")
        sweep = (quantity, start, stop, steps)
    if command in ("force-sweep", "pendry") and sweep is None:
        raise ConfigError("sweep", f"required for command {command!r}")

    methods = tuple(_want(doc, "methods", list, "",
                          default=list(_METHODS)))
    for m in methods:
        if m not in _METHODS:
            raise ConfigError("methods", f"unknown method {m!r}")

    eta_seq = _want(doc, "eta_sequence", list, "", default=None)
    if eta_seq is not None:
        eta_seq = tuple(float(e) for e in eta_seq)
        if any(e <= 0 for e in eta_seq):
            raise ConfigError("eta_sequence", "offsets must be > 0")

    times = None
    tdoc = _want(doc, "times", dict, "", default=None)
    if tdoc is not None:
        t_max = float(_want(tdoc, "t_max", (int, float), "times."))
        steps = _want(tdoc, "steps", int, "times.")
        if steps < 2:
            raise ConfigError("times.steps", "need at least 2 steps")
        times = tuple(np.linspace(0.0, t_max, steps).tolist())
    if command == "evolve" and times is None:
        raise ConfigError("times", "required for command 'evolve'")

    output = _want(doc, "output", str, "", default="out.csv")
    n_branches = _want(doc, "n_branches", int, "", default=4)

    cfg_hash = hashlib.sha256(
        json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]
    return RunConfig(scenario=scenario, units=units, polarizations=pols,
                     command=command, grid=grid, sweep=sweep,
                     methods=methods, eta_sequence=eta_seq, times=times,
                     output_path=output, n_branches=n_branches,
                     config_hash=cfg_hash)


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, meta, header, rows):
    lines = []
    for key, val in meta:
        lines.append(f"# {key}: {val}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    data = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(data)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(data)


def _meta(cfg, extra=()):
    sc = cfg.scenario
    m = [
        ("vacdrag", __version__),
        ("command", cfg.command),
        ("config_sha256", cfg.config_hash),
        ("units", "c = hbar = h_s = 1; F_hat = (F/A0) h_s^4 / (hbar c)"),
        ("h_s_meters", repr(cfg.units.h_s_meters)),
        ("si_force_factor_N_per_m2",
         repr(cfg.units.force_to_si(1.0))),
        ("gap_d", repr(sc.d)),
        ("v1", repr(sc.body1.v)),
        ("v2", repr(sc.body2.v)),
    ]
    m.extend(extra)
    return m


def _sweep_scenarios(cfg):
    """Symmetric-drift scenarios (v2 = -v1) along the sweep axis."""
    quantity, start, stop, steps = cfg.sweep
    sc = cfg.scenario
    xs = np.linspace(start, stop, steps)
    out = []
    for x in xs:
        if quantity == "dv_nd_over_2c":
            n_d = sc.body1.medium.n_d
            dv = 2.0 * x / n_d
        else:
            dv = x
        out.append((float(x), Scenario(
            MovingBody(sc.body1.medium, -dv / 2.0),
            MovingBody(sc.body2.medium, +dv / 2.0),
            d=sc.d, gap_model=sc.gap_model)))
    return out


def _force_point(args):
    cfg, x, scenario, pol, method = args
    fn = _METHODS[method]
    if method == "contour" and cfg.eta_sequence:
        res = fn(pol, scenario, cfg.grid, eta=cfg.eta_sequence[0])
    else:
        res = fn(pol, scenario, cfg.grid)
    return (x, pol.value, method, res.value, res.error,
            res.body1_sign * res.value * cfg.units.force_to_si(1.0))


def _run_force_sweep(cfg):
    points = _sweep_scenarios(cfg)
    jobs = [(cfg, x, sc, pol, method)
            for x, sc in points
            for pol in cfg.polarizations
            for method in cfg.methods]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
            rows = list(ex.map(_force_point, jobs))
    else:
        rows = [_force_point(j) for j in jobs]
    quantity = cfg.sweep[0]
    header = [quantity, "pol", "method", "force_hat", "error_hat",
              "force_si_body1_N_per_m2"]
    _write_csv(cfg.output_path, _meta(cfg, [("sweep", quantity)]),
               header, rows)


def _run_modes(cfg):
    slab = cfg.scenario.body1.medium
    k_grid = np.linspace(0.05, cfg.grid.kx_max / 2.0, 400)
    rows = []
    for pol in cfg.polarizations:
        for bi in range(cfg.n_branches):
            # higher branches are born at larger k; start each trace at
            # the first grid point where the branch exists
            start = None
            for idx, k in enumerate(k_grid):
                if len(find_pole_frequencies(slab, pol, k)) > bi:
                    start = idx
                    break
            if start is None:
                continue
            branch = trace_branch(slab, pol, bi, k_grid[start:])
            for p in branch.points:
                rows.append((pol.value, bi, p.k, p.omega_co, p.n_ph,
                             p.residue, p.v_g_co))
    header = ["pol", "branch", "k", "omega_co", "n_ph", "residue", "v_g_co"]
    _write_csv(cfg.output_path,
               _meta(cfg, [("n_d", repr(slab.n_d)), ("h", repr(slab.h))]),
               header, rows)


def _run_hybrid(cfg):
    sc = cfg.scenario
    rows = []
    for pol in cfg.polarizations:
        sols = solve_selection(sc, pol, 0.0, kx_max=cfg.grid.kx_max)
        if not sols:
            continue
        kx0 = sols[0].kx
        kxs = np.linspace(0.9 * kx0, 1.1 * kx0, 201)
        for kx in kxs:
            modes = find_complex_modes(pol, sc, float(kx), 0.0)
            if modes:
                for m in modes:
                    rows.append((float(kx), 0.0, pol.value,
                                 m.omega_c.real, m.omega_c.imag,
                                 m.lambda_0 if m.lambda_0 is not None
                                 else float("nan")))
            else:
                rows.append((float(kx), 0.0, pol.value, 0.0, 0.0,
                             float("nan")))
    header = ["kx", "ky", "pol", "omega_re", "lambda", "lambda0"]
    _write_csv(cfg.output_path, _meta(cfg), header, rows)


def _run_pendry(cfg):
    if cfg.scenario.is_slab:
        raise ConfigError("command", "pendry comparison runs on sheets")
    rows = []
    for x, sc in _sweep_scenarios(cfg):
        for pol in cfg.polarizations[:1]:
            fc = force_contour(pol, sc, cfg.grid)
            fp = force_pendry_c16(pol, sc, cfg.grid)
            rel = (abs(fc.value - fp.value) / fc.value if fc.value > 0
                   else 0.0)
            rows.append((x, fc.value, fc.error, fp.value, fp.error, rel))
    header = ["dv_over_c", "force_contour", "err_contour", "force_pendry",
              "err_pendry", "rel_diff"]
    _write_csv(cfg.output_path, _meta(cfg), header, rows)


def _run_evolve(cfg):
    sc = cfg.scenario
    pol = cfg.polarizations[0]
    series = force_time_series(pol, sc, cfg.grid, cfg.times)
    rows = list(zip(series.times, series.values))
    header = ["t", "force_hat"]
    _write_csv(cfg.output_path, _meta(cfg, [("pol", pol.value)]),
               header, rows)


def run(config):
    """Dispatch a parsed RunConfig; returns the process exit status."""
    dispatch = {
        "modes": _run_modes,
        "hybrid": _run_hybrid,
        "force-sweep": _run_force_sweep,
        "pendry": _run_pendry,
        "evolve": _run_evolve,
    }
    dispatch[config.command](config)
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="vacdrag",
        description="Quantum friction solver for sliding slabs and sheets")
    ap.add_argument("config", help="JSON configuration file")
    ap.add_argument("--command", choices=_COMMANDS,
                    help="override the command in the config")
    ap.add_argument("--output", help="override the output path")
    ap.add_argument("--threads", type=int,
                    default=int(os.environ.get("VACDRAG_THREADS", "1")))
    args = ap.parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
        cfg = parse_config(text)
        if args.command:
            cfg = _override(cfg, command=args.command)
        if args.output:
            cfg = _override(cfg, output_path=args.output)
        if args.threads != 1:
            cfg = _override(cfg, threads=max(1, args.threads))
        return run(cfg)
    except ConfigError as exc:
        _emit_error("config", str(exc), field=exc.field)
        return 2
    except VacdragError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 3
    except OSError as exc:
        _emit_error("io", str(exc))
        return 4


def _override(cfg, **kw):
    from dataclasses import replace
    return replace(cfg, **kw)


def _emit_error(kind, message, field=None):
    record = {"error": {"kind": kind, "message": message}}
    if field is not None:
        record["error"]["field"] = field
    sys.stderr.write(json.dumps(record) + "\n")


if __name__ == "__main__":
    sys.exit(main())
