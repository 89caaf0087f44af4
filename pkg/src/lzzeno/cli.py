"""Command-line entry point ``lzzeno``.

Exit codes: 0 success, 1 acceptance failure, 2 invalid input, 3 integration
abort, 4 oracle tolerance breach.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__, acceptance, experiments, io, plots
from .dynamics import (
    DEFAULT_DT,
    DEFAULT_MAX_PHASE_STEP,
    DEFAULT_STRIDE,
    ConvergenceWarning,
    IntegrationError,
    Protocol,
    SimConfig,
    integrate,
)
from .kraus_oracle import discrete_propagate, projective_zeno_simulate
from .lz_model import GAUGE_SIGN, LzParams, zeno_projective_survival
from .quantum_core import ADIABATIC, DIABATIC, DensityMatrix

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ABORT, EXIT_TOLERANCE = 0, 1, 2, 3, 4

SIMULATE_KEYS = {
    "z": float, "lambda": float, "protocol": str, "t-start": float, "t-end": float,
    "dt": float, "delta-epsilon": float, "stride": int, "max-phase-step": float,
    "initial": str, "out": str,
}


class UsageError(Exception):
    """Bad user input; the message names the offending flag."""


def _err(msg: str) -> None:
    print(f"lzzeno: error: {msg}", file=sys.stderr)


# ----------------------------------------------------------------------------
# argument helpers


def parse_grid(text: str, flag: str) -> tuple[float, ...]:
    """``"0,0.5,1"`` or ``"log:lo:hi:n"`` (optionally ``"0+log:lo:hi:n"`` to prepend zero)."""
    try:
        head = ()
        if text.startswith("0+"):
            head, text = (0.0,), text[2:]
        if text.startswith("log:"):
            _, lo, hi, n = text.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
            if not (0 < lo <= hi and n >= 1):
                raise ValueError
            return head + tuple(float(v) for v in np.geomspace(lo, hi, n))
        values = head + tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"{flag}: cannot parse grid {text!r}; use 'a,b,c' or 'log:lo:hi:n'") from None
    if not values:
        raise UsageError(f"{flag}: empty grid")
    return values


def parse_window(text: str) -> tuple[float, float]:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--window: cannot parse {text!r}") from None
    if len(parts) == 1:
        parts = [-abs(parts[0]), abs(parts[0])]
    if len(parts) != 2 or not parts[0] < parts[1]:
        raise UsageError(f"--window: need 'half' or 'start,end' with start < end, got {text!r}")
    return parts[0], parts[1]


def load_config_file(path: str) -> dict:
    """Flat JSON keys named like the long flags; a run manifest is also accepted."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from None
    if isinstance(data, dict) and data.get("tool") == "lzzeno" and "config" in data:
        data = data["config"]
    if not isinstance(data, dict):
        raise UsageError("--config: expected a JSON object")
    out = {}
    for key, value in data.items():
        k = key.replace("_", "-")
        if k == "lambda-tilde":
            k = "lambda"
        if k not in SIMULATE_KEYS:
            raise UsageError(f"--config: unknown key {key!r}")
        try:
            out[k] = None if value is None else SIMULATE_KEYS[k](value)
        except (TypeError, ValueError):
            raise UsageError(f"--config: bad value for {key!r}: {value!r}") from None
    return out


def _initial_state(name: str) -> DensityMatrix | None:
    if name == "default":
        return None
    if name == "diabatic":
        return DensityMatrix.pure(1, DIABATIC)
    if name == "adiabatic":
        return DensityMatrix.pure(2, ADIABATIC)
    raise UsageError(f"--initial: unknown state {name!r}")


def resolve_simulate(args) -> dict:
    """Merge defaults, the optional config file, and explicit flags (flags win)."""
    settings = {
        "z": None, "lambda": None, "protocol": "diabatic", "t-start": None, "t-end": None,
        "dt": DEFAULT_DT, "delta-epsilon": 0.0, "stride": DEFAULT_STRIDE,
        "max-phase-step": DEFAULT_MAX_PHASE_STEP, "initial": "default", "out": "trajectory.csv",
    }
    if args.config:
        settings.update(load_config_file(args.config))
    for key in SIMULATE_KEYS:
        value = getattr(args, key.replace("-", "_"))
        if value is not None:
            settings[key] = value
    return settings


def build_sim_config(s: dict) -> SimConfig:
    if s["z"] is None:
        raise UsageError("--z is required")
    if s["lambda"] is None:
        raise UsageError("--lambda is required")
    if not (math.isfinite(s["z"]) and s["z"] > 0):
        raise UsageError(f"--z must be a positive number, got {s['z']}")
    if not (math.isfinite(s["lambda"]) and s["lambda"] >= 0):
        raise UsageError(f"--lambda must be non-negative, got {s['lambda']}")
    if s["protocol"] not in ("diabatic", "adiabatic", "static"):
        raise UsageError(f"--protocol must be diabatic, adiabatic or static, got {s['protocol']!r}")
    if s["protocol"] != "static" and s["delta-epsilon"] != 0.0:
        raise UsageError("--delta-epsilon applies only to --protocol static")
    if not (0.001 <= s["dt"] <= 0.02):
        raise UsageError(f"--dt must lie in [0.001, 0.02], got {s['dt']}")
    if s["stride"] < 1:
        raise UsageError(f"--stride must be >= 1, got {s['stride']}")
    if s["max-phase-step"] is not None and s["max-phase-step"] < 0:
        raise UsageError(f"--max-phase-step must be >= 0 (0 disables step splitting), got {s['max-phase-step']}")
    for key in ("t-start", "t-end"):
        if s[key] is not None and not math.isfinite(s[key]):
            raise UsageError(f"--{key} must be finite")
    protocol = Protocol.static(s["delta-epsilon"]) if s["protocol"] == "static" else Protocol(s["protocol"])
    try:
        cfg = SimConfig(
            LzParams(s["z"], s["lambda"]), protocol, t_start=s["t-start"], t_end=s["t-end"], dt=s["dt"],
            initial=_initial_state(s["initial"]), sample_stride=s["stride"],
            max_phase_step=s["max-phase-step"] or None,
        )
    except ValueError as exc:
        msg = str(exc)
        flag = "--t-start/--t-end" if "t_start" in msg or "window" in msg else "--dt"
        raise UsageError(f"{flag}: {msg}") from None
    return cfg


# ----------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    s = resolve_simulate(args)
    cfg = build_sim_config(s)
    s["t-start"], s["t-end"] = cfg.t_start, cfg.t_end
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        traj = integrate(cfg)
    elapsed = time.perf_counter() - t0
    for w in caught:
        print(f"lzzeno: warning: {w.message}", file=sys.stderr)
    out = Path(s["out"])
    io.write_trajectory(out, traj)
    trace_err = float(np.max(np.abs(traj.p1_dia + traj.p2_dia - 1.0)))
    manifest = io.build_manifest(
        "simulate", s, [out],
        integrator={"method": "rk4", "dt": cfg.dt, "max_phase_step": cfg.max_phase_step,
                    "rk4_updates": traj.rk4_updates, "propagation_basis": traj.basis},
        wall_clock=elapsed,
        invariants={"max_trace_error": trace_err, "min_eigenvalue": traj.min_eigenvalue,
                    "renormalizations": traj.renormalizations, "converged": traj.converged},
    )
    io.write_manifest(io.manifest_path(out), manifest)
    print(f"wrote {out} ({len(traj)} samples)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    zs = parse_grid(args.z_grid, "--z-grid")
    ls = parse_grid(args.lambda_grid, "--lambda-grid")
    if any(not z > 0 for z in zs):
        raise UsageError("--z-grid: all values must be positive")
    if any(not v >= 0 for v in ls):
        raise UsageError("--lambda-grid: all values must be non-negative")
    if args.protocol not in ("diabatic", "adiabatic"):
        raise UsageError(f"--protocol must be diabatic or adiabatic for sweeps, got {args.protocol!r}")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if not (0.001 <= args.dt <= 0.02):
        raise UsageError(f"--dt must lie in [0.001, 0.02], got {args.dt}")
    basis = args.report_basis or ADIABATIC
    try:
        spec = experiments.SweepSpec(zs, ls, Protocol(args.protocol), args.t_start, args.t_end, args.dt, basis)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    t0 = time.perf_counter()
    result = experiments.sweep(spec, jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    out = Path(args.out)
    io.write_sweep(out, result)
    failed = [c for c in result.cells if c.error]
    for c in failed:
        print(f"lzzeno: warning: cell z={c.z:g} lambda={c.lambda_tilde:g} failed: {c.error}", file=sys.stderr)
    config = {"z-grid": list(zs), "lambda-grid": list(ls), "protocol": args.protocol, "t-start": args.t_start,
              "t-end": args.t_end, "dt": args.dt, "report-basis": basis}
    io.write_manifest(io.manifest_path(out), io.build_manifest(
        "sweep", config, [out], integrator={"method": "rk4", "dt": args.dt},
        wall_clock=elapsed, invariants={"failed_cells": len(failed),
                                        "unconverged_cells": sum(not c.converged for c in result.cells)}))
    print(f"wrote {out} ({len(result.cells)} cells, {len(failed)} failed)")
    if len(failed) == len(result.cells):
        return EXIT_ABORT
    return EXIT_OK


def oracle_tolerance(dt_meas: float) -> float:
    """Declared bound on the discrete-vs-continuous error: first order in dt_meas, unit coefficient."""
    return dt_meas


def zeno_tolerance(n: int) -> float:
    return 0.1 / n


def cmd_oracle(args) -> int:
    rows = []
    ok = True
    if args.zeno:
        ns = [int(v) for v in parse_grid(args.N_list, "--N-list")]
        if any(n < 1 for n in ns):
            raise UsageError("--N-list: N must be >= 1")
        if not (args.T > 0):
            raise UsageError("--T must be positive")
        prev = -1.0
        print("N,simulated,approximation,abs_error,tolerance,pass")
        for n in sorted(ns):
            sim = projective_zeno_simulate(args.V, args.T, n)
            approx = zeno_projective_survival(args.V, args.T, n)
            err = abs(sim - approx)
            good = err <= zeno_tolerance(n) and sim >= prev
            prev = sim
            ok &= good
            rows.append((n, sim, approx, err, zeno_tolerance(n), good))
        header = ("N", "simulated", "approximation", "abs_error", "tolerance", "pass")
    else:
        if args.z is None or args.lam is None:
            raise UsageError("--z and --lambda are required unless --zeno is given")
        if not args.z > 0:
            raise UsageError("--z must be positive")
        if not args.lam >= 0:
            raise UsageError("--lambda must be non-negative")
        if args.protocol not in ("diabatic", "adiabatic", "static"):
            raise UsageError(f"--protocol: unknown {args.protocol!r}")
        lo, hi = parse_window(args.window)
        steps = parse_grid(args.dt_meas, "--dt-meas")
        if any(not h > 0 for h in steps):
            raise UsageError("--dt-meas: values must be positive")
        protocol = Protocol.static(0.0) if args.protocol == "static" else Protocol(args.protocol)
        try:
            cfg = SimConfig(LzParams(args.z, args.lam), protocol, t_start=lo, t_end=hi)
        except ValueError as exc:
            raise UsageError(f"--window: {exc}") from None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            ref = integrate(cfg).rho[-1]
        print("dt_meas,max_error,tolerance,pass")
        for h in steps:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    got = discrete_propagate(cfg, h).rho[-1]
            except ValueError as exc:
                raise UsageError(f"--dt-meas: {exc}") from None
            err = float(np.max(np.abs(got - ref)))
            good = err <= oracle_tolerance(h)
            ok &= good
            rows.append((h, err, oracle_tolerance(h), good))
        header = ("dt_meas", "max_error", "tolerance", "pass")
    for r in rows:
        print(",".join(str(v) if type(v) is int else io.fmt(v) for v in r))
    if args.out:
        io.write_csv(args.out, header, rows)
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_validate(args) -> int:
    only = None
    if args.only:
        only = {k.strip() for k in args.only.split(",")}
        known = {k for k, _, _ in acceptance.CHECKS}
        if not only <= known:
            raise UsageError(f"--only: unknown check(s) {sorted(only - known)}")
    opt = acceptance.Options(fast=args.fast, gauge_sign=args.gauge_sign,
                             artifacts=Path(args.artifacts) if args.artifacts else None)
    results = []
    for key, _, _ in acceptance.CHECKS:
        if only is None or key in only:
            r = acceptance.run_check(key, opt)
            print(r.line(), flush=True)
            results.append(r)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} checks passed")
    return EXIT_OK if n_pass == len(results) else EXIT_FAIL


def cmd_plot(args) -> int:
    if not Path(args.input).is_file():
        raise UsageError(f"--in: no such file {args.input}")
    try:
        info = plots.render(args.input, args.kind, args.out, tuple(args.columns.split(",")))
    except (io.CsvFormatError, plots.PlotInputError) as exc:
        raise UsageError(f"--in: {exc}") from None
    print(json.dumps(info, sort_keys=True, default=str))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    figs = experiments.FIGURES if args.fig == "all" else tuple(f.strip() for f in args.fig.split(","))
    for fig in figs:
        if fig not in experiments.FIGURES:
            raise UsageError(f"--fig: unknown figure {fig!r}; choose from {', '.join(experiments.FIGURES)} or all")
    out_dir = Path(args.out)
    for fig in figs:
        t0 = time.perf_counter()
        paths = experiments.reproduce_figure(fig, out_dir, fast=args.fast, jobs=args.jobs)
        for p in paths:
            io.write_manifest(io.manifest_path(p), io.build_manifest(
                "reproduce", {"fig": fig, "fast": args.fast}, [p], wall_clock=time.perf_counter() - t0))
            print(f"wrote {p}")
    return EXIT_OK


# ----------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _err(message)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lzzeno", description="Landau-Zener transitions under continuous measurement.")
    p.add_argument("--version", action="version", version=f"lzzeno {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="integrate one trajectory and write CSV + manifest")
    s.add_argument("--z", type=float)
    s.add_argument("--lambda", dest="lambda", type=float)
    s.add_argument("--protocol", choices=("diabatic", "adiabatic", "static"))
    s.add_argument("--t-start", type=float)
    s.add_argument("--t-end", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--delta-epsilon", type=float)
    s.add_argument("--stride", type=int, help="write every n-th step")
    s.add_argument("--max-phase-step", type=float, help="phase cap per RK4 update; 0 disables splitting")
    s.add_argument("--initial", choices=("default", "diabatic", "adiabatic"))
    s.add_argument("--out")
    s.add_argument("--config", help="JSON file with the same keys as the long flags, or a manifest")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="asymptotic survival on a z x lambda grid")
    w.add_argument("--z-grid", required=True)
    w.add_argument("--lambda-grid", required=True)
    w.add_argument("--protocol", default="adiabatic")
    w.add_argument("--t-start", type=float)
    w.add_argument("--t-end", type=float)
    w.add_argument("--dt", type=float, default=DEFAULT_DT)
    w.add_argument("--report-basis", choices=(ADIABATIC, DIABATIC))
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out", default="sweep.csv")
    w.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="compare against the discrete Kraus propagation or projective Zeno")
    o.add_argument("--z", type=float)
    o.add_argument("--lambda", dest="lam", type=float)
    o.add_argument("--protocol", default="diabatic")
    o.add_argument("--dt-meas", default="0.001,0.0005")
    o.add_argument("--window", default="20", help="'half' or 'start,end' (use --window=-20,20)")
    o.add_argument("--zeno", action="store_true")
    o.add_argument("--V", type=float, default=1.0)
    o.add_argument("--T", type=float, default=1.0)
    o.add_argument("--N-list", default="10,100,1000")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("validate", help="run the acceptance checks")
    v.add_argument("--fast", action="store_true")
    v.add_argument("--only", help="comma-separated check keys")
    v.add_argument("--artifacts", help="directory for the Fig. 3 surfaces")
    v.add_argument("--gauge-sign", type=float, default=GAUGE_SIGN, help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("plot", help="render a CSV as SVG")
    g.add_argument("--in", dest="input", required=True)
    g.add_argument("--kind", required=True, choices=plots.KINDS)
    g.add_argument("--out", required=True)
    g.add_argument("--columns", default=",".join(plots.DEFAULT_SERIES))
    g.set_defaults(func=cmd_plot)

    r = sub.add_parser("reproduce", help="write the figure datasets")
    r.add_argument("--fig", required=True)
    r.add_argument("--out", default="figures")
    r.add_argument("--fast", action="store_true")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except IntegrationError as exc:
        _err(f"integration aborted: {exc}")
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
