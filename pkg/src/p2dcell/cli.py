"""Command line entry point: ``p2dcell simulate | check-params | verify``.

Exit status: 0 success, 1 validation failure, 2 halted by a monitor,
3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .coupler import RunOptions, run
from .kinetics import check_exponent_conditions
from .params import ConfigError, config_to_dict, load_config, reference_config, validate_config
from .profile import profile_from_dict, read_profile_csv
from .io import build_report, write_report, write_series, write_snapshots
from .model import CellModel
from .potentials import SolverFailure
from .state import InadmissibleState, initial_state
from .verification import SUITES, run_suite

__all__ = ["EXIT_OK", "EXIT_INVALID", "EXIT_HALT", "EXIT_SOLVER", "MODES", "build_parser", "main"]

EXIT_OK, EXIT_INVALID, EXIT_HALT, EXIT_SOLVER = 0, 1, 2, 3
MODES = ("exponential", "truncated", "truncated+linearFT")
ORDER_TARGET = {"spatial": 2.0, "temporal": 1.0}
ORDER_TOL = 0.2


def _snapshots_arg(s: str):
    if s in ("none", "all"):
        return s
    try:
        n = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError("expected none, all or a positive integer") from None
    if n <= 0:
        raise argparse.ArgumentTypeError("snapshot cadence must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="p2dcell", description="Pseudo-two-dimensional lithium-ion cell simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulation and write series.csv and report.json")
    sim.add_argument("--config", type=Path, help="JSON cell configuration (default: packaged reference cell)")
    sim.add_argument("--profile", type=Path, help="current profile override (.csv or .json)")
    sim.add_argument("--out", type=Path, required=True, help="output directory")
    sim.add_argument("--dt0", type=float)
    sim.add_argument("--picard-tol", type=float)
    sim.add_argument("--newton-tol", type=float)
    sim.add_argument("--snapshots", type=_snapshots_arg, default="none", help="none, all or every N steps")
    sim.add_argument("--mode", choices=MODES)
    sim.add_argument("--threads", type=int, default=None)

    chk = sub.add_parser("check-params", help="validate a configuration and lint the kinetic exponents")
    chk.add_argument("--config", type=Path)

    ver = sub.add_parser("verify", help="run convergence studies and print observed orders")
    ver.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    return p


def _load(path: Path | None):
    return reference_config() if path is None else load_config(path)


def _mode_of(cfg) -> str:
    if cfg.kinetics.mode == "truncated":
        return "truncated+linearFT" if cfg.thermal.mode == "linear-truncated" else "truncated"
    return cfg.kinetics.mode


def _load_profile(path: Path):
    if path.suffix.lower() == ".csv":
        return read_profile_csv(path)
    with open(path) as fh:
        return profile_from_dict(json.load(fh), base_dir=path.parent)


def cmd_check_params(args) -> int:
    try:
        cfg = _load(args.config)
    except (ConfigError, OSError, ValueError, KeyError) as exc:
        print(f"configuration error: {exc}")
        return EXIT_INVALID
    val = validate_config(cfg)
    print(val)
    lint = check_exponent_conditions(cfg.kinetics, cfg.transport.alpha_phie, cfg.thermal.T_range)
    print(lint)
    ok = val.ok and lint.ok
    for e in lint.violations:
        print(f"violated: {e.condition} ({e.region}, T={e.T:g}, margin {e.margin:+.3e})")
    print("OK" if ok else "INVALID")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_simulate(args) -> int:
    try:
        cfg = _load(args.config)
        if args.profile is not None:
            cfg = replace(cfg, current=_load_profile(args.profile))
        if args.mode is not None:
            cfg = cfg.with_mode(args.mode)
    except (ConfigError, OSError, ValueError, KeyError) as exc:
        print(f"configuration error: {exc}")
        return EXIT_INVALID
    val = validate_config(cfg)
    if not val.ok:
        print(val)
        return EXIT_INVALID
    lint = check_exponent_conditions(cfg.kinetics, cfg.transport.alpha_phie, cfg.thermal.T_range)
    for e in lint.violations:
        print(f"warning: exponent condition {e.condition} violated ({e.region}, T={e.T:g})", file=sys.stderr)

    opts = RunOptions.from_config(
        cfg.solver, cfg.monitors, dt0=args.dt0, picard_tol=args.picard_tol, newton_tol=args.newton_tol,
        threads=args.threads, snapshots=args.snapshots,
    )
    if args.dt0 is not None and cfg.solver.dt_max is None:
        opts = replace(opts, dt_max=args.dt0)
    model = CellModel(cfg)
    try:
        state0 = initial_state(model, opts=opts.elliptic)
    except InadmissibleState as exc:
        print(f"inadmissible initial data: {exc}")
        return EXIT_INVALID
    except SolverFailure as exc:
        print(json.dumps({"tag": "solver_failure", "t": 0.0, "message": str(exc)}))
        return EXIT_SOLVER

    t0 = time.perf_counter()
    series = run(model, state0, cfg.current, opts)
    wall = time.perf_counter() - t0

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_series(out / "series.csv", series.records)
    report = build_report(model, series, state0, _mode_of(cfg), config_to_dict(cfg), lint, val)
    report["statistics"]["wall_seconds"] = wall
    write_report(out / "report.json", report)
    if series.snapshots:
        write_snapshots(out / "snapshots", model, series.snapshots)

    if series.halt is None:
        print(f"completed t = {series.final_state.t:g} s in {len(series.reports)} steps")
        return EXIT_OK
    print(json.dumps(series.halt.to_dict()))
    return EXIT_SOLVER if series.halt.tag == "solver_failure" else EXIT_HALT


def cmd_verify(args) -> int:
    ok = True
    for study in run_suite(args.suite):
        print(study)
        target = ORDER_TARGET.get(study.kind)
        if target is not None:
            good = abs(study.observed - target) <= ORDER_TOL
            print(f"  observed order {study.observed:.3f} (target {target} +- {ORDER_TOL}): {'ok' if good else 'OFF'}")
            ok &= good
    return EXIT_OK if ok else EXIT_INVALID


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return {"simulate": cmd_simulate, "check-params": cmd_check_params, "verify": cmd_verify}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
