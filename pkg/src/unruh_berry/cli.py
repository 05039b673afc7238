"""Command line interface: ``unruh-berry {sweep,fig2,plan,crosscheck,diag}``.

Exit status: 0 success, 2 invalid input, 3 numerical failure (no convergence,
cross-check outside tolerance), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import mpmath as mp

from . import __version__
from .core import DetectorConfig, cycle_period, speed_after_proper_time, unruh_temperature
from .diagonalizer import build_quadratic_form, fit_decomposition, reconstruct_residual
from .errors import DomainError, UnruhBerryError
from .oracle import FockOracleConfig
from .phases import QConvention, cycles_to_target, g_factor, gamma_inertial, time_to_target
from .scenarios import (
    PLANNING_SCENARIO,
    emit,
    load_scenarios,
    metadata,
    run_crosscheck,
    run_sweep,
    select,
    sweep_row,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be a finite number > 0, got {text!r}")
    return value


def _add_output(p):
    p.add_argument("--output", "-o", default="-", help="output file ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_convention(p):
    p.add_argument(
        "--q-convention",
        choices=[c.value for c in QConvention],
        default=None,
        help="override the squeezing-parameter convention of every scenario",
    )


def _add_oracle(p):
    p.add_argument("--cutoff", type=int, default=16, help="Fock cutoff per mode (default 16)")
    p.add_argument("--grid", type=int, default=256, help="loop samples K (default 256)")
    p.add_argument("--thermal-levels", type=int, default=12, help="thermal levels kept (default 12)")
    p.add_argument("--tolerance", type=_positive_float, default=1e-8,
                   help="convergence tolerance for the cutoff/grid doubling test (rad)")


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with status 2 on bad usage, the same as a validation error
    parser = argparse.ArgumentParser(prog="unruh-berry", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="closed-form phases over each scenario's acceleration sweep")
    p.add_argument("config", help="scenario YAML file or preset name")
    p.add_argument("--scenario", action="append", help="only this scenario id (repeatable)")
    _add_output(p)
    _add_convention(p)

    p = sub.add_parser("fig2", help="sweep of the built-in three-coupling preset")
    _add_output(p)
    _add_convention(p)

    p = sub.add_parser("plan", help="cycles and proper time to accumulate a target phase")
    p.add_argument("--config", default="fig2", help="scenario YAML file or preset (default fig2)")
    p.add_argument("--scenario", default=PLANNING_SCENARIO,
                   help=f"scenario id (default {PLANNING_SCENARIO})")
    p.add_argument("--acceleration", "-a", type=_positive_float, default=4.5e17, help="m/s^2")
    p.add_argument("--target", type=_positive_float, default=math.pi, help="target phase (rad)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    _add_convention(p)

    p = sub.add_parser("crosscheck", help="compare closed-form phases with the Fock-space oracle")
    p.add_argument("config", help="scenario YAML file or preset name")
    p.add_argument("--scenario", action="append", help="only this scenario id (repeatable)")
    p.add_argument("--output", "-o", default="-", help="JSON report file ('-' for stdout)")
    _add_convention(p)
    _add_oracle(p)

    p = sub.add_parser("diag", help="normal-mode decomposition parameters for one detector")
    p.add_argument("--omega-field", type=_positive_float, required=True, help="rad/s")
    p.add_argument("--omega-detector", type=_positive_float, required=True, help="rad/s")
    p.add_argument("--coupling", type=float, required=True, help="rad/s")
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _write_text(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_sweep(args, scenarios):
    scenarios = [s.with_convention(args.q_convention) for s in scenarios]
    rows = []
    for sc in scenarios:
        rows.extend(run_sweep(sc))
    conventions = sorted({s.q_convention for s in scenarios})
    meta = metadata(q_convention=",".join(conventions), scenarios=[s.id for s in scenarios])
    emit(rows, args.format, args.output, meta)
    return EXIT_OK


def _cmd_plan(args):
    sc = select(load_scenarios(args.config), [args.scenario])[0].with_convention(args.q_convention)
    d = fit_decomposition(sc.detector)
    sc.detector.require_weak_coupling()
    row = sweep_row(sc.id, sc.detector, d, args.acceleration, sc.q_convention)
    out = {
        "scenario_id": sc.id,
        "acceleration": args.acceleration,
        "target_phase": args.target,
        "delta_per_cycle": row.delta_per_cycle,
        "q_convention": sc.q_convention,
        "unruh_temperature": unruh_temperature(args.acceleration),
        "cycle_period": cycle_period(sc.detector.omega_field),
    }
    if row.cycles_to_pi is None:
        out.update(cycles=None, duration=None, final_speed_fraction=None)
    else:
        cycles = cycles_to_target(abs(mp.mpf(row.delta_per_cycle)), args.target)
        duration = time_to_target(cycles, sc.detector.omega_field)
        out.update(
            cycles=cycles,
            duration=duration,
            final_speed_fraction=speed_after_proper_time(args.acceleration, duration),
        )
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        for key, value in out.items():
            print(f"{key:22s} {value}")
    if out["cycles"] is None:
        print("phase difference per cycle is zero at double precision; target unreachable",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_crosscheck(args):
    oracle = FockOracleConfig(
        cutoff=args.cutoff,
        grid_points=args.grid,
        thermal_levels=args.thermal_levels,
        tolerance=args.tolerance,
    )
    scenarios = select(load_scenarios(args.config), args.scenario)
    reports = [run_crosscheck(s.with_convention(args.q_convention), oracle) for s in scenarios]
    document = {
        "meta": metadata(oracle={"cutoff": oracle.cutoff, "grid_points": oracle.grid_points,
                                 "thermal_levels": oracle.thermal_levels,
                                 "tolerance": oracle.tolerance}),
        "ok": all(r.ok for r in reports),
        "reports": [r.as_dict() for r in reports],
    }
    _write_text(json.dumps(document, indent=2) + "\n", args.output)
    for r in reports:
        status = "ok" if r.ok else "FAILED"
        cert = r.certificate
        print(
            f"{r.scenario_id}: {status}  max deviation {r.max_deviation:.3e} rad "
            f"(tolerance {r.phase_tolerance:.0e}); certificate "
            f"cutoff {cert.get('cutoff_change', float('nan')):.3e} "
            f"grid {cert.get('grid_change', float('nan')):.3e}",
            file=sys.stderr,
        )
        for err in r.errors:
            print(f"{r.scenario_id}: {err}", file=sys.stderr)
    return EXIT_OK if document["ok"] else EXIT_NUMERICAL


def _cmd_diag(args):
    config = DetectorConfig(args.omega_field, args.omega_detector, args.coupling)
    d = fit_decomposition(config)
    out = d.as_floats()
    out["reconstruction_error"] = reconstruct_residual(d, build_quadratic_form(config, 0.0))
    out["weak_coupling"] = config.weak_coupling
    if d.constraint_satisfied or d.v == 0:
        out["G"] = float(g_factor(d))
        out["gamma_inertial"] = float(gamma_inertial(d))
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        for key, value in out.items():
            print(f"{key:22s} {value}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            return _cmd_sweep(args, select(load_scenarios(args.config), args.scenario))
        if args.command == "fig2":
            return _cmd_sweep(args, load_scenarios("fig2"))
        if args.command == "plan":
            return _cmd_plan(args)
        if args.command == "crosscheck":
            return _cmd_crosscheck(args)
        if args.command == "diag":
            return _cmd_diag(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except UnruhBerryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
