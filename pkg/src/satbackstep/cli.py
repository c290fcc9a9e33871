"""Command line entry point.

Subcommands::

    satbackstep run --scenario FILE --out DIR [--jobs N]
    satbackstep verify --scenario FILE [--jobs N]
    satbackstep bounds --xi XI --scenario FILE

Exit codes: 0 success, 2 a theorem monitor fired or a run aborted on a
theorem violation, 3 configuration (or output path) error, 4 numerical
failure.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import os
import sys

from .errors import ConfigError, NumericalFailure, SatBackstepError, TheoremViolation
from .outputs import summary_document, write_outputs
from .saturation import invariant_bounds
from .scenario import load_scenario, parse_scenario
from .sim import ClosedLoop, monitor_check, simulate

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4


@dataclass
class RunResult:
    label: str
    trajectory: object
    stats: object
    violations: list
    status: str
    error: str = None
    exit_code: int = EXIT_OK


def run_one(scenario, ic, loop=None):
    """Simulate one initial condition and classify the outcome."""
    try:
        traj, stats = simulate(scenario, ic, loop)
    except TheoremViolation as exc:
        traj = getattr(exc, "trajectory", None)
        viols = monitor_check(traj, scenario) if traj is not None else []
        return RunResult(ic.label, traj, getattr(exc, "stats", None), viols, "aborted",
                         f"{type(exc).__name__} at t={exc.time!r}: {exc}", EXIT_VIOLATION)
    except NumericalFailure as exc:
        traj = getattr(exc, "trajectory", None)
        return RunResult(ic.label, traj, getattr(exc, "stats", None), [], "numerical-failure",
                         f"{type(exc).__name__} at t={exc.time!r} stage {exc.stage}: {exc}",
                         EXIT_NUMERICAL)
    viols = monitor_check(traj, scenario)
    theorem = [v for v in viols if v.kind == "theorem"]
    status = "violation" if theorem else "ok"
    return RunResult(ic.label, traj, stats, viols, status, None,
                     EXIT_VIOLATION if theorem else EXIT_OK)


def _worker(text, index):
    scenario = parse_scenario(text)
    return run_one(scenario, scenario.initial_conditions[index])


def run_all(scenario, text, jobs=None):
    """Run every initial condition, in parallel processes when ``jobs > 1``.

    Results keep the order of the scenario's initial conditions.
    """
    ics = scenario.initial_conditions
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs > 1 and len(ics) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(ics))) as pool:
            futures = [pool.submit(_worker, text, i) for i in range(len(ics))]
            return [f.result() for f in futures]
    loop = ClosedLoop(scenario)
    return [run_one(scenario, ic, loop) for ic in ics]


def combined_exit(results):
    codes = {r.exit_code for r in results}
    for code in (EXIT_NUMERICAL, EXIT_VIOLATION):
        if code in codes:
            return code
    return EXIT_OK


def _report(result, out):
    s = result.stats
    line = f"{result.label}: {result.status}"
    if s is not None:
        line += (f" rows={s.rows} u in [{s.min_u:.6f}, {s.max_u:.6f}]"
                 f" final|phi1|={s.final_abs_phi1:.3e}")
    theorem = sum(v.kind == "theorem" for v in result.violations)
    line += f" violations={theorem}"
    assumption = len(result.violations) - theorem
    if assumption:
        line += f" assumption-warnings={assumption}"
    print(line, file=out)
    if result.error:
        print(f"  {result.error}", file=out)


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror}") from None


def cmd_run(args, out):
    text = _read(args.scenario)
    scenario = parse_scenario(text)
    results = run_all(scenario, text, args.jobs)
    multi = len(results) > 1
    for r in results:
        doc = summary_document(scenario, r.label, r.stats, r.violations, r.status, r.error)
        try:
            paths = write_outputs(r.trajectory, doc, scenario, args.out, multi)
        except OSError as exc:
            raise ConfigError(str(exc.strerror or exc)) from None
        _report(r, out)
        for p in paths:
            print(f"  wrote {p}", file=out)
    return combined_exit(results)


def cmd_verify(args, out):
    text = _read(args.scenario)
    scenario = parse_scenario(text)
    results = run_all(scenario, text, args.jobs)
    for r in results:
        _report(r, out)
        for v in [v for v in r.violations if v.kind == "theorem"][:5]:
            print(f"  {v.monitor} row {v.row} t={v.t:.6g}: {v.detail}", file=out)
    return combined_exit(results)


def cmd_bounds(args, out):
    scenario = load_scenario(args.scenario)
    cert = invariant_bounds(scenario.saturation, args.xi)
    print(f"xi={cert.xi:g}", file=out)
    print(f"u_tilde_max={cert.u_tilde_max:.6f}", file=out)
    print(f"u_tilde_min={cert.u_tilde_min:.6f}", file=out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="satbackstep",
        description="Closed-loop backstepping simulations through a smooth input saturation model.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="simulate and write CSV, JSON and SVG outputs")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPUs)")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("verify", help="simulate and run the monitors only")
    p.add_argument("--scenario", required=True)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("bounds", help="print the input confinement interval for |u_c| <= xi")
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=err)
        return EXIT_NUMERICAL
    except SatBackstepError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_VIOLATION


def run_command(argv):
    """Run the CLI with an argument list and return the exit code."""
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
