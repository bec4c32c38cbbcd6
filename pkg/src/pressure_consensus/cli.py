"""Command-line entry point.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 I/O failure. Failures print one line to stderr of the form
``error code=<Code> message=<text>``.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .contraction import contraction_constants, contraction_report
from .errors import InvalidInputError, NumericalError
from .experiments import run_convergent, run_counterexample, run_scalar_family
from .io import load_config, write_json, write_trajectory_csv
from .scalar import ScalarFamily, euler_phi
from .system import simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

log = logging.getLogger("pressure_consensus")


def _fail(code: str, message: str, status: int) -> int:
    message = " ".join(str(message).split())
    print(f"error code={code} message={message}", file=sys.stderr)
    return status


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    system = config.system()
    traj = simulate(system, config.schedule, x0=config.x0, steps=config.steps)
    report = contraction_report(contraction_constants(system, traj.rho, args.norm))
    write_trajectory_csv(args.out, traj, report)
    log.info("wrote %d steps to %s", traj.steps, args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    config = load_config(args.config)
    steps = config.steps if args.steps is None else args.steps
    if steps < 1:
        return _fail("ConfigError", f"--steps must be >= 1, got {steps}", EXIT_CONFIG)
    system = config.system()
    report = contraction_report(
        contraction_constants(system, config.schedule.values(steps), args.norm), floor=args.floor
    )
    payload = report.summary()
    payload["steps"] = steps
    payload["norm"] = args.norm
    write_json(payload, args.out)
    log.info("classification %s, product %.7g", report.classification, report.partial_product_final)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    oscillating = run_counterexample(args.steps)
    converging = run_convergent(args.steps)
    write_trajectory_csv(out_dir / "counterexample.csv", oscillating.trajectory, oscillating.report)
    write_trajectory_csv(out_dir / "convergent.csv", converging.trajectory, converging.report)
    geometric = run_scalar_family(ScalarFamily.geometric_gap(0.1), 1.0, 200)
    telescoping = run_scalar_family(ScalarFamily.telescoping(), 1.0, args.steps)
    summary = {
        "counterexample": oscillating.summary(),
        "convergent": converging.summary(),
        "euler_phi_0.1": euler_phi(0.1, 1e-8),
        "scalar_geometric_gap": geometric.summary(),
        "scalar_telescoping": telescoping.summary(),
    }
    write_json(summary, out_dir / "summary.json")
    log.info(
        "oscillating product %.7g (%s), converging final residual %.3g",
        oscillating.report.partial_product_final,
        oscillating.report.classification,
        converging.final_residual,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pressure-consensus",
        description="Opinion dynamics under increasing peer pressure.",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="iterate a configured scenario and write a trajectory CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--norm", choices=("2", "inf"), default="2", help="norm for the alpha column")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="contraction constants and product criterion as JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--steps", type=int, default=None, help="number of factors (default: config steps)")
    p.add_argument("--floor", type=float, default=1e-12, help="vanishing threshold for the product")
    p.add_argument("--norm", choices=("2", "inf"), default="2", help="norm for the contraction constants")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("counterexample", help="reproduce the oscillating and converging two-agent runs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--steps", type=int, default=10_000)
    p.set_defaults(func=cmd_counterexample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except InvalidInputError as exc:
        return _fail(exc.code, exc, EXIT_CONFIG)
    except NumericalError as exc:
        return _fail(exc.code, exc, EXIT_NUMERIC)
    except ValueError as exc:
        return _fail("ConfigError", exc, EXIT_CONFIG)
    except OSError as exc:
        return _fail(type(exc).__name__, exc, EXIT_IO)


if __name__ == "__main__":
    sys.exit(main())
