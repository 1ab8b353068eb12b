"""
CLI Entry Point for s-vine copula processes.

Subcommands: simulate, fit, experiment, residual-qq, kpacf, compare.
Exit status: 0 ok, 2 invalid input or spec, 3 numeric failure,
4 optimizer non-convergence.
"""

import argparse
import sys
from typing import List, Optional

from svine import __version__
from svine.tools import commands
from svine.tools.command_catalog import get_catalog_help_text, get_command_description
from svine.tools.registry import CommandRegistry


def setup_registry() -> CommandRegistry:
    """Register every command under its catalog name (command_catalog is the single source of truth)."""
    registry = CommandRegistry()

    # Simulation
    registry.register("simulate", commands.cmd_simulate, get_command_description("simulate"))

    # Estimation
    registry.register("fit", commands.cmd_fit, get_command_description("fit"))

    # Diagnostics & experiments
    registry.register("experiment", commands.cmd_experiment, get_command_description("experiment"))
    registry.register("residual-qq", commands.cmd_residual_qq, get_command_description("residual-qq"))
    registry.register("kpacf", commands.cmd_kpacf, get_command_description("kpacf"))
    registry.register("compare", commands.cmd_compare, get_command_description("compare"))

    return registry


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svine",
        description="Stationary d-vine copula time-series processes.",
        epilog=get_catalog_help_text(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help=get_command_description("simulate"))
    p.add_argument("spec", help="model-spec JSON file")
    p.add_argument("-n", type=int, required=True, help="path length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--family", default=None)
    p.add_argument("--negative-rule", default=None)
    p.add_argument("--out", required=True, help="output CSV")

    p = sub.add_parser("fit", help=get_command_description("fit"))
    p.add_argument("data", help="single-column CSV")
    p.add_argument("spec", help="model-spec template JSON file")
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--family", default=None)
    p.add_argument("--negative-rule", default=None)
    p.add_argument("--semi-empirical-lags", type=int, default=commands.DEFAULT_SEMI_EMPIRICAL_LAGS)
    p.add_argument("--out", required=True, help="fit report JSON")

    p = sub.add_parser("experiment", help=get_command_description("experiment"))
    p.add_argument("spec", help="model-spec JSON file")
    p.add_argument("-n", type=int, required=True, help="innovation count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--family", action="append", default=None, help="repeatable; defaults to the spec's families")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("residual-qq", help=get_command_description("residual-qq"))
    p.add_argument("report", help="fit report JSON")
    p.add_argument("--out", required=True, help="output CSV")

    p = sub.add_parser("kpacf", help=get_command_description("kpacf"))
    p.add_argument("spec", help="model-spec JSON file")
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--out", default=None, help="optional output CSV")

    p = sub.add_parser("compare", help=get_command_description("compare"))
    p.add_argument("reports", nargs="+", help="fit report JSON files")
    p.add_argument("--out", default=None, help="optional output CSV")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    registry = setup_registry()

    if args.command == "simulate":
        return registry.execute(
            "simulate", args.spec, args.n, args.seed, args.out, args.truncation, args.family, args.negative_rule
        )
    if args.command == "fit":
        return registry.execute(
            "fit", args.data, args.spec, args.out, args.family, args.negative_rule, args.truncation,
            args.semi_empirical_lags,
        )
    if args.command == "experiment":
        return registry.execute("experiment", args.spec, args.n, args.seed, args.out, args.family, args.truncation)
    if args.command == "residual-qq":
        return registry.execute("residual-qq", args.report, args.out)
    if args.command == "kpacf":
        return registry.execute("kpacf", args.spec, args.out, args.truncation)
    return registry.execute("compare", args.reports, args.out)


if __name__ == "__main__":
    sys.exit(main())
