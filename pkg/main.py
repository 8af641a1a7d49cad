"""
LambQ - Quantum Lamb Model Toolkit

This is the entry point of the LambQ command line. It solves the coupled
bead-and-string model for the configured parameters and writes CSV and JSON
files for each subcommand.

Usage:
    python main.py <subcommand> [--config FILE] [--out DIR] [--n-modes N]
                   [--g-target G] [--seed S] [--perturb D] [--workers W] [--verbose]

Subcommands:
    spectrum, coeffs, ground-state, decay, emission, variance, figures, verify, sweep
"""

import argparse
import sys
from typing import List, Optional

from src.cli.commands import available_commands, run_command


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the shared flags on every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="JSON run configuration")
    common.add_argument("--out", type=str, help="Output directory (default: $LAMBQ_OUT or ./lambq_out)")
    common.add_argument("--n-modes", dest="n_modes", type=int, help="Number of string modes N")
    common.add_argument("--g-target", dest="g_target", type=float,
                        help="Solve tau/(kappa_c d) so the coupling strength equals this value")
    common.add_argument("--seed", type=int, help="Seed for the randomized checks")
    common.add_argument("--perturb", type=float,
                        help="Shift the lowest Bogoliubov frequency by this amount before building coefficients")
    common.add_argument("--workers", type=int, help="Process pool size for sweeps")
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level")

    parser = argparse.ArgumentParser(prog="lambq", description="LambQ - Quantum Lamb Model Toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in available_commands():
        subparsers.add_parser(name, parents=[common])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run the subcommand.

    Args:
        argv: Argument list (default: sys.argv[1:])

    Returns:
        The process exit code.
    """
    args = build_parser().parse_args(argv)
    return run_command(args)


if __name__ == "__main__":
    sys.exit(main())
