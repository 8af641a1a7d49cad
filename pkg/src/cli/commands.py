"""
CLI Commands Module

This module implements the subcommands of the LambQ command line. Each
handler takes a LambModelService, writes its files and prints a short rich
summary; run_command wraps a handler with configuration loading, logging and
the exit-code contract.

Exit codes:
    0: success
    1: invalid configuration, parameter or argument
    2: instability (g >= 1) or singular coefficient matrix
    3: verification failure, or a root or resonance that could not be found

Functions:
    configure_logging: Set up console logging
    attach_log_file: Add the per-run log file in the output directory
    build_config: Load the configuration file and apply command-line overrides
    exit_code_for: Map an exception to its exit code
    run_command: Run one subcommand and return its exit code
    available_commands: Names of the subcommands
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, Iterable, List

from rich.console import Console
from rich.table import Table

from ..models.run_config import RunConfig, load_run_config
from ..services.lamb_service import LambModelService
from ..utils.exceptions import (BracketError, InstabilityError, LambModelError, RootNotFoundError,
                                SingularMatrixError, VerificationError)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INSTABILITY = 2
EXIT_VERIFICATION = 3
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_FILE_NAME = "lambq.log"

console = Console()
error_console = Console(stderr=True)
logger = logging.getLogger(__name__)


def configure_logging(verbose: bool = False) -> None:
    """Log to stderr at WARNING, or DEBUG with --verbose."""
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=[handler],
        force=True,
    )


def attach_log_file(out_dir: Path) -> None:
    """Also log at INFO to <out_dir>/lambq.log."""
    out_dir.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out_dir / LOG_FILE_NAME)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler.setLevel(logging.INFO)
    logging.getLogger().addHandler(handler)


def build_config(args: argparse.Namespace) -> RunConfig:
    """
    Load the configuration and apply the command-line overrides.

    Raises:
        ConfigError: If the file or an override is invalid
    """
    config = load_run_config(args.config)
    return config.with_overrides(
        out_dir=args.out,
        n_modes=args.n_modes,
        g_target=args.g_target,
        seed=args.seed,
        perturb=args.perturb,
        workers=args.workers,
    )


def exit_code_for(error: Exception) -> int:
    """Exit code of the contract for an exception raised by a command."""
    if isinstance(error, (InstabilityError, SingularMatrixError)):
        return EXIT_INSTABILITY
    if isinstance(error, (VerificationError, RootNotFoundError, BracketError)):
        return EXIT_VERIFICATION
    return EXIT_CONFIG


def _print_written(paths: Iterable[Path]) -> None:
    for path in paths:
        console.print(f"[green]wrote[/green] {path}")


def cmd_spectrum(service: LambModelService) -> None:
    path = service.run_spectrum()
    spectrum = service.spectrum
    table = Table(title="Bogoliubov spectrum")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("g", f"{spectrum.g:.12g}")
    table.add_row("modes", str(spectrum.size))
    table.add_row("Omega_min", f"{spectrum.Omega[0]:.12g}")
    table.add_row("Omega_max", f"{spectrum.Omega[-1]:.12g}")
    table.add_row("max residual", f"{spectrum.max_residual:.3e}")
    console.print(table)
    _print_written([path])


def cmd_coeffs(service: LambModelService) -> None:
    paths = service.run_coeffs()
    coeffs = service.coefficients
    console.print(f"|det M| = {coeffs.det_M:.12g} (sign {coeffs.det_sign:+d}), "
                  f"ground-state overlap {coeffs.ground_norm:.12g}")
    _print_written(paths)


def cmd_ground_state(service: LambModelService) -> None:
    paths = service.run_ground_state()
    report = service.ground_state()
    table = Table(title="Ground state")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("bead occupation", f"{report.bead_occupation:.6g}")
    table.add_row("string occupation", f"{report.string_occupation:.6g}")
    table.add_row("variance ratio", f"{report.variance_ratio:.6g}")
    console.print(table)
    _print_written(paths)


def cmd_decay(service: LambModelService) -> None:
    paths = service.run_decay()
    report = service.decay()
    table = Table(title="Decay rates")
    table.add_column("rate")
    table.add_column("value", justify="right")
    table.add_row("omega_r", f"{report.omega_r:.6g}")
    table.add_row("Gamma (closed form)", f"{report.Gamma_closed:.6g}")
    table.add_row("Gamma (envelope fit)", "n/a" if report.Gamma_fit is None else f"{report.Gamma_fit:.6g}")
    table.add_row("Gamma_GR = 2 nu", f"{report.Gamma_gr:.6g}")
    table.add_row("2 pi J(omega_0)", f"{report.Gamma_gr_finite:.6g}")
    console.print(table)
    _print_written(paths)


def cmd_emission(service: LambModelService) -> None:
    path = service.run_emission()
    spectrum = service.emission()
    console.print(f"total P1 = {spectrum.total_p1:.6f}, multi-quantum weight = {spectrum.multi_quantum_weight:.6f}, "
                  f"peak at Omega = {spectrum.peak_Omega:.6g}")
    _print_written([path])


def cmd_variance(service: LambModelService) -> None:
    path = service.run_variance()
    summary = service.variance()
    console.print(f"variance ratio = {summary['variance_ratio']:.6g}"
                  + ("" if summary["R"] is None else f", continuum R = {summary['R']:.6g}"))
    _print_written([path])


def cmd_figures(service: LambModelService) -> None:
    _print_written(service.run_figures())


def cmd_verify(service: LambModelService) -> None:
    """
    Print the invariant table.

    Raises:
        VerificationError: Naming the first failed invariant
    """
    report, path = service.run_verify()
    table = Table(title="Verification")
    table.add_column("invariant")
    table.add_column("residual", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("status")
    for check in report.checks:
        if check.tolerance is None:
            status = "[dim]info[/dim]"
        else:
            status = "[green]pass[/green]" if check.passed else "[red]FAIL[/red]"
        tolerance = "-" if check.tolerance is None else f"{check.tolerance:.0e}"
        table.add_row(check.name, f"{check.residual:.3e}", tolerance, status)
    console.print(table)
    _print_written([path])
    if report.failures:
        first = report.failures[0]
        raise VerificationError(first.name, first.residual, first.tolerance)


def cmd_sweep(service: LambModelService) -> None:
    _print_written(service.run_sweep())


COMMANDS: Dict[str, Callable[[LambModelService], None]] = {
    "spectrum": cmd_spectrum,
    "coeffs": cmd_coeffs,
    "ground-state": cmd_ground_state,
    "decay": cmd_decay,
    "emission": cmd_emission,
    "variance": cmd_variance,
    "figures": cmd_figures,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def run_command(args: argparse.Namespace) -> int:
    """
    Run the subcommand named by args.command.

    Args:
        args: Parsed command-line arguments

    Returns:
        The exit code.
    """
    configure_logging(args.verbose)
    try:
        config = build_config(args)
        service = LambModelService(config)
        # Parameters are validated before anything is written to out_dir
        service.params
        attach_log_file(service.out_dir)
        logger.info(f"Running '{args.command}' with output in {service.out_dir}")
        COMMANDS[args.command](service)
    except InstabilityError as e:
        error_console.print(f"[red]Unstable:[/red] coupling strength g = {e.g:.12g} (must be < 1)")
        return EXIT_INSTABILITY
    except (LambModelError, OSError) as e:
        code = exit_code_for(e)
        error_console.print(f"[red]Error ({type(e).__name__}):[/red] {e}")
        return code
    return EXIT_OK


def available_commands() -> List[str]:
    return list(COMMANDS)
