"""
Lamb Model Service Module

This module provides LambModelService, the single entry point the command
line uses. It turns a RunConfig into physical parameters, runs the
computation chain once (modes, spectrum, coefficients) and caches each
stage, then writes the CSV and JSON files of each subcommand.

Classes:
    LambModelService: Pipeline, caching, file emission, verification and sweeps

Functions:
    run_sweep_task: Compute one sweep point (process-pool entry point)
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..models.bogoliubov import TOL_IDENTITY, CoefficientSet
from ..models.observables import DecayReport, EmissionSpectrum, GroundStateReport, VerificationReport
from ..models.parameters import DerivedScales, ParameterBlock, ParameterKind, PhysicalParams, StringModes
from ..models.run_config import DEFAULT_RUN_SETTINGS, RunConfig, SweepParameter, load_run_config
from ..models.spectrum import BogoliubovSpectrum, SecularProblem
from ..utils.exceptions import ConfigError, LambModelError, ResonanceNotFoundError, VerificationError
from ..utils.output import resolve_output_dir, write_csv, write_json
from . import oracle
from .bogoliubov_service import build_coefficients, check_symplectic, squeeze_matrix
from .core_model import (build_problem, coupling_strength, solve_tension_for_coupling, thermodynamic_coupling,
                         wavenumber_residuals)
from .observables_service import (bead_variance, continuum_functions, decay_rate, default_time_grid,
                                  displacement_trace, emission_spectrum, occupation_numbers, quadrature_covariance,
                                  relative_variance, spectral_density)
from .spectrum_solver import TOL_SECULAR, ground_state_energy, solve_spectrum, yurke_check

# Tolerances of the verification suite
TOL_QUADRATURE = 1e-10
TOL_COEFFICIENT_SYSTEM = 1e-9
TOL_FOCK_ENERGY = 1e-6
TOL_FOCK_OBSERVABLE = 1e-5
TOL_PARITY = 1e-10
# Observables must move less than this fraction of their tolerance between cutoff and cutoff - 2
CUTOFF_CONVERGENCE_FRACTION = 0.1
# Couplings of the Fock subsystem are scaled down to this coupling strength
FOCK_COUPLING_CAP = 0.2
RANDOM_DRAWS = 5
RANDOM_MODE_COUNTS = (5, 15, 30)

logger = logging.getLogger(__name__)


def _dimensionless_values(block: ParameterBlock) -> Dict[str, Any]:
    """Dimensionless values of a block; raw blocks fall back to the default dimensionless set."""
    if block.kind is ParameterKind.DIMENSIONLESS:
        return dict(block.values)
    return dict(DEFAULT_RUN_SETTINGS["parameters"]["dimensionless"])


def _tension_for(target_g: float, values: Dict[str, Any], n_modes: Optional[int] = None) -> float:
    return solve_tension_for_coupling(
        target_g,
        values["omega_c_ratio"],
        n_modes if n_modes is not None else values["n_modes"],
        omega_d_ratio=values.get("omega_d_ratio"),
        ell=values.get("ell"),
        omega_0=values.get("omega_0", 1.0),
    )


class LambModelService:
    """
    Runs the model for one configuration and writes its output files.

    Every stage is computed on first use and cached, so subcommands that need
    the same spectrum or coefficients share one solve.

    Attributes:
        config (RunConfig): The run configuration
        out_dir (Path): Directory output files are written to
    """

    def __init__(self, config: Optional[RunConfig] = None, out_dir: Optional[str] = None):
        """
        Initialize the service.

        Args:
            config: Run configuration (default configuration when None)
            out_dir: Output directory; falls back to the configuration, LAMBQ_OUT and ./lambq_out
        """
        self.config = config if config is not None else load_run_config()
        self.out_dir = resolve_output_dir(out_dir if out_dir is not None else self.config.out_dir)

    # --- Pipeline --- #

    @cached_property
    def params(self) -> PhysicalParams:
        """Physical constants, with the tension ratio solved when a target g is configured."""
        block = self.config.parameters
        if self.config.g_target is not None:
            tension_ratio = _tension_for(self.config.g_target, block.values)
            block = block.with_values(tension_ratio=tension_ratio)
        return block.to_params()

    @cached_property
    def _model(self):
        return build_problem(self.params)

    @property
    def scales(self) -> DerivedScales:
        return self._model[0]

    @property
    def modes(self) -> StringModes:
        return self._model[1]

    @property
    def problem(self) -> SecularProblem:
        return self._model[2]

    @cached_property
    def spectrum(self) -> BogoliubovSpectrum:
        spectrum = solve_spectrum(self.problem)
        if self.config.perturb:
            logger.warning(f"Shifting Omega_0 by {self.config.perturb:.3e} before building coefficients")
            spectrum = spectrum.with_shift(0, self.config.perturb)
        return spectrum

    @cached_property
    def coefficients(self) -> CoefficientSet:
        return build_coefficients(self.problem, self.spectrum)

    def _path(self, name: str) -> Path:
        return self.out_dir / name

    # --- Subcommands --- #

    def run_spectrum(self) -> Path:
        """Write spectrum.csv (alpha, Omega, bracket_lo, bracket_hi, residual); brackets in frequency units."""
        spectrum = self.spectrum
        brackets = np.sqrt(spectrum.brackets)
        return write_csv(
            {
                "alpha": np.arange(spectrum.size),
                "Omega": spectrum.Omega,
                "bracket_lo": brackets[:, 0],
                "bracket_hi": brackets[:, 1],
                "residual": spectrum.residuals,
            },
            self._path("spectrum.csv"),
        )

    def run_coeffs(self) -> List[Path]:
        """Write coeffs.csv (alpha, beta, M, N, U, V) and coeffs.json with det M and the squeeze diagnostics."""
        coeffs = self.coefficients
        size = coeffs.size
        alpha, beta = np.divmod(np.arange(size * size), size)
        table = write_csv(
            {
                "alpha": alpha,
                "beta": beta,
                "M": coeffs.M.ravel(),
                "N": coeffs.N_mat.ravel(),
                "U": coeffs.U.ravel(),
                "V": coeffs.V.ravel(),
            },
            self._path("coeffs.csv"),
        )
        squeeze = squeeze_matrix(coeffs)
        summary = {
            "det_M": coeffs.det_M,
            "det_sign": coeffs.det_sign,
            "ground_norm": coeffs.ground_norm,
            "xi_spectral_radius": squeeze.spectral_radius,
            "xi_symmetry_residual": squeeze.symmetry_residual,
            "g": self.spectrum.g,
        }
        return [table, write_json(summary, self._path("coeffs.json"))]

    def ground_state(self) -> GroundStateReport:
        """Occupations with the bead variance filled in."""
        occupation = occupation_numbers(self.coefficients)
        variance = bead_variance(self.coefficients, self.spectrum, self.scales, self.params.m)
        logger.debug(f"String occupation is {occupation.string_balance:.6g} times the bead occupation")
        return replace(occupation, variance_u0=variance.variance, variance_ratio=variance.ratio)

    def run_ground_state(self) -> List[Path]:
        """Write occupation.csv (alpha, Omega, n) and ground_state.json."""
        report = self.ground_state()
        frequencies = np.concatenate(([self.problem.omega_0], self.problem.omega))
        table = write_csv(
            {"alpha": np.arange(frequencies.size), "Omega": frequencies, "n": report.n_occ},
            self._path("occupation.csv"),
        )
        summary = {
            "total_occ": report.total_occ,
            "bead_occupation": report.bead_occupation,
            "string_occupation": report.string_occupation,
            "string_balance": report.string_balance,
            "variance_u0": report.variance_u0,
            "variance_ratio": report.variance_ratio,
            "ground_state_energy": ground_state_energy(self.problem, self.spectrum),
            "ground_norm": self.coefficients.ground_norm,
        }
        return [table, write_json(summary, self._path("ground_state.json"))]

    def decay(self) -> DecayReport:
        return decay_rate(self.scales, self.coefficients, self.spectrum, self.config.delta)

    def run_decay(self) -> List[Path]:
        """Write decay.json, trace.csv (t, u0) and rho.csv (Omega, rho)."""
        report = self.decay()
        t_grid = default_time_grid(self.scales, self.config.n_time, self.config.t_max)
        trace = displacement_trace(self.coefficients, self.spectrum, self.config.delta, t_grid)
        density = spectral_density(self.coefficients)
        return [
            write_json(report, self._path("decay.json")),
            write_csv({"t": t_grid, "u0": trace}, self._path("trace.csv")),
            write_csv({"Omega": density.Omega, "rho": density.rho}, self._path("rho.csv")),
        ]

    def emission(self) -> EmissionSpectrum:
        return emission_spectrum(self.coefficients)

    def run_emission(self) -> Path:
        """Write p1.csv (Omega, P1)."""
        spectrum = self.emission()
        logger.info(f"Single-bogoliubon emission total {spectrum.total_p1:.6f}, "
                    f"peak at Omega = {spectrum.peak_Omega:.6g}")
        return write_csv({"Omega": spectrum.Omega, "P1": spectrum.p1}, self._path("p1.csv"))

    def variance(self) -> Dict[str, Any]:
        """Discrete bead variance next to the continuum ratio R at the same scales."""
        result = bead_variance(self.coefficients, self.spectrum, self.scales, self.params.m)
        summary: Dict[str, Any] = {
            "variance_u0": result.variance,
            "variance_ratio": result.ratio,
            "form_residual": result.form_residual,
            "nu_bar": None,
            "omega_d_bar": None,
            "R": None,
        }
        try:
            omega_r = math.sqrt(continuum_functions(self.scales).resonance())
        except ResonanceNotFoundError as e:
            logger.warning(f"No continuum resonance, R not evaluated: {e}")
            return summary
        nu_bar = self.scales.nu / omega_r
        omega_d_bar = self.scales.omega_d / omega_r
        summary.update(nu_bar=nu_bar, omega_d_bar=omega_d_bar, R=relative_variance(nu_bar, omega_d_bar))
        # The continuum ratio is measured in units of 1/(2 m omega_r)
        summary["variance_ratio_omega_r"] = result.ratio * omega_r / self.scales.omega_0
        return summary

    def run_variance(self) -> Path:
        """Write variance.json."""
        return write_json(self.variance(), self._path("variance.json"))

    # --- Figures --- #

    def _figure_model(self, g: float, n_modes: int) -> Tuple[SecularProblem, BogoliubovSpectrum, CoefficientSet]:
        values = _dimensionless_values(self.config.parameters)
        values["n_modes"] = n_modes
        values["tension_ratio"] = _tension_for(g, values)
        _, _, problem = build_problem(ParameterBlock(ParameterKind.DIMENSIONLESS, values).to_params())
        spectrum = solve_spectrum(problem)
        return problem, spectrum, build_coefficients(problem, spectrum)

    def figure2(self) -> Dict[str, np.ndarray]:
        """g_inf against tau/(kappa_c d) for several omega_c/omega_0, from 0 to infinite tension."""
        options = self.config.figures
        ratios = np.concatenate(([0.0], np.logspace(-3, 3, max(options["fig2_points"] - 2, 1)), [math.inf]))
        rows: Dict[str, List[float]] = {"tension_ratio": [], "omega_c_ratio": [], "g_inf": []}
        for omega_c_ratio in options["fig2_omega_c_ratios"]:
            for tension_ratio in ratios:
                rows["tension_ratio"].append(tension_ratio)
                rows["omega_c_ratio"].append(omega_c_ratio)
                rows["g_inf"].append(thermodynamic_coupling(omega_c_ratio, tension_ratio))
        return {key: np.asarray(value) for key, value in rows.items()}

    def figure3(self) -> Dict[str, np.ndarray]:
        """Ground-state occupation of each uncoupled mode at the figure coupling."""
        options = self.config.figures
        problem, _, coeffs = self._figure_model(options["g"], options["n_modes"])
        report = occupation_numbers(coeffs)
        frequencies = np.concatenate(([problem.omega_0], problem.omega))
        return {"alpha": np.arange(frequencies.size), "omega": frequencies, "n": report.n_occ}

    def figure4(self) -> Dict[str, np.ndarray]:
        """Spectral density rho and rho per unit frequency for each figure-4 coupling."""
        options = self.config.figures
        columns: Dict[str, List[np.ndarray]] = {"g": [], "Omega": [], "rho": [], "density": []}
        for g in options["fig4_g"]:
            _, _, coeffs = self._figure_model(g, options["fig4_n_modes"])
            density = spectral_density(coeffs)
            logger.info(f"g = {g}: spectral density HWHM {density.hwhm:.6g}")
            columns["g"].append(np.full(density.rho.size, g))
            columns["Omega"].append(density.Omega)
            columns["rho"].append(density.rho)
            columns["density"].append(density.rho / np.gradient(density.Omega))
        return {key: np.concatenate(value) for key, value in columns.items()}

    def figure5(self) -> Dict[str, np.ndarray]:
        """Single-bogoliubon emission probabilities at the figure coupling."""
        options = self.config.figures
        _, _, coeffs = self._figure_model(options["g"], options["n_modes"])
        spectrum = emission_spectrum(coeffs)
        logger.info(f"Figure 5 emission total {spectrum.total_p1:.6f}")
        return {"Omega": spectrum.Omega, "P1": spectrum.p1}

    def figure_s3(self) -> Dict[str, np.ndarray]:
        """Continuum variance ratio R against nu_bar for each omega_d_bar."""
        options = self.config.figures
        nu_bars = np.linspace(0.0, options["figS3_nu_max"], options["figS3_points"])
        columns: Dict[str, List[float]] = {"nu_bar": [], "omega_d_bar": [], "R": []}
        for omega_d_bar in options["figS3_omega_d_bars"]:
            for nu_bar in nu_bars:
                columns["nu_bar"].append(nu_bar)
                columns["omega_d_bar"].append(omega_d_bar)
                columns["R"].append(relative_variance(nu_bar, omega_d_bar))
        return {key: np.asarray(value) for key, value in columns.items()}

    def run_figures(self) -> List[Path]:
        """Write fig2.csv, fig3.csv, fig4.csv, fig5.csv and figS3.csv."""
        figures = {
            "fig2.csv": self.figure2,
            "fig3.csv": self.figure3,
            "fig4.csv": self.figure4,
            "fig5.csv": self.figure5,
            "figS3.csv": self.figure_s3,
        }
        return [write_csv(build(), self._path(name)) for name, build in figures.items()]

    # --- Verification --- #

    def _check_model(self, report: VerificationReport, prefix: str, problem: SecularProblem,
                     spectrum: BogoliubovSpectrum, coeffs: CoefficientSet) -> None:
        """Identity checks shared by the configured model and the random draws."""
        report.add(f"{prefix}secular_residual", spectrum.max_residual, TOL_SECULAR)
        strict = not np.any(spectrum.decoupled_mode >= 0)
        report.add(f"{prefix}interlacing", 0.0 if spectrum.is_interlaced(problem.omega, strict) else 1.0, 0.0)
        quadrature = oracle.quadrature_spectrum(problem)
        report.add(f"{prefix}quadrature_spectrum", float(np.max(np.abs(spectrum.Omega - quadrature) / quadrature)),
                   TOL_QUADRATURE)
        report.add(f"{prefix}coefficient_system", oracle.verify_coefficient_system(problem, spectrum, coeffs),
                   TOL_COEFFICIENT_SYSTEM)
        for name, residual in check_symplectic(coeffs).as_dict().items():
            report.add(f"{prefix}symplectic_{name}", residual, TOL_IDENTITY)
        density = spectral_density(coeffs)
        report.add(f"{prefix}sum_rule", density.sum_rule_residual, TOL_IDENTITY)

    def _fock_subproblem(self) -> SecularProblem:
        """The string modes nearest omega_0, with couplings scaled to at most FOCK_COUPLING_CAP."""
        problem = self.problem
        count = min(self.config.fock_modes, problem.n_modes)
        nearest = np.sort(np.argsort(np.abs(problem.omega - problem.omega_0), kind="stable")[:count])
        sub = SecularProblem(omega_0=problem.omega_0, omega=problem.omega[nearest], gamma=problem.gamma[nearest])
        if sub.coupling_strength > FOCK_COUPLING_CAP:
            scale = math.sqrt(FOCK_COUPLING_CAP / sub.coupling_strength)
            logger.info(f"Scaling Fock subsystem couplings by {scale:.4f} to g = {FOCK_COUPLING_CAP}")
            sub = sub.with_gamma(sub.gamma * scale)
        return sub

    def _check_fock(self, report: VerificationReport) -> None:
        sub = self._fock_subproblem()
        spectrum = solve_spectrum(sub)
        coeffs = build_coefficients(sub, spectrum)
        occupations = occupation_numbers(coeffs).n_occ
        p1 = emission_spectrum(coeffs).p1
        analytic_variance = bead_variance(coeffs, spectrum, self.scales, self.params.m).variance
        covariance = quadrature_covariance(coeffs)

        observables = {}
        for cutoff in (self.config.fock_cutoff, self.config.fock_cutoff - 2):
            if cutoff < 1:
                continue
            state = oracle.fock_ground_state(oracle.FockTruncation.from_problem(sub, cutoff))
            observables[cutoff] = np.concatenate((
                state.occupations(), state.emission_overlaps(), [state.bead_variance(self.params.m)],
            ))
            if cutoff != self.config.fock_cutoff:
                continue
            report.add("fock_ground_energy", abs(state.energy - ground_state_energy(sub, spectrum)), TOL_FOCK_ENERGY)
            report.add("fock_excitation_energies",
                       float(np.max(np.abs(state.excitation_energies()[state.single_excitations(sub.n_modes + 1)]
                                           - spectrum.Omega))), TOL_FOCK_ENERGY)
            report.add("fock_occupations", float(np.max(np.abs(state.occupations() - occupations))),
                       TOL_FOCK_OBSERVABLE)
            report.add("fock_emission", float(np.max(np.abs(state.emission_overlaps() - p1))), TOL_FOCK_OBSERVABLE)
            report.add("fock_bead_variance", abs(state.bead_variance(self.params.m) - analytic_variance),
                       TOL_FOCK_OBSERVABLE)
            report.add("fock_vacuum_overlap", abs(state.vacuum_overlap() - coeffs.ground_norm), TOL_FOCK_OBSERVABLE)
            report.add("fock_covariance", float(np.max(np.abs(state.quadrature_covariance() - covariance))),
                       TOL_FOCK_OBSERVABLE)
            report.add("fock_parity", state.parity_residual(), TOL_PARITY)
        if len(observables) == 2:
            values = list(observables.values())
            report.add("fock_cutoff_convergence", float(np.max(np.abs(values[0] - values[1]))),
                       CUTOFF_CONVERGENCE_FRACTION * TOL_FOCK_OBSERVABLE)

    def _check_random_draws(self, report: VerificationReport) -> None:
        rng = np.random.default_rng(self.config.seed)
        for draw in range(RANDOM_DRAWS):
            params = PhysicalParams.from_dimensionless(
                omega_c_ratio=float(rng.uniform(0.3, 0.95)),
                tension_ratio=float(10.0 ** rng.uniform(-1.0, 1.0)),
                n_modes=int(rng.choice(RANDOM_MODE_COUNTS)),
                omega_d_ratio=float(rng.uniform(2.0, 5.0)),
            )
            _, _, problem = build_problem(params)
            spectrum = solve_spectrum(problem)
            self._check_model(report, f"random_{draw}_", problem, spectrum, build_coefficients(problem, spectrum))

    def verify(self) -> VerificationReport:
        """
        Run the invariant suite on the configured model, random draws and the Fock oracle.

        Returns:
            VerificationReport: Every check with residual and tolerance.
        """
        report = VerificationReport()
        problem, spectrum, coeffs = self.problem, self.spectrum, self.coefficients
        if not self.params.is_decoupled:
            # relative to the size of either term of tan(k ell) = -(tau/kappa_c) k
            slope = self.modes.k * self.params.tau / self.params.kappa_c
            residuals = wavenumber_residuals(self.params, self.modes) / (1.0 + slope)
            report.add("wavenumber_residual", float(np.max(residuals)), TOL_IDENTITY)
        self._check_model(report, "", problem, spectrum, coeffs)

        if coeffs.det_M > 0:
            squeeze = squeeze_matrix(coeffs)
            report.add("squeeze_symmetry", squeeze.symmetry_residual, TOL_IDENTITY)
            report.add("squeeze_schur", squeeze.schur_residual, TOL_IDENTITY)
            report.add("squeeze_determinant", squeeze.det_residual, TOL_IDENTITY)
        else:
            report.add("squeeze_determinant", math.inf, TOL_IDENTITY)

        t_zero = displacement_trace(coeffs, spectrum, self.config.delta, np.zeros(1))
        report.add("trace_initial_displacement", abs(float(t_zero[0]) - self.config.delta), TOL_IDENTITY)
        try:
            report.add("variance_forms", bead_variance(coeffs, spectrum, self.scales, self.params.m).form_residual,
                       TOL_IDENTITY)
        except VerificationError as e:
            report.add(e.invariant, e.residual, e.tolerance)

        self._check_fock(report)
        self._check_random_draws(report)
        report.add("yurke_condition", float(np.max(yurke_check(self.scales, spectrum))))
        for check in report.failures:
            logger.error(f"Invariant {check.name} failed: residual {check.residual:.3e} > {check.tolerance:.0e}")
        return report

    def run_verify(self) -> Tuple[VerificationReport, Path]:
        """Run verify() and write verify.json."""
        report = self.verify()
        payload = {
            "passed": report.passed,
            "checks": [
                {"name": c.name, "residual": c.residual, "tolerance": c.tolerance, "passed": c.passed}
                for c in report.checks
            ],
        }
        return report, write_json(payload, self._path("verify.json"))

    # --- Sweeps --- #

    def summary(self) -> Dict[str, Any]:
        """Headline numbers of the configured model, as written per sweep point."""
        strength = coupling_strength(self.scales, self.modes)
        emission = self.emission()
        ground = self.ground_state()
        summary = {
            "g": strength.g,
            "g_inf": strength.g_inf,
            "tension_ratio": self.scales.tension_ratio,
            "omega_c_ratio": self.scales.omega_c / self.scales.omega_0,
            "n_modes": self.params.n_modes,
            "Omega_min": float(self.spectrum.Omega[0]),
            "total_p1": emission.total_p1,
            "peak_Omega": emission.peak_Omega,
            "bead_occupation": ground.bead_occupation,
            "variance_ratio": ground.variance_ratio,
            "Gamma_closed": None,
        }
        try:
            summary["Gamma_closed"] = decay_rate(self.scales).Gamma_closed
        except ResonanceNotFoundError as e:
            logger.warning(f"No continuum resonance for this sweep point: {e}")
        return summary

    def _sweep_configs(self) -> List[RunConfig]:
        sweep = self.config.sweep
        if not sweep.values:
            raise ConfigError("sweep.values is empty; nothing to sweep.")
        if self.config.parameters.kind is not ParameterKind.DIMENSIONLESS:
            raise ConfigError("Sweeps require a 'dimensionless' parameter block.")
        configs = []
        for value in sweep.values:
            if sweep.parameter is SweepParameter.G_TARGET:
                configs.append(replace(self.config, g_target=value))
            else:
                block = self.config.parameters.with_values(**{sweep.parameter.value: value})
                configs.append(replace(self.config, parameters=block))
        return configs

    def run_sweep(self) -> List[Path]:
        """
        Compute every sweep point as an independent task and write sweep_<i>.json and sweep.csv.

        Raises:
            ConfigError: If there is nothing to sweep or the parameter block is raw
        """
        tasks = [(index, config, str(self.out_dir)) for index, config in enumerate(self._sweep_configs())]
        workers = self.config.workers
        logger.info(f"Running {len(tasks)} sweep point(s) on {workers} worker(s)")
        if workers == 1:
            rows = [run_sweep_task(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                rows = list(executor.map(run_sweep_task, tasks))

        # failed points carry no summary values, so take the union of keys
        keys = sorted({key for row in rows for key in row} - {"index", "error"})
        columns: Dict[str, List[Any]] = {
            "index": [row["index"] for row in rows],
            "value": list(self.config.sweep.values),
            "error": [row["error"] for row in rows],
        }
        for key in keys:
            columns[key] = [math.nan if row.get(key) is None else row[key] for row in rows]
        paths = [self._path(f"sweep_{index}.json") for index, _, _ in tasks]
        paths.append(write_csv(columns, self._path("sweep.csv")))
        return paths


def run_sweep_task(task: Tuple[int, RunConfig, str]) -> Dict[str, Any]:
    """
    Compute one sweep point and write its JSON file.

    Failures are recorded in the row instead of aborting the sweep.

    Args:
        task: (index, configuration, output directory)

    Returns:
        Dict with the index, an error message (empty on success) and the summary values.
    """
    index, config, out_dir = task
    service = LambModelService(config, out_dir)
    try:
        summary = service.summary()
        error = ""
    except LambModelError as e:
        logger.error(f"Sweep point {index} failed: {e}")
        summary = {}
        error = str(e)
    write_json({"index": index, "error": error, **summary}, service._path(f"sweep_{index}.json"))
    return {"index": index, "error": error, **summary}
