"""
Run Configuration Module

This module defines the configuration of one LambQ run and how it is loaded
from JSON. Missing keys fall back to DEFAULT_RUN_SETTINGS; command-line flags
are applied on top by the CLI through RunConfig.with_overrides.

Classes:
    SweepParameter: Enumeration of the quantities a sweep can vary
    SweepSettings: Sweep definition (parameter and values)
    RunConfig: Complete configuration of a run

Functions:
    run_config_decoder: JSON decoder hook for configuration files
    config_from_dict: Assemble a RunConfig from a decoded mapping
    load_run_config: Load a RunConfig from a JSON file, filling defaults
"""

import copy
import json
import logging
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional

from ..utils.exceptions import ConfigError
from .parameters import ParameterBlock, ParameterKind

logger = logging.getLogger(__name__)

# Defaults used for every key the configuration file leaves out
DEFAULT_RUN_SETTINGS: Dict[str, Any] = {
    "parameters": {
        "dimensionless": {
            "omega_c_ratio": 0.95,
            "tension_ratio": 1.0,
            "n_modes": 15,
            "omega_d_ratio": 3.0,
        }
    },
    "g_target": None,
    "seed": 0,
    "perturb": 0.0,
    "trace": {"t_max": None, "n_points": 4096, "delta": 1.0},
    "fock": {"n_modes": 2, "cutoff": 12},
    "figures": {
        "fig2_points": 200,
        "fig2_omega_c_ratios": [0.5, 0.7, 0.9],
        "n_modes": 15,
        "g": 0.7,
        "fig4_g": [0.4, 0.6],
        "fig4_n_modes": 200,
        "figS3_omega_d_bars": [3.5, 7.0, 30.0],
        "figS3_nu_max": 2.0,
        "figS3_points": 101,
    },
    "sweep": {"parameter": "g_target", "values": []},
    "workers": 1,
}


class SweepParameter(Enum):
    """
    Quantity varied across a sweep.

    Attributes:
        G_TARGET: Coupling strength g (tension ratio solved per point)
        TENSION_RATIO: tau/(kappa_c d)
        OMEGA_C_RATIO: omega_c/omega_0
    """
    G_TARGET = "g_target"
    TENSION_RATIO = "tension_ratio"
    OMEGA_C_RATIO = "omega_c_ratio"


@dataclass(frozen=True)
class SweepSettings:
    """
    Definition of a parameter sweep.

    Attributes:
        parameter (SweepParameter): Quantity varied
        values (List[float]): Values visited, one task per value
    """

    parameter: SweepParameter = SweepParameter.G_TARGET
    values: List[float] = field(default_factory=list)


@dataclass(frozen=True)
class RunConfig:
    """
    Configuration of one LambQ run.

    Attributes:
        parameters (ParameterBlock): Raw or dimensionless parameter block
        out_dir (Optional[str]): Output directory from the file or --out
        g_target (Optional[float]): Requested coupling strength, solved through the tension ratio
        seed (int): Seed for randomized checks
        perturb (float): Shift applied to Omega_0 before coefficients are built, to exercise the checks
        t_max (Optional[float]): End of the displacement time grid
        n_time (int): Number of time samples
        delta (float): Initial bead displacement
        fock_modes (int): String modes kept in the Fock oracle
        fock_cutoff (int): Boson number cap per mode in the Fock oracle
        figures (Dict[str, Any]): Figure data options
        sweep (SweepSettings): Sweep definition
        workers (int): Process pool size for sweeps
    """

    parameters: ParameterBlock
    out_dir: Optional[str] = None
    g_target: Optional[float] = None
    seed: int = 0
    perturb: float = 0.0
    t_max: Optional[float] = None
    n_time: int = 4096
    delta: float = 1.0
    fock_modes: int = 2
    fock_cutoff: int = 12
    figures: Dict[str, Any] = field(default_factory=lambda: copy.deepcopy(DEFAULT_RUN_SETTINGS["figures"]))
    sweep: SweepSettings = field(default_factory=SweepSettings)
    workers: int = 1

    def __post_init__(self):
        """
        Validate option ranges.

        Raises:
            ConfigError: If an option is out of range or inconsistent with the parameter block
        """
        if self.g_target is not None:
            if not 0 < self.g_target < 1:
                raise ConfigError(f"g_target must lie in (0, 1), got {self.g_target!r}.")
            if self.parameters.kind is not ParameterKind.DIMENSIONLESS:
                raise ConfigError("g_target requires a 'dimensionless' parameter block.")
        if self.n_time < 2:
            raise ConfigError(f"trace.n_points must be at least 2, got {self.n_time!r}.")
        if self.t_max is not None and not self.t_max > 0:
            raise ConfigError(f"trace.t_max must be positive, got {self.t_max!r}.")
        if not 1 <= self.fock_modes <= 3:
            raise ConfigError(f"fock.n_modes must be between 1 and 3, got {self.fock_modes!r}.")
        if self.fock_cutoff < 1:
            raise ConfigError(f"fock.cutoff must be at least 1, got {self.fock_cutoff!r}.")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers!r}.")

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """
        Apply command-line overrides; None values are ignored.

        'n_modes' is routed into the parameter block.
        """
        overrides = {key: value for key, value in overrides.items() if value is not None}
        n_modes = overrides.pop("n_modes", None)
        parameters = self.parameters
        if n_modes is not None:
            parameters = parameters.with_values(n_modes=n_modes)
        return replace(self, parameters=parameters, **overrides)


def run_config_decoder(dct: Dict[str, Any]) -> Dict[str, Any]:
    """
    JSON decoder hook for configuration files.

    Converts the sweep parameter name into a SweepParameter. Unknown names
    are left as strings and rejected when the RunConfig is assembled.

    Args:
        dct: Dictionary decoded from JSON

    Returns:
        The dictionary with typed values.
    """
    if "parameter" in dct and isinstance(dct["parameter"], str):
        try:
            dct["parameter"] = SweepParameter(dct["parameter"])
        except ValueError:
            logger.warning(f"Unknown sweep parameter '{dct['parameter']}' found.")
    return dct


def _merged_section(loaded: Dict[str, Any], key: str) -> Dict[str, Any]:
    section = copy.deepcopy(DEFAULT_RUN_SETTINGS[key])
    value = loaded.get(key)
    if value is None:
        logger.info(f"No '{key}' section in configuration; using defaults.")
        return section
    if not isinstance(value, dict):
        raise ConfigError(f"The '{key}' section must be a JSON object.")
    section.update(value)
    return section


def config_from_dict(loaded: Dict[str, Any]) -> RunConfig:
    """
    Assemble a RunConfig from a decoded configuration mapping.

    Args:
        loaded: Mapping as read from JSON

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ConfigError: If a section is malformed
    """
    if not isinstance(loaded, dict):
        raise ConfigError("The configuration file must hold a JSON object.")
    known = set(DEFAULT_RUN_SETTINGS) | {"out_dir"}
    unknown = sorted(set(loaded) - known)
    if unknown:
        raise ConfigError(f"Unknown configuration key(s): {', '.join(unknown)}")

    if "parameters" not in loaded:
        logger.info("No 'parameters' section in configuration; using default dimensionless parameters.")
    parameters = ParameterBlock.from_dict(loaded.get("parameters") or copy.deepcopy(DEFAULT_RUN_SETTINGS["parameters"]))

    trace = _merged_section(loaded, "trace")
    fock = _merged_section(loaded, "fock")
    figures = _merged_section(loaded, "figures")
    sweep_section = _merged_section(loaded, "sweep")
    sweep_parameter = sweep_section.get("parameter")
    if isinstance(sweep_parameter, str):
        sweep_parameter = run_config_decoder({"parameter": sweep_parameter})["parameter"]
    if not isinstance(sweep_parameter, SweepParameter):
        raise ConfigError(f"Unknown sweep parameter {sweep_parameter!r}.")
    values = sweep_section.get("values") or []
    if not isinstance(values, list):
        raise ConfigError("sweep.values must be a list of numbers.")

    try:
        return RunConfig(
            parameters=parameters,
            out_dir=loaded.get("out_dir"),
            g_target=loaded.get("g_target", DEFAULT_RUN_SETTINGS["g_target"]),
            seed=int(loaded.get("seed", DEFAULT_RUN_SETTINGS["seed"])),
            perturb=float(loaded.get("perturb", DEFAULT_RUN_SETTINGS["perturb"])),
            t_max=trace["t_max"],
            n_time=int(trace["n_points"]),
            delta=float(trace["delta"]),
            fock_modes=int(fock["n_modes"]),
            fock_cutoff=int(fock["cutoff"]),
            figures=figures,
            sweep=SweepSettings(parameter=sweep_parameter, values=[float(v) for v in values]),
            workers=int(loaded.get("workers", DEFAULT_RUN_SETTINGS["workers"])),
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"Invalid configuration value: {e}") from e


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """
    Load a run configuration, falling back to defaults.

    Args:
        path: JSON configuration file; None gives the default configuration

    Returns:
        RunConfig: The loaded configuration.

    Raises:
        ConfigError: If the file is missing, unreadable or invalid
    """
    if path is None:
        logger.info("No configuration file given; using default run settings.")
        return config_from_dict({})
    if not os.path.exists(path):
        logger.error(f"Configuration file {path} does not exist.")
        raise ConfigError(f"Configuration file not found: {path}")
    try:
        with open(path, "r") as f:
            loaded = json.load(f, object_hook=run_config_decoder)
    except (json.JSONDecodeError, IOError) as e:
        logger.error(f"Error loading configuration from {path}: {e}")
        raise ConfigError(f"Could not read configuration {path}: {e}") from e
    return config_from_dict(loaded)
