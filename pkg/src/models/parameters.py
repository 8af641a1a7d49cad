"""
Parameter Models Module

This module defines the data models describing one bead-on-a-string system:
the raw physical constants, the secondary scales derived from them, the
string normal modes and the parameter block read from a run configuration.

All quantities use natural units with hbar = 1.

Classes:
    ParameterKind: Enumeration of the two accepted parameter block layouts
    PhysicalParams: Raw physical constants of the bead, spring and string
    DerivedScales: Frequencies and lengths derived from PhysicalParams
    StringModes: Wavenumbers, frequencies and couplings of the N string modes
    ParameterBlock: Parameter section of a run configuration
"""

import logging
import math
import numbers
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ..utils.exceptions import ConfigError, ParameterError

# Debye frequency in units of omega_0 used when neither ell nor omega_d_ratio is given
DEFAULT_OMEGA_D_RATIO = 3.0

RAW_FIELDS = ("m", "kappa", "kappa_c", "tau", "sigma", "ell", "n_modes")
DIMENSIONLESS_FIELDS = ("omega_c_ratio", "tension_ratio", "n_modes", "ell", "omega_d_ratio", "omega_0")

logger = logging.getLogger(__name__)


def _require_positive(name: str, value: float) -> None:
    if not isinstance(value, numbers.Real) or isinstance(value, bool) or not math.isfinite(value) or value <= 0:
        raise ParameterError(name, value)


def _require_mode_count(value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ParameterError("n_modes", value, "must be an integer >= 1")


class ParameterKind(Enum):
    """
    Layout of a parameter block.

    Attributes:
        RAW: Physical constants m, kappa, kappa_c, tau, sigma, ell, n_modes
        DIMENSIONLESS: Ratios omega_c/omega_0, tau/(kappa_c d), N and a length or Debye scale
    """
    RAW = "raw"
    DIMENSIONLESS = "dimensionless"


@dataclass(frozen=True)
class PhysicalParams:
    """
    Raw constants of the quantum Lamb model.

    Attributes:
        m (float): Bead mass
        kappa (float): Bead spring constant
        kappa_c (float): Coupling spring constant; 0 gives the decoupled limit
        tau (float): String tension
        sigma (float): Lineal mass density of the string
        ell (float): String length
        n_modes (int): Number of string modes N
    """

    m: float
    kappa: float
    kappa_c: float
    tau: float
    sigma: float
    ell: float
    n_modes: int

    def __post_init__(self):
        """
        Validate every field.

        Raises:
            ParameterError: If a field is non-positive, non-finite or n_modes is not an integer >= 1
        """
        for name in ("m", "kappa", "tau", "sigma", "ell"):
            _require_positive(name, getattr(self, name))
        if isinstance(self.kappa_c, bool) or not math.isfinite(self.kappa_c) or self.kappa_c < 0:
            raise ParameterError("kappa_c", self.kappa_c, "must be finite and non-negative")
        _require_mode_count(self.n_modes)

    @property
    def is_decoupled(self) -> bool:
        """True when the coupling spring is absent."""
        return self.kappa_c == 0

    @classmethod
    def from_dimensionless(
        cls,
        omega_c_ratio: float,
        tension_ratio: float,
        n_modes: int,
        ell: Optional[float] = None,
        omega_d_ratio: Optional[float] = None,
        omega_0: float = 1.0,
    ) -> "PhysicalParams":
        """
        Build raw constants from the dimensionless parameter set.

        Uses c = 1 and m = 1. The string length is either given directly (in
        units of c/omega_0) or fixed by the Debye frequency omega_d = N pi c / ell.

        Args:
            omega_c_ratio: omega_c/omega_0, in (0, 1)
            tension_ratio: tau/(kappa_c d)
            n_modes: Number of string modes N
            ell: String length in units of c/omega_0 (exclusive with omega_d_ratio)
            omega_d_ratio: omega_d/omega_0 (default 3 when ell is not given)
            omega_0: Bare bead frequency

        Returns:
            PhysicalParams: The matching raw constants.

        Raises:
            ParameterError: If a ratio is out of range
        """
        _require_positive("omega_0", omega_0)
        _require_positive("omega_c_ratio", omega_c_ratio)
        if omega_c_ratio >= 1:
            raise ParameterError("omega_c_ratio", omega_c_ratio, "must be below 1 so that kappa > 0")
        _require_positive("tension_ratio", tension_ratio)
        _require_mode_count(n_modes)
        if ell is not None and omega_d_ratio is not None:
            raise ParameterError("ell", ell, "give either ell or omega_d_ratio, not both")

        c = 1.0
        m = 1.0
        kappa_c = m * (omega_c_ratio * omega_0) ** 2
        kappa = m * omega_0 ** 2 - kappa_c
        if ell is None:
            ratio = DEFAULT_OMEGA_D_RATIO if omega_d_ratio is None else omega_d_ratio
            _require_positive("omega_d_ratio", ratio)
            length = n_modes * math.pi * c / (ratio * omega_0)
        else:
            _require_positive("ell", ell)
            length = ell * c / omega_0
        d = length / n_modes
        tau = tension_ratio * kappa_c * d
        sigma = tau / c ** 2
        return cls(m=m, kappa=kappa, kappa_c=kappa_c, tau=tau, sigma=sigma, ell=length, n_modes=int(n_modes))


@dataclass(frozen=True)
class DerivedScales:
    """
    Secondary scales of the model.

    Attributes:
        omega_0 (float): Dressed bead frequency sqrt((kappa + kappa_c)/m)
        omega_b (float): Bare bead frequency sqrt(kappa/m)
        omega_c (float): Coupling frequency sqrt(kappa_c/m)
        c (float): Wave speed sqrt(tau/sigma)
        nu (float): Classical damping rate tau/(2 m c)
        k_s (float): Spring wavenumber kappa_c/tau
        omega_s (float): Spring frequency c k_s
        d (float): Bead spacing ell/N
        omega_d (float): Debye frequency N pi c / ell
        dos (float): Density of string states ell/(pi c)
    """

    omega_0: float
    omega_b: float
    omega_c: float
    c: float
    nu: float
    k_s: float
    omega_s: float
    d: float
    omega_d: float
    dos: float

    def __post_init__(self):
        for name in ("omega_0", "c", "d", "omega_d", "dos"):
            _require_positive(name, getattr(self, name))
        for name in ("omega_b", "omega_c", "nu", "k_s", "omega_s"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(name, value, "must be finite and non-negative")

    @property
    def ell(self) -> float:
        """String length recovered from the density of states."""
        return math.pi * self.c * self.dos

    @property
    def tension_ratio(self) -> float:
        """tau/(kappa_c d), infinite in the decoupled limit."""
        if self.omega_s == 0:
            return math.inf
        # tau/(kappa_c d) = 1/(k_s d)
        return self.c / (self.omega_s * self.d)


@dataclass(frozen=True)
class StringModes:
    """
    Normal modes of the string with the bead clamped at rest.

    Attributes:
        k (np.ndarray): Ascending wavenumbers k_n
        omega (np.ndarray): Frequencies c k_n
        gamma (Optional[np.ndarray]): Couplings gamma_n, None until computed
        a_norm (Optional[np.ndarray]): Normalisation constants A_n, None until computed
    """

    k: np.ndarray
    omega: np.ndarray
    gamma: Optional[np.ndarray] = None
    a_norm: Optional[np.ndarray] = None

    def __post_init__(self):
        """
        Validate shapes and ordering.

        Raises:
            ParameterError: If array lengths differ or k is not strictly increasing
        """
        k = np.asarray(self.k, dtype=float)
        if k.ndim != 1 or k.size == 0:
            raise ParameterError("k", self.k, "must be a non-empty 1-D array")
        if np.any(np.diff(k) <= 0):
            raise ParameterError("k", self.k, "must be strictly increasing")
        if np.shape(self.omega) != k.shape:
            raise ParameterError("omega", self.omega, f"must have length {k.size}")
        for name in ("gamma", "a_norm"):
            value = getattr(self, name)
            if value is not None and np.shape(value) != k.shape:
                raise ParameterError(name, value, f"must have length {k.size}")

    @property
    def n_modes(self) -> int:
        return int(np.size(self.k))

    def with_gammas(self, gamma: np.ndarray, a_norm: Optional[np.ndarray] = None) -> "StringModes":
        """Return a copy with the couplings (and optionally A_n) filled in."""
        return replace(self, gamma=np.asarray(gamma, dtype=float),
                       a_norm=self.a_norm if a_norm is None else np.asarray(a_norm, dtype=float))


@dataclass
class ParameterBlock:
    """
    Parameter section of a run configuration.

    Attributes:
        kind (ParameterKind): Which layout the values follow
        values (Dict[str, Any]): Field values for that layout
    """

    kind: ParameterKind
    values: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        """
        Check that the values match the layout.

        Raises:
            ConfigError: If keys are unknown or required keys are missing
        """
        allowed = RAW_FIELDS if self.kind is ParameterKind.RAW else DIMENSIONLESS_FIELDS
        unknown = sorted(set(self.values) - set(allowed))
        if unknown:
            raise ConfigError(f"Unknown {self.kind.value} parameter(s): {', '.join(unknown)}")
        if self.kind is ParameterKind.RAW:
            required = RAW_FIELDS
        else:
            required = ("omega_c_ratio", "tension_ratio", "n_modes")
        missing = [name for name in required if name not in self.values]
        if missing:
            raise ConfigError(f"Missing {self.kind.value} parameter(s): {', '.join(missing)}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ParameterBlock":
        """
        Build a block from a configuration mapping holding exactly one of 'raw' or 'dimensionless'.

        Raises:
            ConfigError: If neither or both blocks are present
        """
        present = [kind for kind in ParameterKind if kind.value in data]
        if len(present) != 1:
            raise ConfigError("Exactly one of 'raw' or 'dimensionless' parameter blocks must be given.")
        kind = present[0]
        values = data[kind.value]
        if not isinstance(values, dict):
            raise ConfigError(f"The '{kind.value}' parameter block must be a JSON object.")
        return cls(kind=kind, values=dict(values))

    @property
    def n_modes(self) -> int:
        return self.values["n_modes"]

    def with_values(self, **updates: Any) -> "ParameterBlock":
        """Return a copy with some values overridden."""
        values = dict(self.values)
        values.update(updates)
        return ParameterBlock(kind=self.kind, values=values)

    def to_params(self) -> PhysicalParams:
        """
        Convert the block into validated physical constants.

        Raises:
            ParameterError: If a value fails validation
        """
        if self.kind is ParameterKind.RAW:
            return PhysicalParams(**{name: self.values[name] for name in RAW_FIELDS})
        return PhysicalParams.from_dimensionless(
            omega_c_ratio=self.values["omega_c_ratio"],
            tension_ratio=self.values["tension_ratio"],
            n_modes=self.values["n_modes"],
            ell=self.values.get("ell"),
            omega_d_ratio=self.values.get("omega_d_ratio"),
            omega_0=self.values.get("omega_0", 1.0),
        )
