"""
Spectrum Models Module

This module defines the inputs and outputs of the secular-equation solve:
the problem statement (bead frequency, string frequencies and couplings) and
the resulting Bogoliubov spectrum.

Classes:
    SecularProblem: Bead frequency plus string frequencies and couplings
    BogoliubovSpectrum: The N+1 Bogoliubov frequencies with their brackets
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..utils.exceptions import ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SecularProblem:
    """
    Statement of the secular equation for one parameter set.

    Attributes:
        omega_0 (float): Dressed bead frequency
        omega (np.ndarray): Strictly increasing string frequencies omega_n
        gamma (np.ndarray): Couplings gamma_n (any sign)
    """

    omega_0: float
    omega: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        """
        Validate the arrays.

        Raises:
            ParameterError: If lengths differ, frequencies are not positive and increasing,
                or a coupling is not finite
        """
        if not np.isfinite(self.omega_0) or self.omega_0 <= 0:
            raise ParameterError("omega_0", self.omega_0)
        omega = np.asarray(self.omega, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        if omega.ndim != 1 or omega.size == 0:
            raise ParameterError("omega", self.omega, "must be a non-empty 1-D array")
        if gamma.shape != omega.shape:
            raise ParameterError("gamma", self.gamma, f"must have length {omega.size}")
        if omega[0] <= 0 or np.any(np.diff(omega) <= 0):
            raise ParameterError("omega", self.omega, "must be positive and strictly increasing")
        if not np.all(np.isfinite(gamma)):
            raise ParameterError("gamma", self.gamma, "must be finite")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n_modes(self) -> int:
        return int(self.omega.size)

    @property
    def coupling_strength(self) -> float:
        """g = (4/omega_0) sum gamma_n^2/omega_n."""
        return float(4.0 / self.omega_0 * np.sum(self.gamma ** 2 / self.omega))

    @property
    def uncoupled_frequencies(self) -> np.ndarray:
        """Bead and string frequencies (omega_0, omega_1, ..., omega_N) sorted ascending."""
        return np.sort(np.concatenate(([self.omega_0], self.omega)))

    def with_gamma(self, gamma: np.ndarray) -> "SecularProblem":
        return replace(self, gamma=np.asarray(gamma, dtype=float))


@dataclass(frozen=True)
class BogoliubovSpectrum:
    """
    Solution of the secular equation.

    Row alpha of every array refers to the alpha-th Bogoliubov frequency in
    ascending order.

    Attributes:
        Omega (np.ndarray): N+1 ascending Bogoliubov frequencies
        brackets (np.ndarray): (N+1, 2) bracketing intervals in x = Omega^2
        residuals (np.ndarray): Secular-function residual at each root, relative to omega_0^2
        gap (np.ndarray): (N+1, N) matrix Omega_alpha^2 - omega_q^2, kept exact near poles
        g (float): Coupling strength of the problem
        decoupled_mode (np.ndarray): String index q for rows that are exactly
            decoupled string modes (gamma_q = 0), -1 otherwise
    """

    Omega: np.ndarray
    brackets: np.ndarray
    residuals: np.ndarray
    gap: np.ndarray
    g: float
    decoupled_mode: Optional[np.ndarray] = None

    def __post_init__(self):
        size = np.size(self.Omega)
        if np.shape(self.brackets) != (size, 2):
            raise ParameterError("brackets", np.shape(self.brackets), f"must have shape ({size}, 2)")
        if np.shape(self.residuals) != (size,):
            raise ParameterError("residuals", np.shape(self.residuals), f"must have length {size}")
        if np.shape(self.gap) != (size, size - 1):
            raise ParameterError("gap", np.shape(self.gap), f"must have shape ({size}, {size - 1})")
        if self.decoupled_mode is None:
            object.__setattr__(self, "decoupled_mode", np.full(size, -1, dtype=int))

    @property
    def size(self) -> int:
        return int(np.size(self.Omega))

    @property
    def x(self) -> np.ndarray:
        """Squared frequencies Omega_alpha^2."""
        return self.Omega ** 2

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals)))

    def is_interlaced(self, omega: np.ndarray, strict: bool = True) -> bool:
        """
        Check 0 < Omega_0 < omega_1 < Omega_1 < ... < omega_N < Omega_N.

        With strict=False equalities are allowed, as happens for string modes
        whose coupling vanishes.
        """
        merged = np.empty(2 * self.size - 1)
        merged[0::2] = self.Omega
        merged[1::2] = omega
        steps = np.diff(merged)
        ordered = np.all(steps > 0) if strict else np.all(steps >= 0)
        return bool(self.Omega[0] > 0 and ordered)

    def with_shift(self, index: int, delta: float) -> "BogoliubovSpectrum":
        """
        Return a copy with one frequency moved by delta.

        The gap row is updated consistently. Used to measure how sensitive the
        coefficient identities are to an inexact root.
        """
        Omega = self.Omega.copy()
        gap = self.gap.copy()
        old = Omega[index]
        Omega[index] = old + delta
        gap[index] += (2.0 * old + delta) * delta
        logger.debug(f"Shifted Omega[{index}] by {delta:.3e}")
        return replace(self, Omega=Omega, gap=gap)
