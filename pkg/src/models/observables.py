"""
Observable Models Module

This module defines the reports produced by the observables service: ground
state occupations and variance, the spectral density of the bead response,
the decay report and the single-bogoliubon emission spectrum.

Classes:
    GroundStateReport: Occupations of the uncoupled modes and bead variance
    SpectralDensity: Weights rho(Omega_alpha) with sum rule and width
    EnvelopeFit: Exponential fit of the bead displacement envelope
    DecayReport: Resonance data and the decay rates derived from it
    EmissionSpectrum: Single-bogoliubon emission probabilities
    InvariantCheck: One verified invariant with its residual and tolerance
    VerificationReport: Collection of invariant checks
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass(frozen=True)
class GroundStateReport:
    """
    Ground-state expectation values.

    Attributes:
        n_occ (np.ndarray): Occupation n_alpha of uncoupled mode alpha (0 = bead)
        total_occ (float): Sum of n_alpha
        variance_u0 (Optional[float]): Bead position variance <u_0^2>
        variance_ratio (Optional[float]): variance_u0 relative to 1/(2 m omega_0)
        string_balance (float): Total string occupation divided by bead occupation
            (nan when the bead occupation vanishes)
    """

    n_occ: np.ndarray
    total_occ: float
    variance_u0: Optional[float] = None
    variance_ratio: Optional[float] = None
    string_balance: float = float("nan")

    @property
    def bead_occupation(self) -> float:
        return float(self.n_occ[0])

    @property
    def string_occupation(self) -> float:
        return float(np.sum(self.n_occ[1:]))


@dataclass(frozen=True)
class SpectralDensity:
    """
    Spectral density of the bead displacement.

    Attributes:
        Omega (np.ndarray): Bogoliubov frequencies the weights sit on
        rho (np.ndarray): Weights U_0a^2 - V_0a^2
        sum_rule_residual (float): |sum rho - 1|
        hwhm (float): Half width at half maximum of rho per unit frequency; Gamma for a Lorentzian line
        fwhm (float): Full width at half maximum (nan if a crossing is missing)
        peak_Omega (float): Frequency of the density maximum
    """

    Omega: np.ndarray
    rho: np.ndarray
    sum_rule_residual: float
    hwhm: float
    fwhm: float
    peak_Omega: float


@dataclass(frozen=True)
class EnvelopeFit:
    """
    Least-squares fit of ln|extremum| against time.

    Attributes:
        Gamma (float): Fitted amplitude decay rate
        intercept (float): Fitted log amplitude at t = 0
        n_points (int): Number of extrema used
        t_window (float): Upper end of the fitted time window
    """

    Gamma: float
    intercept: float
    n_points: int
    t_window: float


@dataclass(frozen=True)
class DecayReport:
    """
    Resonance and decay-rate data for one parameter set.

    Attributes:
        x_r (float): Root of x = g(x) in the continuum band
        omega_r (float): sqrt(x_r)
        h_r (float): h(x_r)/(1 - g'(x_r))
        Gamma_r (float): sqrt(h_r)
        Gamma_closed (float): Closed-form amplitude decay rate
        Gamma_fit (Optional[float]): Rate fitted from the discrete displacement trace
        Gamma_gr (float): Golden-rule energy decay rate 2 nu
        Gamma_gr_finite (float): Golden-rule rate 2 pi J(omega_0) at finite spring stiffness
        theta_0 (float): arctan(Gamma_r^2/omega_r^2)
        nu (float): Classical damping rate
        fit_points (int): Number of extrema in the envelope fit (0 when not fitted)
    """

    x_r: float
    omega_r: float
    h_r: float
    Gamma_r: float
    Gamma_closed: float
    Gamma_fit: Optional[float]
    Gamma_gr: float
    Gamma_gr_finite: float
    theta_0: float
    nu: float
    fit_points: int = 0


@dataclass(frozen=True)
class EmissionSpectrum:
    """
    Probabilities of emitting exactly one bogoliubon after a vibron is created.

    Attributes:
        Omega (np.ndarray): Bogoliubov frequencies
        p1 (np.ndarray): P_1(Omega_alpha)
        total_p1 (float): Sum of p1
        peak_alpha (int): Index of the largest p1
        multi_quantum_weight (float): 1 - total_p1
    """

    Omega: np.ndarray
    p1: np.ndarray
    total_p1: float
    peak_alpha: int
    multi_quantum_weight: float

    @property
    def peak_Omega(self) -> float:
        return float(self.Omega[self.peak_alpha])


@dataclass(frozen=True)
class InvariantCheck:
    """
    One invariant checked by the verification suite.

    Attributes:
        name (str): Invariant name
        residual (float): Measured residual
        tolerance (Optional[float]): Bound the residual must stay under; None for diagnostics
    """

    name: str
    residual: float
    tolerance: Optional[float] = None

    @property
    def passed(self) -> bool:
        # nan residuals fail
        return self.tolerance is None or bool(self.residual <= self.tolerance)


@dataclass
class VerificationReport:
    """Invariant checks collected by one verification run."""

    checks: List[InvariantCheck] = field(default_factory=list)

    def add(self, name: str, residual: float, tolerance: Optional[float] = None) -> InvariantCheck:
        check = InvariantCheck(name=name, residual=float(residual), tolerance=tolerance)
        self.checks.append(check)
        return check

    @property
    def failures(self) -> List[InvariantCheck]:
        return [check for check in self.checks if not check.passed]

    @property
    def passed(self) -> bool:
        return not self.failures
