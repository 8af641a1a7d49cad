"""
Observables Service Module

This module computes the physical observables of the coupled system from its
Bogoliubov coefficients: ground-state occupations and bead variance, the
bead displacement after a sudden offset, the spectral density of that
response, the single-bogoliubon emission spectrum, and the decay rate of the
bead in the quasicontinuum limit.

In the quasicontinuum limit the couplings become the density
J(omega) = nu omega_s^2 omega / (pi omega_0 (omega^2 + omega_s^2)) on (0, omega_d),
and the decay follows from the functions

    g(x) = omega_0^2 + 4 omega_0 PV int J(omega) omega / (x - omega^2) d omega
    h(x) = 2 pi omega_0 J(sqrt(x))

evaluated in closed form by ContinuumFunctions.

Classes:
    VarianceResult: Bead variance, its ratio and the agreement of the two sums
    ContinuumFunctions: g(x), g'(x), h(x) and J(omega) of the quasicontinuum string

Functions:
    occupation_numbers: Occupations n_alpha of the uncoupled modes
    bead_variance: Ground-state bead position variance
    relative_variance: Closed-form variance ratio R of the continuum model
    default_time_grid: Time grid resolving carrier and envelope
    displacement_trace: Mean bead displacement after an initial offset
    spectral_density: Weights rho(Omega_alpha) with sum rule and width
    continuum_functions: ContinuumFunctions for a set of scales
    fit_envelope: Exponential fit to the extrema of a decaying oscillation
    decay_rate: Resonance, closed-form, fitted and golden-rule decay rates
    emission_spectrum: Single-bogoliubon emission probabilities
    quadrature_covariance: Ground-state covariance of the uncoupled quadratures
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import lu_solve

from ..models.bogoliubov import TOL_IDENTITY, CoefficientSet
from ..models.observables import DecayReport, EmissionSpectrum, EnvelopeFit, GroundStateReport, SpectralDensity
from ..models.parameters import DerivedScales
from ..models.spectrum import BogoliubovSpectrum
from ..utils.exceptions import (DomainError, ResonanceNotFoundError, RootNotFoundError, SingularMatrixError,
                                VerificationError)
from ..utils.root_finding import bracketed_root, first_rising_crossing

DEFAULT_TIME_POINTS = 4096
# Time span of the default grid, in units of 1/nu (or 1/omega_0 when nu = 0)
TRACE_SPAN_DAMPED = 10.0
TRACE_SPAN_UNDAMPED = 200.0
# Envelope fit covers this many e-folds, and at most this fraction of the recurrence time
FIT_E_FOLDS = 5.0
FIT_RECURRENCE_FRACTION = 0.25
SAMPLES_PER_PERIOD = 32
MIN_FIT_POINTS = 3
# Samples used to locate the resonance crossing inside the band
RESONANCE_SCAN_POINTS = 4001
BAND_EDGE_GUARD = 1e-9
TOL_RESONANCE = 1e-12

logger = logging.getLogger(__name__)


class VarianceResult(NamedTuple):
    """Bead variance, its ratio to 1/(2 m omega_0) and the relative disagreement of the two sums."""
    variance: float
    ratio: float
    form_residual: float


def occupation_numbers(coeffs: CoefficientSet) -> GroundStateReport:
    """
    Ground-state occupation of each uncoupled mode, n_alpha = sum_beta N_beta_alpha^2.

    Index 0 is the bead, 1..N the string modes. The ratio of string to bead
    occupation is reported as string_balance.

    Args:
        coeffs: Coefficient set

    Returns:
        GroundStateReport: n_occ, total_occ and string_balance (variance fields unset).
    """
    n_occ = np.sum(coeffs.N_mat ** 2, axis=0)
    bead = float(n_occ[0])
    balance = float(np.sum(n_occ[1:]) / bead) if bead > 0 else float("nan")
    return GroundStateReport(n_occ=n_occ, total_occ=float(np.sum(n_occ)), string_balance=balance)


def bead_variance(
    coeffs: CoefficientSet, spectrum: BogoliubovSpectrum, scales: DerivedScales, mass: float = 1.0
) -> VarianceResult:
    """
    Ground-state variance of the bead position.

    Evaluated both as (1/(2 m omega_0)) sum_alpha (M_a0 - N_a0)^2 and as
    (1/(2 m)) sum_alpha 1/(Omega_alpha D_alpha^2); the two must agree.

    Args:
        coeffs: Coefficient set
        spectrum: Solved spectrum
        scales: Derived scales
        mass: Bead mass

    Returns:
        VarianceResult: (variance, ratio to the undamped value, relative disagreement)

    Raises:
        VerificationError: If the two sums disagree beyond the identity tolerance
    """
    omega_0 = scales.omega_0
    coefficient_sum = float(np.sum((coeffs.M[:, 0] - coeffs.N_mat[:, 0]) ** 2))
    frequency_sum = omega_0 * float(np.sum(1.0 / (spectrum.Omega * coeffs.norm_factors ** 2)))
    residual = abs(coefficient_sum - frequency_sum) / frequency_sum
    if residual > TOL_IDENTITY:
        raise VerificationError("bead_variance_forms", residual, TOL_IDENTITY)
    return VarianceResult(variance=coefficient_sum / (2.0 * mass * omega_0), ratio=coefficient_sum,
                          form_residual=residual)


def relative_variance(nu_bar: float, omega_d_bar: float) -> float:
    """
    Continuum bead variance relative to the undamped oscillator.

    R = (1/pi) (arctan((omega_d_bar^2 - 1)/(2 nu_bar)) + arctan(1/(2 nu_bar)))
    with nu_bar = nu/omega_r and omega_d_bar = omega_d/omega_r; R(0) = 1.

    Args:
        nu_bar: Reduced damping, >= 0
        omega_d_bar: Reduced Debye frequency, > 1

    Returns:
        R

    Raises:
        DomainError: If nu_bar < 0 or omega_d_bar <= 1
    """
    if omega_d_bar <= 1:
        raise DomainError(f"omega_d_bar must exceed 1, got {omega_d_bar!r}.")
    if nu_bar < 0:
        raise DomainError(f"nu_bar must be non-negative, got {nu_bar!r}.")
    return (math.atan2(omega_d_bar ** 2 - 1.0, 2.0 * nu_bar) + math.atan2(1.0, 2.0 * nu_bar)) / math.pi


def default_time_grid(scales: DerivedScales, n_points: int = DEFAULT_TIME_POINTS,
                      t_max: Optional[float] = None) -> np.ndarray:
    """Uniform grid on [0, t_max]; t_max defaults to 10/nu, or 200/omega_0 without damping."""
    if t_max is None:
        t_max = TRACE_SPAN_DAMPED / scales.nu if scales.nu > 0 else TRACE_SPAN_UNDAMPED / scales.omega_0
    return np.linspace(0.0, t_max, n_points)


def displacement_trace(
    coeffs: CoefficientSet, spectrum: BogoliubovSpectrum, delta: float, t_grid: np.ndarray
) -> np.ndarray:
    """
    Mean bead displacement <u_0(t)> after the bead starts displaced by delta.

    <u_0(t)> = delta sum_alpha rho_alpha cos(Omega_alpha t), with rho taken
    both from the coefficients (U_0a^2 - V_0a^2) and from 1/D_alpha^2.

    Args:
        coeffs: Coefficient set
        spectrum: Solved spectrum
        delta: Initial displacement
        t_grid: Ascending finite sample times

    Returns:
        Array of displacements on t_grid.

    Raises:
        VerificationError: If the two forms disagree beyond the identity tolerance
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if not np.all(np.isfinite(t_grid)) or np.any(np.diff(t_grid) < 0):
        raise DomainError("t_grid must be finite and ascending.")
    rho = coeffs.M[:, 0] ** 2 - coeffs.N_mat[:, 0] ** 2
    carriers = np.cos(np.outer(t_grid, spectrum.Omega))
    trace = delta * (carriers @ rho)
    second = delta * (carriers @ (1.0 / coeffs.norm_factors ** 2))
    residual = float(np.max(np.abs(trace - second))) if trace.size else 0.0
    if residual > TOL_IDENTITY * max(1.0, abs(delta)):
        raise VerificationError("displacement_trace_forms", residual, TOL_IDENTITY)
    return trace


def _half_max_crossing(Omega: np.ndarray, density: np.ndarray, peak: int, step: int) -> float:
    half = 0.5 * density[peak]
    i = peak
    while 0 <= i + step < density.size:
        j = i + step
        if density[j] < half:
            fraction = (density[i] - half) / (density[i] - density[j])
            return float(Omega[i] + fraction * (Omega[j] - Omega[i]))
        i = j
    return float("nan")


def spectral_density(coeffs: CoefficientSet) -> SpectralDensity:
    """
    Spectral density of the bead response, rho_alpha = U_0a^2 - V_0a^2.

    The weights sum to one. The width is measured on the density
    rho_alpha / dOmega_alpha, interpolating linearly between frequencies
    around the half-maximum crossings.

    Args:
        coeffs: Coefficient set

    Returns:
        SpectralDensity: Weights, sum-rule residual, half and full width at half maximum.
    """
    Omega = coeffs.Omega
    rho = coeffs.U[0] ** 2 - coeffs.V[0] ** 2
    residual = abs(float(np.sum(rho)) - 1.0)

    mask = np.isfinite(coeffs.norm_factors)
    grid = Omega[mask]
    fwhm = float("nan")
    peak_Omega = float(Omega[int(np.argmax(rho))])
    if grid.size >= 2:
        density = rho[mask] / np.gradient(grid)
        peak = int(np.argmax(density))
        peak_Omega = float(grid[peak])
        left = _half_max_crossing(grid, density, peak, -1)
        right = _half_max_crossing(grid, density, peak, +1)
        fwhm = right - left
        if math.isnan(fwhm):
            logger.warning("Spectral density has no half-maximum crossing on one side; width undefined")
    return SpectralDensity(
        Omega=Omega,
        rho=rho,
        sum_rule_residual=residual,
        hwhm=0.5 * fwhm,
        fwhm=fwhm,
        peak_Omega=peak_Omega,
    )


@dataclass(frozen=True)
class ContinuumFunctions:
    """
    Closed forms of the quasicontinuum string.

    Attributes:
        omega_0 (float): Bead frequency
        nu (float): Classical damping rate
        omega_s (float): Spring frequency
        omega_d (float): Debye frequency (upper band edge)
    """

    omega_0: float
    nu: float
    omega_s: float
    omega_d: float

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0) or np.any(x >= self.omega_d ** 2):
            raise DomainError(f"x must lie in (0, omega_d^2) = (0, {self.omega_d ** 2:.6g}).")
        return x

    def density(self, omega):
        """Coupling density J(omega) = nu omega_s^2 omega / (pi omega_0 (omega^2 + omega_s^2))."""
        omega = np.asarray(omega, dtype=float)
        return self.nu * self.omega_s ** 2 * omega / (math.pi * self.omega_0 * (omega ** 2 + self.omega_s ** 2))

    def _principal_part(self, x: np.ndarray):
        a, w = self.omega_s, self.omega_d
        root = np.sqrt(x)
        log_term = np.log((w + root) / (w - root))
        numerator = -a * math.atan2(w, a) + 0.5 * root * log_term
        return numerator, log_term, root

    def g(self, x):
        """g(x) = omega_0^2 + (4 nu omega_s^2/pi) I(x) with the principal-value integral I."""
        x = self._check(x)
        numerator, _, _ = self._principal_part(x)
        a_sq = self.omega_s ** 2
        return self.omega_0 ** 2 + 4.0 * self.nu * a_sq / math.pi * numerator / (x + a_sq)

    def g_prime(self, x):
        """Analytic derivative of g."""
        x = self._check(x)
        numerator, log_term, root = self._principal_part(x)
        a_sq = self.omega_s ** 2
        numerator_prime = log_term / (4.0 * root) + self.omega_d / (2.0 * (self.omega_d ** 2 - x))
        integral_prime = numerator_prime / (x + a_sq) - numerator / (x + a_sq) ** 2
        return 4.0 * self.nu * a_sq / math.pi * integral_prime

    def h(self, x):
        """h(x) = 2 pi omega_0 J(sqrt(x))."""
        x = self._check(x)
        return 2.0 * math.pi * self.omega_0 * self.density(np.sqrt(x))

    def resonance(self) -> float:
        """
        Root x_r of x = g(x) inside the band.

        x - g(x) is negative at both band edges; the first rising crossing is
        located on a sampling grid and refined with Brent's method.

        Raises:
            ResonanceNotFoundError: If there is no rising crossing in (0, omega_d^2)
        """
        upper = self.omega_d ** 2
        grid = np.linspace(upper * BAND_EDGE_GUARD, upper * (1.0 - BAND_EDGE_GUARD), RESONANCE_SCAN_POINTS)

        def excess(x):
            return x - self.g(x)

        crossing = first_rising_crossing(excess, grid)
        if crossing is None:
            raise ResonanceNotFoundError(f"x = g(x) has no root in (0, {upper:.6g})")
        try:
            return bracketed_root(lambda x: float(excess(x)), crossing[0], crossing[1], rtol=TOL_RESONANCE)
        except RootNotFoundError as e:
            raise ResonanceNotFoundError(str(e)) from e


def continuum_functions(scales: DerivedScales) -> ContinuumFunctions:
    """Quasicontinuum functions for the given scales."""
    return ContinuumFunctions(omega_0=scales.omega_0, nu=scales.nu, omega_s=scales.omega_s, omega_d=scales.omega_d)


def _closed_form_rate(omega_r: float, h_r: float) -> float:
    # (omega_r/sqrt2) sqrt(sqrt(1 + y^2) - 1) with y = h_r/omega_r^2, written without cancellation
    y = h_r / omega_r ** 2
    return omega_r / math.sqrt(2.0) * y / math.sqrt(math.sqrt(1.0 + y * y) + 1.0)


def _extrema(t_grid: np.ndarray, values: np.ndarray):
    """Extrema of a sampled oscillation, refined with three-point parabolas."""
    slope = np.diff(values)
    turning = np.flatnonzero(slope[:-1] * slope[1:] < 0) + 1
    times = []
    heights = []
    step = t_grid[1] - t_grid[0]
    for i in turning:
        y0, y1, y2 = values[i - 1], values[i], values[i + 1]
        curvature = y0 - 2.0 * y1 + y2
        if curvature == 0:
            times.append(t_grid[i])
            heights.append(y1)
            continue
        offset = 0.5 * (y0 - y2) / curvature
        times.append(t_grid[i] + offset * step)
        heights.append(y1 - 0.25 * (y0 - y2) * offset)
    return np.asarray(times), np.asarray(heights)


def fit_envelope(t_grid: np.ndarray, values: np.ndarray, t_window: Optional[float] = None) -> Optional[EnvelopeFit]:
    """
    Fit ln|extremum| = intercept - Gamma t over the extrema of a decaying oscillation.

    Args:
        t_grid: Uniform ascending sample times
        values: Samples of the oscillation
        t_window: Only extrema with t <= t_window are used (default: all)

    Returns:
        EnvelopeFit, or None if fewer than three extrema fall in the window.
    """
    times, heights = _extrema(np.asarray(t_grid, dtype=float), np.asarray(values, dtype=float))
    window = float(t_grid[-1]) if t_window is None else t_window
    keep = (times <= window) & (np.abs(heights) > 0)
    if np.count_nonzero(keep) < MIN_FIT_POINTS:
        logger.warning(f"Only {np.count_nonzero(keep)} extrema inside the fit window; envelope not fitted")
        return None
    slope, intercept = np.polyfit(times[keep], np.log(np.abs(heights[keep])), 1)
    return EnvelopeFit(Gamma=float(-slope), intercept=float(intercept), n_points=int(np.count_nonzero(keep)),
                       t_window=window)


def decay_rate(
    scales: DerivedScales,
    coeffs: Optional[CoefficientSet] = None,
    spectrum: Optional[BogoliubovSpectrum] = None,
    delta: float = 1.0,
) -> DecayReport:
    """
    Decay of the bead vibration in the quasicontinuum limit.

    Solves x_r = g(x_r), then h_r = h(x_r)/(1 - g'(x_r)), Gamma_r = sqrt(h_r) and
    the closed-form amplitude decay rate
    Gamma = (omega_r/sqrt2) (sqrt(1 + (Gamma_r/omega_r)^4) - 1)^(1/2).
    When discrete coefficients are supplied, the displacement trace is fitted
    over min(5/Gamma, T_rec/4) with T_rec = 2 pi N/omega_d the string recurrence time.

    Args:
        scales: Derived scales
        coeffs: Discrete coefficients at the same parameters, for the envelope fit
        spectrum: Matching spectrum
        delta: Initial displacement for the fitted trace

    Returns:
        DecayReport

    Raises:
        ResonanceNotFoundError: If x = g(x) has no root in the band
    """
    functions = continuum_functions(scales)
    x_r = functions.resonance()
    omega_r = math.sqrt(x_r)
    slope = 1.0 - float(functions.g_prime(x_r))
    if slope <= 0:
        raise ResonanceNotFoundError(f"Resonance at x = {x_r:.6g} is not a rising crossing (1 - g' = {slope:.3e})")
    h_r = float(functions.h(x_r)) / slope
    gamma_closed = _closed_form_rate(omega_r, h_r)
    gamma_gr_finite = 2.0 * math.pi * float(functions.density(scales.omega_0))

    gamma_fit = None
    fit_points = 0
    if coeffs is not None and spectrum is not None and gamma_closed > 0:
        recurrence = 2.0 * math.pi * scales.dos
        window = min(FIT_E_FOLDS / gamma_closed, FIT_RECURRENCE_FRACTION * recurrence)
        step = 2.0 * math.pi / (omega_r * SAMPLES_PER_PERIOD)
        t_grid = np.arange(0.0, window + 2.0 * step, step)
        fit = fit_envelope(t_grid, displacement_trace(coeffs, spectrum, delta, t_grid), window)
        if fit is not None:
            gamma_fit, fit_points = fit.Gamma, fit.n_points

    logger.info(f"Resonance omega_r = {omega_r:.6g}, Gamma = {gamma_closed:.6g}, fitted {gamma_fit}")
    return DecayReport(
        x_r=x_r,
        omega_r=omega_r,
        h_r=h_r,
        Gamma_r=math.sqrt(h_r),
        Gamma_closed=gamma_closed,
        Gamma_fit=gamma_fit,
        Gamma_gr=2.0 * scales.nu,
        Gamma_gr_finite=gamma_gr_finite,
        theta_0=math.atan2(h_r, x_r),
        nu=scales.nu,
        fit_points=fit_points,
    )


def emission_spectrum(coeffs: CoefficientSet) -> EmissionSpectrum:
    """
    Probability that a vibron created on the uncoupled vacuum decays into exactly one bogoliubon alpha.

    P_1(Omega_alpha) = ((M^-1)_0a)^2 / |det M|, with the row of M^-1 obtained
    from one transposed LU solve.

    Args:
        coeffs: Coefficient set

    Returns:
        EmissionSpectrum: p1, total, peak index and the multi-quantum weight 1 - total.

    Raises:
        SingularMatrixError: If M is singular
    """
    if coeffs.lu_piv is None or coeffs.det_M == 0:
        raise SingularMatrixError("M is singular; no emission spectrum exists.")
    unit = np.zeros(coeffs.size)
    unit[0] = 1.0
    inverse_row = lu_solve(coeffs.lu_piv, unit, trans=1)
    p1 = inverse_row ** 2 / coeffs.det_M
    total = float(np.sum(p1))
    return EmissionSpectrum(
        Omega=coeffs.Omega,
        p1=p1,
        total_p1=total,
        peak_alpha=int(np.argmax(p1)),
        multi_quantum_weight=1.0 - total,
    )


def quadrature_covariance(coeffs: CoefficientSet) -> np.ndarray:
    """
    Covariance of (x_0..x_N, p_0..p_N) in the coupled ground state, x = (a + a^dagger)/sqrt2.

    The uncoupled quadratures are x = (U + V) x_b and p = (U - V) p_b, and the
    Bogoliubov vacuum has covariance I/2, so V = S S^T / 2 with
    S = diag(U + V, U - V).

    Args:
        coeffs: Coefficient set

    Returns:
        (2(N+1), 2(N+1)) covariance matrix.
    """
    position = coeffs.U + coeffs.V
    momentum = coeffs.U - coeffs.V
    zero = np.zeros_like(position)
    symplectic = np.block([[position, zero], [zero, momentum]])
    return 0.5 * symplectic @ symplectic.T
