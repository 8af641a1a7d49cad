"""
Spectrum Solver Module

This module solves the secular equation

    S(x) = x - omega_0^2 - 4 omega_0 sum_q gamma_q^2 omega_q / (x - omega_q^2) = 0

for the N+1 squared Bogoliubov frequencies x = Omega^2. S is strictly
increasing between its poles omega_q^2, so each of the intervals
(0, omega_1^2), (omega_q^2, omega_{q+1}^2) and (omega_N^2, x_max) holds
exactly one root.

Each root is refined in a variable measured from the nearer end of its
interval. Near a pole that variable is the exact distance x - omega_q^2,
which is also what the coefficient formulas divide by, so it is stored as
the gap matrix of the spectrum.

Classes:
    SecularValue: Value and derivative of S at one point

Functions:
    secular_eval: Evaluate S and S' at x
    solve_spectrum: Solve for all N+1 Bogoliubov frequencies
    ground_state_energy: Zero-point shift 1/2 sum (Omega_alpha - omega_alpha)
    excitation_energy: Energy of a state with given bogoliubon numbers
    yurke_special_coupling: Coupling frequency at which the continuum reduces to the bare string
    yurke_check: Residuals of the continuum-string frequency condition
"""

import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..models.parameters import DerivedScales
from ..models.spectrum import BogoliubovSpectrum, SecularProblem
from ..utils.exceptions import BracketError, InstabilityError, PoleProximityError
from ..utils.root_finding import MIN_RTOL, bracketed_root

# Pole guard relative to the largest squared string frequency
POLE_GUARD = 1e-12
# Relative residual accepted at each root
TOL_SECULAR = 1e-12
# Factor applied when the local variable must start closer to a pole
GUARD_SHRINK = 1e-3
MAX_DOUBLINGS = 200

logger = logging.getLogger(__name__)


class SecularValue(NamedTuple):
    """S(x) and S'(x)."""
    value: float
    derivative: float


def secular_eval(problem: SecularProblem, x: float, pole_guard: Optional[float] = None) -> SecularValue:
    """
    Evaluate the secular function and its derivative.

    Args:
        problem: Secular problem
        x: Point in squared-frequency space
        pole_guard: Minimum distance to a coupled pole (default 1e-12 max omega_q^2)

    Returns:
        SecularValue: (S(x), S'(x))

    Raises:
        PoleProximityError: If x lies within the guard of a pole with nonzero coupling
    """
    poles = problem.omega ** 2
    weights = 4.0 * problem.omega_0 * problem.gamma ** 2 * problem.omega
    coupled = weights != 0
    guard = POLE_GUARD * float(np.max(poles)) if pole_guard is None else pole_guard
    distance = x - poles[coupled]
    if distance.size and np.min(np.abs(distance)) < guard:
        raise PoleProximityError(x, float(np.min(np.abs(distance))))
    value = x - problem.omega_0 ** 2 - np.sum(weights[coupled] / distance)
    derivative = 1.0 + np.sum(weights[coupled] / distance ** 2)
    return SecularValue(float(value), float(derivative))


class _Interval(NamedTuple):
    lo: float
    hi: float
    lo_pole: bool
    hi_pole: bool


class _LocalSecular:
    """
    S written in a local variable u, with x = reference + direction * u.

    Gaps x - omega_q^2 are formed from the exact offsets reference - omega_q^2,
    so the gap to the reference pole is u itself.
    """

    def __init__(self, omega_0_sq: float, poles: np.ndarray, weights: np.ndarray, reference: float, direction: float):
        self.omega_0_sq = omega_0_sq
        self.offsets = reference - poles
        self.weights = weights
        self.coupled = weights != 0
        self.reference = reference
        self.direction = direction

    def gaps(self, u: float) -> np.ndarray:
        return self.offsets + self.direction * u

    def terms(self, u: float) -> np.ndarray:
        gaps = self.gaps(u)[self.coupled]
        return self.weights[self.coupled] / gaps

    def __call__(self, u: float) -> float:
        return self.reference + self.direction * u - self.omega_0_sq - float(np.sum(self.terms(u)))


def _solve_interval(
    index: int, interval: _Interval, omega_0_sq: float, poles: np.ndarray, weights: np.ndarray, guard: float
) -> Tuple[float, np.ndarray, float]:
    """Root, gap row over all string modes and relative residual for one interval."""
    mid = 0.5 * (interval.lo + interval.hi)
    coupled = weights != 0
    s_mid = mid - omega_0_sq - float(np.sum(weights[coupled] / (mid - poles[coupled])))
    if s_mid >= 0:
        local = _LocalSecular(omega_0_sq, poles, weights, interval.lo, 1.0)
        width, at_pole = mid - interval.lo, interval.lo_pole
    else:
        local = _LocalSecular(omega_0_sq, poles, weights, interval.hi, -1.0)
        width, at_pole = interval.hi - mid, interval.hi_pole

    if s_mid == 0:
        u = width
    elif at_pole:
        # S runs to -inf just above a pole and to +inf just below it, so near
        # the reference its sign is -direction; move closer until it shows.
        u_lo = min(guard, 0.5 * width)
        while local(u_lo) * local.direction > 0:
            u_lo *= GUARD_SHRINK
            if u_lo < np.finfo(float).tiny:
                raise BracketError("Root closer to a pole than double precision resolves", index)
        u = bracketed_root(local, u_lo, width, rtol=MIN_RTOL, index=index)
    else:
        u = bracketed_root(local, 0.0, width, rtol=MIN_RTOL, index=index)

    terms = local.terms(u)
    x = local.reference + local.direction * u
    scale = abs(x) + omega_0_sq + float(np.sum(np.abs(terms)))
    residual = (x - omega_0_sq - float(np.sum(terms))) / scale
    return x, local.gaps(u), residual


def solve_spectrum(problem: SecularProblem) -> BogoliubovSpectrum:
    """
    Solve the secular equation for all N+1 Bogoliubov frequencies.

    String modes with gamma_q = 0 do not enter S; they come back unchanged
    with Omega = omega_q.

    Args:
        problem: Secular problem

    Returns:
        BogoliubovSpectrum: Ascending frequencies, brackets, residuals and gaps.

    Raises:
        InstabilityError: If g >= 1
        BracketError: If the upper bracket does not close or a root cannot be separated from its pole
    """
    g = problem.coupling_strength
    if g >= 1:
        logger.error(f"Coupling strength g = {g:.12g} is at or beyond the stability bound.")
        raise InstabilityError(g)

    poles = problem.omega ** 2
    weights = 4.0 * problem.omega_0 * problem.gamma ** 2 * problem.omega
    coupled = weights != 0
    coupled_poles = poles[coupled]
    omega_0_sq = problem.omega_0 ** 2
    guard = POLE_GUARD * float(np.max(poles))

    x_max = 2.0 * (float(coupled_poles[-1]) if coupled_poles.size else omega_0_sq)
    for _ in range(MAX_DOUBLINGS):
        if x_max - omega_0_sq - float(np.sum(weights[coupled] / (x_max - coupled_poles))) > 0:
            break
        x_max *= 2.0
    else:
        raise BracketError("Upper bracket did not close", int(coupled_poles.size))

    edges = np.concatenate(([0.0], coupled_poles, [x_max]))
    roots: List[float] = []
    gap_rows: List[np.ndarray] = []
    residuals: List[float] = []
    brackets: List[Tuple[float, float]] = []
    decoupled_mode: List[int] = []
    for i in range(coupled_poles.size + 1):
        interval = _Interval(float(edges[i]), float(edges[i + 1]), i > 0, i < coupled_poles.size)
        x, gap, residual = _solve_interval(i, interval, omega_0_sq, poles, weights, guard)
        roots.append(x)
        gap_rows.append(gap)
        residuals.append(residual)
        brackets.append((interval.lo, interval.hi))
        decoupled_mode.append(-1)

    for q in np.flatnonzero(~coupled):
        roots.append(float(poles[q]))
        gap_rows.append(poles[q] - poles)
        residuals.append(0.0)
        brackets.append((float(poles[q]), float(poles[q])))
        decoupled_mode.append(int(q))
    if not coupled.all():
        logger.debug(f"{int(np.sum(~coupled))} string mode(s) have zero coupling and keep their frequency")

    order = np.argsort(np.asarray(roots), kind="stable")
    spectrum = BogoliubovSpectrum(
        Omega=np.sqrt(np.asarray(roots)[order]),
        brackets=np.asarray(brackets)[order],
        residuals=np.asarray(residuals)[order],
        gap=np.asarray(gap_rows)[order],
        g=g,
        decoupled_mode=np.asarray(decoupled_mode, dtype=int)[order],
    )
    worst = spectrum.max_residual
    if worst > TOL_SECULAR:
        logger.warning(f"Largest relative secular residual {worst:.3e} exceeds {TOL_SECULAR:.0e}")
    logger.info(f"Solved {spectrum.size} Bogoliubov frequencies at g = {g:.6g}, Omega_0 = {spectrum.Omega[0]:.6g}")
    return spectrum


def ground_state_energy(problem: SecularProblem, spectrum: BogoliubovSpectrum) -> float:
    """
    Zero-point energy shift of the coupled ground state, 1/2 sum_alpha (Omega_alpha - omega_alpha).

    Args:
        problem: Secular problem supplying the uncoupled frequencies
        spectrum: Its solved spectrum

    Returns:
        The ground-state energy relative to the uncoupled vacuum.
    """
    terms = np.concatenate((spectrum.Omega, -problem.uncoupled_frequencies))
    return 0.5 * math.fsum(terms)


def excitation_energy(problem: SecularProblem, spectrum: BogoliubovSpectrum, occupations: Sequence[int]) -> float:
    """Energy sum_alpha n_alpha Omega_alpha plus the zero-point shift."""
    occupations = np.asarray(occupations)
    if occupations.shape != spectrum.Omega.shape:
        raise ValueError(f"Expected {spectrum.size} occupation numbers, got {occupations.size}.")
    return float(np.dot(occupations, spectrum.Omega)) + ground_state_energy(problem, spectrum)


def yurke_special_coupling(scales: DerivedScales) -> float:
    """Coupling frequency sqrt((4/pi) nu omega_d) of the special continuum case."""
    return math.sqrt(4.0 / math.pi * scales.nu * scales.omega_d)


def yurke_check(scales: DerivedScales, spectrum: BogoliubovSpectrum) -> np.ndarray:
    """
    Residuals |Omega^2 - omega_b^2 - 2 nu Omega cot(Omega ell / c)| per Bogoliubov frequency.

    The condition describes a bead on a continuum string and only holds
    approximately, near the special coupling and for many modes. The result
    is diagnostic and is not checked against a tolerance.

    Args:
        scales: Derived scales
        spectrum: Solved spectrum

    Returns:
        Array of N+1 residuals.
    """
    Omega = spectrum.Omega
    phase = Omega * scales.ell / scales.c
    damping = 2.0 * scales.nu * Omega / np.tan(phase) if scales.nu else np.zeros_like(Omega)
    return np.abs(Omega ** 2 - scales.omega_b ** 2 - damping)
