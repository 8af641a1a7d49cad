"""
Core Model Service Module

This module turns the raw constants of a bead-on-a-string system into the
quantities every other service works with: the derived scales, the string
normal modes, the couplings gamma_n and the coupling strength g.

The string modes solve tan(k ell) = -(tau/kappa_c) k. Roots are found on the
pole-free form kappa_c sin(theta) + (tau/ell) theta cos(theta) = 0 with
theta = k ell, which changes sign exactly once on [(n - 1/2) pi, n pi].

Classes:
    CouplingStrength: Discrete coupling strength and its thermodynamic limit

Functions:
    derive_scales: Compute DerivedScales from PhysicalParams
    solve_wavenumbers: Solve the transcendental mode equation
    wavenumber_residuals: Residuals of the tangent form of the mode equation
    bracket_sign_changes: Count sign changes per bracket by dense sampling
    coupling_gammas: Couplings gamma_n (canonical positive sign)
    first_principles_gammas: Signed couplings from the string mode shapes
    coupling_strength: Discrete g with the thermodynamic-limit value
    thermodynamic_coupling: Closed-form g for omega_c/omega_0 and tau/(kappa_c d)
    static_coupling_limit: Upper bound of the discrete g at fixed ell
    build_problem: Scales, modes and secular problem for one parameter set
    solve_tension_for_coupling: Find tau/(kappa_c d) giving a requested g
"""

import logging
import math
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ..models.parameters import DerivedScales, PhysicalParams, StringModes
from ..models.spectrum import SecularProblem
from ..utils.exceptions import ParameterError, RootNotFoundError
from ..utils.root_finding import MIN_RTOL, bracketed_root, sign_changes

# Relative tolerance on each wavenumber root
TOL_ROOT = 1e-13
# Guard keeping the dense-sampling oracle off the tangent poles, in units of pi/ell
BRACKET_GUARD = 1e-9
# Log-spaced tension ratios scanned before refining a requested g
TENSION_SCAN = np.logspace(-3, 3, 121)

logger = logging.getLogger(__name__)


class CouplingStrength(NamedTuple):
    """Discrete coupling strength g and its thermodynamic limit g_inf."""
    g: float
    g_inf: float


def derive_scales(params: PhysicalParams) -> DerivedScales:
    """
    Compute every secondary scale of the model.

    Args:
        params: Validated physical constants

    Returns:
        DerivedScales: omega_0, omega_b, omega_c, c, nu, k_s, omega_s, d, omega_d and dos.
    """
    c = math.sqrt(params.tau / params.sigma)
    k_s = params.kappa_c / params.tau
    return DerivedScales(
        omega_0=math.sqrt((params.kappa + params.kappa_c) / params.m),
        omega_b=math.sqrt(params.kappa / params.m),
        omega_c=math.sqrt(params.kappa_c / params.m),
        c=c,
        nu=params.tau / (2.0 * params.m * c),
        k_s=k_s,
        omega_s=c * k_s,
        d=params.ell / params.n_modes,
        omega_d=params.n_modes * math.pi * c / params.ell,
        dos=params.ell / (math.pi * c),
    )


def solve_wavenumbers(params: PhysicalParams) -> StringModes:
    """
    Solve tan(k ell) = -(tau/kappa_c) k for the N lowest positive roots.

    Root n lies in ((n - 1/2) pi/ell, n pi/ell). In the decoupled limit
    kappa_c = 0 the roots sit exactly at (n - 1/2) pi/ell.

    Args:
        params: Validated physical constants

    Returns:
        StringModes: Wavenumbers and frequencies; couplings not yet filled.

    Raises:
        RootNotFoundError: If a bracket fails to yield its root (reports the bracket index)
    """
    c = math.sqrt(params.tau / params.sigma)
    n = np.arange(1, params.n_modes + 1)
    if params.is_decoupled:
        theta = (n - 0.5) * math.pi
    else:
        slope = params.tau / params.ell

        def mode_function(t: float) -> float:
            return params.kappa_c * math.sin(t) + slope * t * math.cos(t)

        theta = np.empty(params.n_modes)
        for i, index in enumerate(n):
            theta[i] = bracketed_root(
                mode_function, (index - 0.5) * math.pi, index * math.pi, rtol=MIN_RTOL, index=int(index)
            )
    k = theta / params.ell
    if np.any(np.diff(k) <= 0):
        raise RootNotFoundError("Wavenumbers are not strictly increasing", int(np.argmin(np.diff(k))) + 1)
    logger.debug(f"Solved {params.n_modes} string wavenumbers, k_1 = {k[0]:.6g}, k_N = {k[-1]:.6g}")
    return StringModes(k=k, omega=c * k)


def wavenumber_residuals(params: PhysicalParams, modes: StringModes) -> np.ndarray:
    """
    Residuals |tan(k_n ell) + (tau/kappa_c) k_n| of the tangent form.

    Args:
        params: Physical constants (kappa_c must be positive)
        modes: Solved string modes

    Returns:
        Array of N residuals.

    Raises:
        ParameterError: In the decoupled limit, where the tangent form is singular
    """
    if params.is_decoupled:
        raise ParameterError("kappa_c", params.kappa_c, "tangent residuals need a coupling spring")
    k = modes.k
    return np.abs(np.tan(k * params.ell) + params.tau / params.kappa_c * k)


def bracket_sign_changes(params: PhysicalParams, samples_per_bracket: int = 2000) -> np.ndarray:
    """
    Count sign changes of f(k) = tan(k ell) + (tau/kappa_c) k inside each bracket.

    Each bracket ((n - 1/2) pi/ell, n pi/ell), shrunk by a small guard at both
    ends, is sampled densely. A correct bracketing has exactly one change per
    bracket.

    Args:
        params: Physical constants with kappa_c > 0
        samples_per_bracket: Sample points per bracket

    Returns:
        Integer array of N counts.
    """
    if params.is_decoupled:
        raise ParameterError("kappa_c", params.kappa_c, "the tangent form needs a coupling spring")
    guard = BRACKET_GUARD * math.pi / params.ell
    ratio = params.tau / params.kappa_c

    def tangent_form(k: np.ndarray) -> np.ndarray:
        return np.tan(k * params.ell) + ratio * k

    counts = np.zeros(params.n_modes, dtype=int)
    for i in range(params.n_modes):
        lo = (i + 0.5) * math.pi / params.ell + guard
        hi = (i + 1) * math.pi / params.ell - guard
        counts[i] = len(sign_changes(tangent_form, np.linspace(lo, hi, samples_per_bracket)))
    return counts


def _mode_normalisation(k: np.ndarray, ell: float) -> np.ndarray:
    theta = k * ell
    return math.sqrt(2.0 / ell) / np.sqrt(1.0 - np.sin(2.0 * theta) / (2.0 * theta))


def coupling_gammas(params: PhysicalParams, scales: DerivedScales, modes: StringModes) -> StringModes:
    """
    Fill in the couplings gamma_n between the bead and each string mode.

    gamma_n = omega_s sqrt(nu/omega_0) sqrt(k_n ell / D_n) / sqrt(1 + k_s ell / D_n)
    with D_n = (k_n ell)^2 + (k_s ell)^2. This is the positive-sign member of
    the first-principles couplings; the normalisation constants A_n are
    stored alongside.

    Args:
        params: Physical constants
        scales: Derived scales of the same parameters
        modes: Solved string modes

    Returns:
        StringModes: A copy with gamma and a_norm filled.
    """
    k_ell = modes.k * params.ell
    ks_ell = scales.k_s * params.ell
    denominator = k_ell ** 2 + ks_ell ** 2
    gamma = (
        scales.omega_s
        * math.sqrt(scales.nu / scales.omega_0)
        * np.sqrt(k_ell / denominator)
        / np.sqrt(1.0 + ks_ell / denominator)
    )
    return modes.with_gammas(gamma, _mode_normalisation(modes.k, params.ell))


def first_principles_gammas(params: PhysicalParams, scales: DerivedScales, modes: StringModes) -> np.ndarray:
    """
    Signed couplings from the string mode shape at the bead end.

    gamma_n = -kappa_c A_n sin(k_n ell) / (2 sqrt(m sigma omega_0 omega_n)). The
    sign alternates with n; magnitudes equal coupling_gammas.

    Args:
        params: Physical constants
        scales: Derived scales
        modes: Solved string modes

    Returns:
        Array of N signed couplings.
    """
    a_norm = _mode_normalisation(modes.k, params.ell)
    endpoint = -a_norm * np.sin(modes.k * params.ell)
    return params.kappa_c * endpoint / (2.0 * np.sqrt(params.m * params.sigma * scales.omega_0 * modes.omega))


def thermodynamic_coupling(omega_c_ratio: float, tension_ratio: float) -> float:
    """
    Closed-form coupling strength of the quasicontinuum string.

    g_inf = (2/pi) (omega_c/omega_0)^2 arctan(pi tau/(kappa_c d)); an infinite
    tension ratio gives (omega_c/omega_0)^2.

    Args:
        omega_c_ratio: omega_c/omega_0
        tension_ratio: tau/(kappa_c d), may be inf

    Returns:
        g_inf
    """
    if tension_ratio < 0:
        raise ParameterError("tension_ratio", tension_ratio, "must be non-negative")
    return 2.0 / math.pi * omega_c_ratio ** 2 * math.atan(math.pi * tension_ratio)


def coupling_strength(scales: DerivedScales, modes: StringModes) -> CouplingStrength:
    """
    Coupling strength g = (4/omega_0) sum gamma_n^2/omega_n and its thermodynamic limit.

    Args:
        scales: Derived scales
        modes: String modes with couplings filled

    Returns:
        CouplingStrength: (g, g_inf)
    """
    if modes.gamma is None:
        raise ParameterError("gamma", None, "couplings must be computed first")
    g = float(4.0 / scales.omega_0 * np.sum(modes.gamma ** 2 / modes.omega))
    omega_c_ratio = scales.omega_c / scales.omega_0
    g_inf = 0.0 if omega_c_ratio == 0 else thermodynamic_coupling(omega_c_ratio, scales.tension_ratio)
    return CouplingStrength(g=g, g_inf=g_inf)


def static_coupling_limit(params: PhysicalParams) -> float:
    """
    Limit of the discrete g as N grows at fixed string length.

    Equals the static compliance ratio kappa_c^2 / ((kappa_c + tau/ell)(kappa + kappa_c)),
    which lies below (omega_c/omega_0)^2 < 1.
    """
    return params.kappa_c ** 2 / ((params.kappa_c + params.tau / params.ell) * (params.kappa + params.kappa_c))


def build_problem(params: PhysicalParams) -> Tuple[DerivedScales, StringModes, SecularProblem]:
    """
    Run the core-model chain for one parameter set.

    Args:
        params: Physical constants

    Returns:
        Tuple of (scales, modes with couplings, secular problem).
    """
    scales = derive_scales(params)
    modes = coupling_gammas(params, scales, solve_wavenumbers(params))
    problem = SecularProblem(omega_0=scales.omega_0, omega=modes.omega, gamma=modes.gamma)
    return scales, modes, problem


def _discrete_coupling(
    tension_ratio: float, omega_c_ratio: float, n_modes: int, omega_d_ratio: Optional[float],
    ell: Optional[float], omega_0: float,
) -> float:
    params = PhysicalParams.from_dimensionless(
        omega_c_ratio, tension_ratio, n_modes, ell=ell, omega_d_ratio=omega_d_ratio, omega_0=omega_0
    )
    scales, modes, _ = build_problem(params)
    return coupling_strength(scales, modes).g


def solve_tension_for_coupling(
    target_g: float,
    omega_c_ratio: float,
    n_modes: int,
    omega_d_ratio: Optional[float] = None,
    ell: Optional[float] = None,
    omega_0: float = 1.0,
) -> float:
    """
    Find the tension ratio tau/(kappa_c d) at which the discrete g equals target_g.

    The discrete g is not monotone in the tension ratio (it falls back towards
    zero once k_s ell drops below one), so the smallest ratio reaching the
    target is taken: a log-spaced scan locates the first crossing, which is
    then refined with Brent's method in log space.

    Args:
        target_g: Requested coupling strength in (0, 1)
        omega_c_ratio: omega_c/omega_0
        n_modes: Number of string modes
        omega_d_ratio: Debye frequency in units of omega_0 (default 3 when ell is None)
        ell: String length in units of c/omega_0
        omega_0: Bead frequency

    Returns:
        The tension ratio.

    Raises:
        ParameterError: If no tension ratio reaches target_g
    """
    if not 0 < target_g < 1:
        raise ParameterError("g_target", target_g, "must lie in (0, 1)")

    def excess(tension_ratio: float) -> float:
        return _discrete_coupling(tension_ratio, omega_c_ratio, n_modes, omega_d_ratio, ell, omega_0) - target_g

    previous = None
    for lo, hi in zip(TENSION_SCAN[:-1], TENSION_SCAN[1:]):
        f_lo = excess(lo) if previous is None else previous
        f_hi = excess(hi)
        previous = f_hi
        if f_lo < 0 <= f_hi:
            log_ratio = bracketed_root(lambda s: excess(math.exp(s)), math.log(lo), math.log(hi), rtol=1e-14)
            ratio = math.exp(log_ratio)
            logger.info(f"Tension ratio {ratio:.12g} gives g = {target_g} "
                        f"at omega_c/omega_0 = {omega_c_ratio}, N = {n_modes}")
            return ratio
    raise ParameterError(
        "g_target", target_g,
        f"not reachable for omega_c/omega_0 = {omega_c_ratio} and N = {n_modes} "
        f"(upper bound {omega_c_ratio ** 2:.6g})",
    )
