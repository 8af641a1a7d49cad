"""
Root Finding Utility Module

This module wraps the bracketed solvers used throughout LambQ. All roots in
the model are found inside brackets known to hold exactly one sign change,
so the helpers here only ever refine a bracket (Brent's method from scipy)
or locate sign changes on a sampling grid.

Functions:
    bracketed_root: Refine a root inside a bracket with a guaranteed sign change
    sign_changes: Locate every sign change of a function on a sampling grid
    first_rising_crossing: Find the first negative-to-positive crossing on a grid
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .exceptions import RootNotFoundError

# Tightest relative tolerance brentq accepts
MIN_RTOL = 4.0 * np.finfo(float).eps
DEFAULT_MAX_ITER = 200

logger = logging.getLogger(__name__)


def bracketed_root(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    rtol: float = MIN_RTOL,
    index: Optional[int] = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """
    Refine the root of `func` inside [lo, hi] with Brent's method.

    Args:
        func: Scalar function with opposite signs at lo and hi
        lo: Lower end of the bracket
        hi: Upper end of the bracket
        rtol: Relative tolerance on the root (clamped to what brentq accepts)
        index: Bracket index reported on failure
        max_iter: Iteration cap handed to brentq

    Returns:
        The root, converged to rtol relative to its magnitude.

    Raises:
        RootNotFoundError: If the bracket has no sign change or brentq fails
    """
    f_lo = func(lo)
    f_hi = func(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise RootNotFoundError(
            f"No sign change on [{lo!r}, {hi!r}]: f(lo) = {f_lo:.3e}, f(hi) = {f_hi:.3e}", index
        )

    try:
        root, result = brentq(
            func,
            lo,
            hi,
            xtol=np.finfo(float).tiny,
            rtol=max(rtol, MIN_RTOL),
            maxiter=max_iter,
            full_output=True,
            disp=False,
        )
    except (ValueError, RuntimeError) as e:
        raise RootNotFoundError(f"Brent iteration failed on [{lo!r}, {hi!r}]: {e}", index) from e

    if not result.converged:
        raise RootNotFoundError(
            f"Brent iteration did not converge after {result.iterations} steps: {result.flag}", index
        )
    return float(root)


def sign_changes(func: Callable[[np.ndarray], np.ndarray], grid: np.ndarray) -> List[Tuple[float, float]]:
    """
    Locate the sign changes of a vectorised function on a sampling grid.

    Non-finite samples (poles) split the grid, so a jump through a pole is not
    reported as a crossing.

    Args:
        func: Vectorised function evaluated on the whole grid at once
        grid: Ascending sample points

    Returns:
        List of (left, right) sample pairs between which the sign changes.
    """
    values = np.asarray(func(grid), dtype=float)
    finite = np.isfinite(values)
    signs = np.sign(values)
    crossings = []
    for i in range(len(grid) - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        if signs[i] * signs[i + 1] < 0:
            crossings.append((float(grid[i]), float(grid[i + 1])))
    return crossings


def first_rising_crossing(
    func: Callable[[np.ndarray], np.ndarray], grid: np.ndarray
) -> Optional[Tuple[float, float]]:
    """
    Find the first grid interval on which `func` goes from negative to positive.

    Args:
        func: Vectorised function evaluated on the whole grid at once
        grid: Ascending sample points

    Returns:
        The (left, right) pair enclosing the crossing, or None if there is none.
    """
    values = np.asarray(func(grid), dtype=float)
    for i in range(len(grid) - 1):
        if values[i] < 0.0 < values[i + 1]:
            return float(grid[i]), float(grid[i + 1])
    logger.debug("No rising crossing found on the sampling grid.")
    return None
