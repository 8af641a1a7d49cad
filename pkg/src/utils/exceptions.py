"""
Exceptions Module

This module defines the exception hierarchy used across LambQ. Every error
raised on purpose by the library derives from LambModelError, and each class
also derives from the closest builtin exception so callers that only know
about ValueError or ArithmeticError keep working.

Classes:
    LambModelError: Root of the hierarchy
    ParameterError: Invalid physical or numerical parameter (names the field)
    ConfigError: Invalid run configuration
    InstabilityError: Coupling strength g at or beyond 1
    RootNotFoundError: A bracketed root search failed
    BracketError: The secular-equation bracket layout is inconsistent
    ResonanceNotFoundError: No resonance x = g(x) in the continuum band
    PoleProximityError: Secular function evaluated too close to a pole
    SingularMatrixError: The coefficient matrix M cannot be factorised
    DomainError: Argument outside the domain of a closed form
    VerificationError: A verified invariant exceeded its tolerance
"""

from typing import Optional


class LambModelError(Exception):
    """Base class for all errors raised by LambQ."""


class ParameterError(LambModelError, ValueError):
    """
    Raised when a model parameter fails validation.

    Attributes:
        field: Name of the offending field
        value: The rejected value
    """

    def __init__(self, field: str, value: object, reason: str = "must be strictly positive"):
        self.field = field
        self.value = value
        super().__init__(f"Invalid parameter '{field}' = {value!r}: {reason}.")


class ConfigError(LambModelError, ValueError):
    """Raised when a run configuration is malformed or inconsistent."""


class InstabilityError(LambModelError, ArithmeticError):
    """
    Raised when the Hamiltonian is no longer positive-definite.

    Attributes:
        g: The coupling strength that triggered the error
    """

    def __init__(self, g: float, detail: str = ""):
        self.g = g
        message = f"Hamiltonian no longer positive-definite: coupling strength g = {g:.12g} >= 1"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class RootNotFoundError(LambModelError, RuntimeError):
    """
    Raised when a bracketed root search does not converge.

    Attributes:
        index: Index of the bracket that failed, if any
    """

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        if index is not None:
            message = f"{message} (bracket {index})"
        super().__init__(message)


class BracketError(LambModelError, RuntimeError):
    """
    Raised when a secular-equation interval lacks the expected sign pattern.

    Attributes:
        index: Index of the interval
    """

    def __init__(self, message: str, index: int):
        self.index = index
        super().__init__(f"{message} (interval {index})")


class ResonanceNotFoundError(RootNotFoundError):
    """Raised when x = g(x) has no root inside the continuum band."""


class PoleProximityError(LambModelError, ValueError):
    """
    Raised when the secular function is evaluated within the pole guard.

    Attributes:
        x: The evaluation point
        distance: Distance to the nearest pole
    """

    def __init__(self, x: float, distance: float):
        self.x = x
        self.distance = distance
        super().__init__(f"Secular function evaluated at x = {x!r}, {distance:.3e} from a pole.")


class SingularMatrixError(LambModelError, ArithmeticError):
    """Raised when M is singular, which signals g at or beyond the instability."""


class DomainError(LambModelError, ValueError):
    """Raised when an argument lies outside the domain of a closed-form expression."""


class VerificationError(LambModelError, AssertionError):
    """
    Raised when a verified invariant exceeds its tolerance.

    Attributes:
        invariant: Name of the failed invariant
        residual: The measured residual
        tolerance: The tolerance it was held to
    """

    def __init__(self, invariant: str, residual: float, tolerance: float):
        self.invariant = invariant
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"Invariant '{invariant}' failed: residual {residual:.3e} exceeds tolerance {tolerance:.1e}."
        )
