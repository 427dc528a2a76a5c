"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CompandorError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CompandorError, ValueError):
    """Invalid design configuration or command-line arguments."""


class DomainError(CompandorError, ValueError):
    """Argument outside the domain of a function."""


class NumericError(CompandorError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class QuadratureError(NumericError):
    """Adaptive quadrature ran out of subdivisions.

    The best estimate and its error bound are kept on the exception so a
    caller can decide whether the partial answer is usable.
    """

    def __init__(self, message: str, estimate: float, error: float) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BracketError(NumericError, ValueError):
    """Root-finding bracket does not contain a sign change."""


class FitError(NumericError):
    """Spline coefficients could not be determined for a grid."""


class DesignError(NumericError):
    """Codebook construction produced an inconsistent quantizer."""
