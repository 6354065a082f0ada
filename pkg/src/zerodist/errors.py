"""Exception types shared across the package."""


class ZeroDistError(Exception):
    """Base class for all package errors."""


class ParameterError(ZeroDistError, ValueError):
    """A parameter lies outside its admissible domain."""


class DomainError(ZeroDistError, ValueError):
    """An operation was requested for an unsupported object kind."""


class ContractError(ZeroDistError, ValueError):
    """Inputs are individually valid but mutually inconsistent."""


class NumericError(ZeroDistError, ArithmeticError):
    """A numerical procedure failed or produced non-finite output."""


class DecompositionError(NumericError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite: pivot {pivot} is not positive")


class NoRootsError(ZeroDistError, ValueError):
    """The polynomial has effective degree 0 and therefore no zeros."""


class InsufficientSampleError(ZeroDistError, ValueError):
    """Too few Monte Carlo trials for the requested statistic."""


class ConfigError(ZeroDistError, ValueError):
    """An experiment configuration is malformed."""
