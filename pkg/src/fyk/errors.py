"""Exception hierarchy shared by every module."""


class FykError(Exception):
    """Base class for all package errors."""


class DomainError(FykError, ValueError):
    """Input outside the mathematical domain (pole, divergent moment, ...)."""


class RangeError(FykError, ValueError):
    """Argument outside the supported desk-scale range."""


class ValidationError(FykError, ValueError):
    """Structurally or logically inconsistent input data."""


class AccuracyError(FykError, ArithmeticError):
    """Requested accuracy not reached; carries the best available estimate."""

    def __init__(self, message, best=None, error=None):
        super().__init__(message)
        self.best = best
        self.error = error


class IllConditionedError(FykError, ArithmeticError):
    """Linear system too close to singular to trust."""


class StepSizeError(FykError, ArithmeticError):
    """Descent method failed to make progress."""
