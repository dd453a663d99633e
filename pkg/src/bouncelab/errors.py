"""Exception types shared across the package."""


class BounceLabError(Exception):
    """Base class for all package errors."""


class DomainError(BounceLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class ParameterError(BounceLabError, ValueError):
    """Inconsistent or out-of-range physical/numerical parameters."""


class CoverageError(BounceLabError, IndexError):
    """A zero table is too short for the requested sum."""


class AccuracyError(BounceLabError, ArithmeticError):
    """A quadrature or cancellation check failed."""


class BranchContinuityError(BounceLabError, ArithmeticError):
    """The 2 pi branch of the phase could not be fixed unambiguously."""


class PrecisionError(BounceLabError, ArithmeticError):
    """Phase reduction would lose all significant digits."""


class ConvergenceError(BounceLabError, ArithmeticError):
    """A root iteration failed; ``k`` carries the offending zero index."""

    def __init__(self, msg, k=None):
        super().__init__(msg)
        self.k = k
