"""Exception hierarchy shared by every dmps module."""


class DmpsError(Exception):
    """Base class for all errors raised by the package."""


class InvalidParameter(DmpsError, ValueError):
    """An argument lies outside the domain of the operation."""


class NonConvergence(DmpsError, ArithmeticError):
    """A series hit its term budget before meeting the tolerance."""


class EvaluationFailure(DmpsError, ArithmeticError):
    """A quantity under- or overflowed where a finite positive value is needed."""


class QuadratureFailure(DmpsError, ArithmeticError):
    """Adaptive refinement exhausted its evaluation budget."""


class NotNormalizable(DmpsError, ValueError):
    """The unnormalized density does not decay fast enough to be normalized."""


class NumericalBlowup(DmpsError, ArithmeticError):
    """A simulated path left the representable range.

    Attributes:
        path: index of the first offending path.
        step: time-step index at which it was detected.
    """

    def __init__(self, message: str, path: int = -1, step: int = -1):
        super().__init__(message)
        self.path = path
        self.step = step


class DivergentIntegral(DmpsError, ValueError):
    """A present-value integral has a non-positive effective discount rate."""
