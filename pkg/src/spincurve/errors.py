class SpinCurveError(Exception):
    """Base class for errors raised by spincurve."""


class PreconditionError(SpinCurveError, ValueError):
    """An input violates a documented precondition."""


class ConditionViolation(PreconditionError):
    """A pointwise condition fails; ``t`` is the first offending parameter."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NumericalError(SpinCurveError, ArithmeticError):
    """A computation could not reach its accuracy target or is ill-posed."""


class CurveFileError(SpinCurveError, OSError):
    """A curve file is missing, unreadable or malformed."""
