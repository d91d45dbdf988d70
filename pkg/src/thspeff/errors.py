"""Exception hierarchy.

Domain violations (bad loads, bad ensemble shapes) are plain ``ValueError``
subclasses so callers can catch them the usual way. Anything that goes wrong
inside a numerical routine derives from :class:`NumericalError`; the CLI maps
those to exit code 3.
"""


class DomainError(ValueError):
    """An argument lies outside the region where a formula is defined."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical method."""


class EigenSolverError(NumericalError):
    pass


class FactorizationError(NumericalError):
    pass


class SingularSystemError(FactorizationError):
    pass


class QuadratureError(NumericalError):
    def __init__(self, message, *, estimate=None, achieved=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved = achieved


class MonteCarloError(NumericalError):
    """Wraps a failure raised while processing one (point, trial) pair."""

    def __init__(self, point, trial, cause):
        super().__init__(f"point {point}, trial {trial}: {cause}")
        self.point = point
        self.trial = trial
        self.cause = cause
