"""Exception hierarchy shared by all modules."""


class BlidError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(BlidError, ValueError):
    """Malformed or inconsistent arguments (dimension mismatch, bad radius, ...)."""


class FixtureError(BlidError, ValueError):
    """Unknown fixture name or invalid fixture parameters."""


class WeightError(BlidError, ValueError):
    """A weight function returned a non-positive or non-finite value."""


class AccuracyError(BlidError, ArithmeticError):
    """Contour quadrature failed to converge within the node budget.

    The best available value and its error estimate are kept so callers can
    decide whether the result is still usable.
    """

    def __init__(self, message, value=None, est_abs_error=None):
        super().__init__(message)
        self.value = value
        self.est_abs_error = est_abs_error


class ResolutionError(BlidError, ArithmeticError):
    """Zero isolation ran out of its subdivision budget."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class PreconditionError(BlidError, ValueError):
    """An operation precondition could not be verified on the sampled data."""
