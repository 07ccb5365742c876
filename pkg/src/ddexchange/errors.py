"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain of the requested function."""


class SingularityError(DomainError):
    """Evaluation was requested exactly on a pole."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class ConvergenceError(RuntimeError):
    """Adaptive quadrature ran out of refinement budget.

    The best available estimate and its error are kept on the exception so
    callers can still record a flagged value.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class WeakCouplingWarning(UserWarning):
    """The coupling is too large for the weak-coupling kernels to be trusted."""


class TruncationWarning(UserWarning):
    """A tabulated function was used outside its sampled support."""
