"""Exception types raised by the library."""


class IncompatError(Exception):
    """Base class for all errors raised by :mod:`incompat`."""


class InvalidInputError(IncompatError, ValueError):
    """Malformed matrices, mismatched dimensions or out-of-range parameters."""


class NotUnitSquareError(InvalidInputError):
    """An observable that should satisfy ``A @ A == 1`` does not."""


class InfeasibleSError(IncompatError):
    """A candidate operator ``S`` does not define a valid joint observable."""

    def __init__(self, message, which=None, min_eigenvalue=None):
        super().__init__(message)
        self.which = which
        self.min_eigenvalue = min_eigenvalue


class ObservablesCompatibleError(IncompatError):
    """All spectral projectors commute, so no violating pair exists."""


class InconsistentSolutionError(IncompatError):
    """A solver result fails its own certificate checks."""


class SolverError(IncompatError):
    """The SDP solver did not reach an optimal status."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class SignalingError(IncompatError):
    """Two triple distributions disagree on the shared marginal."""

    def __init__(self, message, max_deviation=None):
        super().__init__(message)
        self.max_deviation = max_deviation


class SizeLimitError(InvalidInputError):
    """Problem size exceeds a hard limit."""
