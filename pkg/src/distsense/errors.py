"""Exception hierarchy shared by every distsense module."""


class DistsenseError(Exception):
    """Base class for all errors raised by distsense."""


class InvalidArgument(DistsenseError, ValueError):
    """An argument is out of range or structurally wrong."""


class UnsupportedInput(DistsenseError, ValueError):
    """The input is valid in general but outside what an operation models
    (mixed states, displaced probes where zero-mean is required, ...)."""


class NotEstimable(DistsenseError, ValueError):
    """The weight vector has a component outside the Fisher-matrix support.

    Attributes:
        residual (float): norm of the component of ``w`` orthogonal to the support.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class NumericalFailure(DistsenseError, RuntimeError):
    """A solver did not converge or a matrix was numerically singular.

    Attributes:
        best: best-so-far result, when the failing routine has one.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
