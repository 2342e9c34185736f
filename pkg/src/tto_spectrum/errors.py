"""Exception hierarchy shared by all solver modules."""


class TTOError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TTOError, ValueError):
    """A point lies outside the region where a function may be evaluated."""


class PoleError(TTOError):
    """Evaluation hit a pole of a pseudocontinuation."""


class PreconditionError(TTOError, ValueError):
    """Inputs violate an operation's precondition."""


class DegenerateRoots(TTOError):
    """Two roots of Q are closer than the separation tolerance."""

    def __init__(self, message, roots=None):
        super().__init__(message)
        self.roots = roots


class CircleRoots(TTOError):
    """A root of Q lies within the tolerance band around the unit circle."""

    def __init__(self, message, roots=None):
        super().__init__(message)
        self.roots = roots


class DegenerateMap(TTOError):
    """The real-linear map w = b + a*conj(z) + c*z is not invertible."""


class NoConvergence(TTOError):
    """An iterative refinement failed to converge."""


class ResidualTooLarge(TTOError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotInModelSpace(TTOError):
    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class NotFiniteBlaschke(TTOError, ValueError):
    """The dense oracle needs a finite-dimensional model space."""


class ContourTooClose(TTOError):
    """A zero of the integrand sits on (or too near) a counting contour."""


class MismatchError(TTOError):
    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


class TruncationWarning(UserWarning):
    """The discarded Fourier tail carries non-negligible energy."""
