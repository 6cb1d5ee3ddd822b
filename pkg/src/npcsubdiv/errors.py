"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Malformed value: descriptor mismatch, empty mask, bad weights."""


class DomainError(ValueError):
    """Arguments outside an operation's domain."""


class NumericError(ValueError):
    """Non-finite or otherwise unusable numeric payload."""


class ResourceError(RuntimeError):
    """A support or iteration budget was exceeded."""


class SolverError(RuntimeError):
    """An iterative solver failed to reach its tolerance.

    Carries the last iterate and the residual at the point of failure so
    callers can inspect or resume.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
