"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter violates a stated precondition or constraint."""


class CapacityError(RuntimeError):
    """A size or overflow guard would be exceeded."""


class ConvergenceError(RuntimeError):
    """An iterative method hit its iteration cap before converging."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FormatError(ValueError):
    """A vector file is malformed."""
