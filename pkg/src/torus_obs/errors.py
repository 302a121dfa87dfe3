"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class CapExceededError(DomainError):
    """Instance exceeds a documented desk-scale enumeration cap."""


class ConvergenceError(RuntimeError):
    """An iterative numerical method did not converge."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
