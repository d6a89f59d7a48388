"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when instance or solution data violates a domain constraint."""


class ResourceLimitError(RuntimeError):
    """Raised when a solver would exceed its configured state/node budget."""
