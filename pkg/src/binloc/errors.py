"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Raised when arguments, configuration, or data values are invalid."""


class FormatError(RuntimeError):
    """Raised when an on-disk artifact is malformed or truncated."""
