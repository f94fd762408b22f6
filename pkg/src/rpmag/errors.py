"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised for invalid user-facing configuration (bad flags, malformed specs)."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine cannot produce a trustworthy result."""
