"""Exception types shared across the package.

Plain invalid arguments raise ValueError; these classes cover the failure
modes that callers (and the CLI exit-code mapping) need to tell apart.
"""


class BellspinError(Exception):
    """Base class for package-specific failures."""


class ConfigError(BellspinError):
    """Bad or missing configuration (CLI exit code 2)."""


class EmptyResultError(BellspinError):
    """A filter or post-selection removed every sample (CLI exit code 3)."""


class NumericalError(BellspinError):
    """An iterative numerical procedure failed to converge (CLI exit code 4)."""
