"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems
(including dense-tensor size caps) exit 2, unusable data exits 3, and
numerical breakdown inside a computation exits 4.
"""


class ConfigError(ValueError):
    """Invalid configuration, request, or argument combination."""


class SizeError(ConfigError):
    """A dense enumeration would exceed the configured cell cap."""


class DataError(ValueError):
    """Input data cannot be used (bad codes, empty columns, ragged files)."""


class NumericalError(ArithmeticError):
    """A computation broke down numerically (all-zero weights, NaNs)."""
