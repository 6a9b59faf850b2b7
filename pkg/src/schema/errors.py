"""
Exception hierarchy shared by every module of the workbench.

All errors subclass ValueError as well as CpmError, so callers that only
catch ValueError keep working.
"""


class CpmError(Exception):
    """Base class for workbench errors."""


class ParameterError(CpmError, ValueError):
    """Invalid numeric parameter (oversampling, pulse length, survivors, window, ...)."""


class AlphabetError(CpmError, ValueError):
    """Symbol outside the scheme alphabet."""


class FrameMismatchError(CpmError, ValueError):
    """Frame does not fit the scheme or filter bank it is paired with."""


class OracleRefusalError(CpmError, ValueError):
    """Exhaustive search requested on a frame that is too long."""


class EmptyInputError(CpmError, ValueError):
    """An operation that needs at least one record received none."""


class ConfigError(CpmError, ValueError):
    """Experiment configuration failed validation."""
