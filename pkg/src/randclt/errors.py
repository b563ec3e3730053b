"""Exception types shared across the package.

ParameterError maps to CLI exit code 2, NumericFailure to exit code 3.
"""


class ParameterError(ValueError):
    """Invalid argument, configuration, or system descriptor."""


class UnsupportedModeError(ParameterError):
    """Operation not defined for this system (e.g. exact mode on a continuous sample space)."""


class NumericFailure(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""
