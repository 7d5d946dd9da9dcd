"""Exception hierarchy shared across the package.

Everything raised on purpose derives from :class:`SimulationError`, so
callers (the CLI in particular) can distinguish expected failures from
genuine bugs with a single except clause.
"""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SimulationError, ValueError):
    """A scalar argument is outside its accepted range."""


class DimensionError(SimulationError, ValueError):
    """Array arguments have incompatible shapes."""


class ConfigurationError(SimulationError):
    """A run configuration is invalid or violates a stability guard."""


class GaplessError(SimulationError, ValueError):
    """The bulk winding number is undefined because the gap closes."""


class ContractViolationError(SimulationError):
    """An internal numerical contract failed (asymmetry, bad residual)."""


class DegenerateInputError(SimulationError, ValueError):
    """The input is too small or too degenerate for the requested analysis."""


class NumericFailureError(SimulationError):
    """A numerical routine failed mid-run; the message names the step."""
