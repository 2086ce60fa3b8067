"""Exception hierarchy with stable machine-readable error codes.

The CLI maps ``code`` to exit codes and prints it in the error JSON, so the
values are part of the external interface and must stay stable.
"""


class SpecmixError(Exception):
    """Base class for all package errors."""

    code = "internal"


class SchemaError(SpecmixError):
    """Column schema is invalid or does not match the file."""

    code = "schema"


class DataError(SpecmixError):
    """Input data cannot be parsed or is degenerate after preprocessing."""

    code = "data"


class ConfigError(SpecmixError):
    """A configuration value violates an operation's preconditions."""

    code = "config"


class SpectralGapError(SpecmixError):
    """The bipartite reduction has no usable spectral gap (gamma_K ~ 1)."""

    code = "spectral-gap"


class ConvergenceError(SpecmixError):
    """An iterative solver exhausted its iteration budget."""

    code = "convergence"
