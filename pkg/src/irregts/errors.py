"""Exception hierarchy; the CLI maps each class to an exit code."""


class IrregTSError(Exception):
    exit_code = 1


class ConfigError(IrregTSError, ValueError):
    """Invalid configuration or arguments."""

    exit_code = 2


class DataError(IrregTSError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 3


class NumericError(IrregTSError, ArithmeticError):
    """A numerical procedure failed or produced a degenerate result."""

    exit_code = 4
