"""Exception hierarchy shared across the package."""


class AecError(Exception):
    """Base class for all errors raised by sbss_aec."""


class ConfigError(AecError, ValueError):
    """Invalid configuration or parameter range."""


class StructuralError(AecError, ValueError):
    """Array shapes or metadata that do not fit together."""


class NumericError(AecError, ArithmeticError):
    """A quantity that must be finite or positive is not."""


class SolverError(NumericError):
    """Linear solve failed (matrix singular beyond regularization)."""


class DegenerateFilterError(NumericError):
    """Filter first element too small to normalize."""


class WavFormatError(AecError, ValueError):
    """Malformed or unsupported WAV data."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
