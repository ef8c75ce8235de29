"""Exception types shared across the package."""


class PrdaError(Exception):
    """Base class for package-specific errors."""


class ShapeError(PrdaError, ValueError):
    """Operands have incompatible shapes."""


class DegenerateInput(PrdaError, ValueError):
    """Input is too small or too degenerate for the requested operation."""


class DataError(PrdaError, ValueError):
    """Data contains invalid values (non-finite entries, bad labels)."""


class ParseError(PrdaError, ValueError):
    """A file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SingleClassError(PrdaError, ValueError):
    """Training data contains fewer than two classes."""


class ConfigError(PrdaError, ValueError):
    """Invalid configuration value."""
