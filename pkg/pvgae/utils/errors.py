"""
Exception hierarchy for pvgae.

Every error raised on purpose by the toolkit derives from ``PvgaeError`` so
the command-line frontend can turn it into a readable message and a
non-zero exit code. Most classes also derive from the closest builtin
(``ValueError``, ``ArithmeticError``) so callers that only know the
builtins still catch them.
"""

from typing import Optional, Any


class PvgaeError(Exception):
    """Base class for all pvgae errors."""


class DimensionError(PvgaeError, ValueError):
    """Raised when tensor or matrix shapes do not line up."""

    def __init__(self, operation: str, *shapes: tuple):
        self.operation = operation
        self.shapes = shapes
        rendered = " and ".join(str(list(s)) for s in shapes)
        super().__init__(f"{operation}: incompatible shapes {rendered}")


class ContractError(PvgaeError, ValueError):
    """Raised when an operation's precondition is violated."""


class DomainError(ContractError):
    """Raised when an argument lies outside a function's domain."""


class NumericError(PvgaeError, ArithmeticError):
    """Raised when a computation produces NaN or infinite values."""


class ConfigError(PvgaeError, ValueError):
    """Raised for invalid or unknown configuration values."""


class FormatError(PvgaeError, ValueError):
    """Raised when a file does not follow its documented format."""


class ParseError(PvgaeError, ValueError):
    """Raised when an input file cannot be parsed."""

    def __init__(self, path: Any, line: Optional[int], message: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class ConsistencyError(PvgaeError, ValueError):
    """Raised when several inputs disagree with one another."""

    def __init__(self, message: str, path: Any = None, line: Optional[int] = None):
        self.path = str(path) if path is not None else None
        self.line = line
        if path is not None:
            where = f"{path}:{line}" if line is not None else str(path)
            message = f"{where}: {message}"
        super().__init__(message)


class InfeasibleSplitError(ContractError):
    """Raised when a link split cannot satisfy its invariants."""


class DegenerateLabelError(ContractError):
    """Raised when a classifier would be trained on a single class."""


class TrainingAborted(PvgaeError):
    """
    Raised when training hits a non-finite value.

    Carries the failing epoch, the last finite loss breakdown and the
    partial history so callers can persist what was computed.
    """

    def __init__(self, epoch: int, last_losses: Any = None, history: Any = None, reason: str = ""):
        self.epoch = epoch
        self.last_losses = last_losses
        self.history = history
        message = f"training aborted at epoch {epoch}"
        if reason:
            message += f": {reason}"
        super().__init__(message)
