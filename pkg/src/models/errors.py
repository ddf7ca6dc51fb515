"""Domain errors for fracham.

All errors derive from ValueError so that callers treating invalid input
generically keep working; the CLI layer maps them to exit codes.
"""

from typing import Optional


class FrachamError(ValueError):
    """Base class for every error raised by the numerical layer."""


class GridError(FrachamError):
    """Invalid grid parameters (T, N)."""


class OrderError(FrachamError):
    """Fractional order outside its admissible range."""


class GridMismatchError(FrachamError):
    """Two operands live on different grids."""


class HypothesisError(FrachamError):
    """Invalid parameters passed to a hypothesis checker."""


class RankDeficiencyError(FrachamError):
    """Basis candidates are numerically linearly dependent."""


class BoundaryError(FrachamError):
    """Quadrature evaluation requested too close to the grid edge."""


class UnknownInstanceError(FrachamError):
    """Instance name not found in the library."""


class ExportFormatError(FrachamError):
    """Unsupported export format."""


class ConfigError(FrachamError):
    """Experiment config could not be parsed or validated."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ) -> None:
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)
