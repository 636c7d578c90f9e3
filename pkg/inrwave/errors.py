"""
Exception hierarchy shared by every layer, plus the CLI exit-code contract.
Leaf classes also derive from ValueError / ArithmeticError so callers that
only know the builtin families still catch them.
"""
from __future__ import annotations

from typing import Any

# ---------- Exit codes (stable scripting contract) ----------
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class InrWaveError(Exception):
    """Base class for all library errors."""


class UsageError(InrWaveError):
    """Bad command-line usage (unknown flag, missing required option)."""


class InvalidInputError(InrWaveError, ValueError):
    """Argument or data violates a documented precondition."""


class CaptureParseError(InvalidInputError):
    """Capture file could not be parsed. row is the 1-based file line."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None) -> None:
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


class ModelFormatError(InvalidInputError):
    """Model file is malformed or its arrays disagree with the declared architecture."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class BudgetTooSmallError(InvalidInputError):
    """Parameter budget is below the smallest model on the search lattice."""

    def __init__(self, message: str, minimum: int = 0) -> None:
        super().__init__(message)
        self.minimum = minimum


class NoSignificantPeakError(InrWaveError, ValueError):
    """Frequency exclusion left no spectrum bins to search."""


class UndefinedMetricError(InrWaveError, ArithmeticError):
    """Metric is undefined for the inputs (zero-energy reference)."""


class NumericalError(InrWaveError, ArithmeticError):
    """A non-finite value appeared in a gradient or loss."""

    def __init__(self, message: str, parameter: str | None = None) -> None:
        super().__init__(message)
        self.parameter = parameter


class TrainingDivergedError(NumericalError):
    """Loss became non-finite or exceeded the divergence guard."""

    def __init__(
        self,
        message: str,
        loss_trace: list[tuple[int, float]] | None = None,
        seed: int | None = None,
    ) -> None:
        super().__init__(message)
        self.loss_trace = list(loss_trace or [])
        self.seed = seed

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": str(self),
            "seed": self.seed,
            "loss_trace": [[e, l] for e, l in self.loss_trace],
        }


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, ArithmeticError):
        return EXIT_NUMERICAL
    return EXIT_DATA
