"""Exceptions raised by ttpredict.

Every exception carries the process exit code the command line reports for it:
``1`` for bad input, ``2`` for failures while fitting or running an experiment.
"""

from typing import Optional

__all__ = [
    "TTPredictError",
    "InputValidationError",
    "MatchParseError",
    "MatchValidationError",
    "DomainError",
    "GridTooLargeError",
    "DegenerateFitError",
    "ConvergenceError",
    "InsufficientHistoryError",
    "AllFoldsDegenerateError",
    "StageError",
]


class TTPredictError(Exception):
    """Base class for all errors raised by this package."""

    exit_code: int = 2


class InputValidationError(TTPredictError, ValueError):
    """The input (file, config or argument) is not acceptable."""

    exit_code = 1


class MatchParseError(InputValidationError):
    """A match file is syntactically malformed or lacks a required key."""

    def __init__(self, message: str, line: Optional[int] = None, record: Optional[int] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if record is not None:
            location.append(f"record {record}")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.record = record


class MatchValidationError(InputValidationError):
    """A parsed match violates a type invariant."""

    def __init__(self, match_id: str, message: str, rally_index: Optional[int] = None):
        where = f"match {match_id}"
        if rally_index is not None:
            where += f", rally {rally_index}"
        super().__init__(f"{where}: {message}")
        self.match_id = match_id
        self.rally_index = rally_index


class DomainError(InputValidationError):
    """A value lies outside the domain of an operation (range, dimension, finiteness)."""


class GridTooLargeError(InputValidationError):
    """A hyperparameter grid expands to more combinations than allowed."""

    def __init__(self, size: int, cap: int):
        super().__init__(f"grid has {size} combinations, more than the cap of {cap}")
        self.size = size
        self.cap = cap


class DegenerateFitError(TTPredictError):
    """Training labels contain a single class."""


class ConvergenceError(TTPredictError):
    """An optimizer hit its iteration cap before reaching its tolerance."""

    def __init__(self, message: str, violation: float):
        super().__init__(f"{message} (final violation {violation:.3g})")
        self.violation = violation


class InsufficientHistoryError(TTPredictError):
    """A player has no other matches to aggregate over."""


class AllFoldsDegenerateError(TTPredictError):
    """Every cross-validation fold had single-class training labels."""


class StageError(TTPredictError):
    """Wraps a failure inside an experiment with the name of the failing stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2)
