"""Custom exceptions for the ac-solve package."""

from typing import Optional


class AcSolveError(Exception):
    """Base exception for all ac-solve errors."""
    pass


class ParseError(AcSolveError):
    """Raised when program, value or interpretation text cannot be parsed.

    Attributes:
        line: 1-based line of the offending input, if known.
        column: 1-based column of the offending input, if known.
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnknownSemiringError(ParseError):
    """Raised when a semiring name does not resolve to a built-in semiring."""
    pass


class SemiringError(AcSolveError):
    """Base exception for semiring arithmetic errors."""
    pass


class CarrierMismatchError(SemiringError, TypeError):
    """Raised when a value is not an element of the semiring's carrier."""
    pass


class UnsupportedOperationError(SemiringError):
    """Raised when a semiring lacks the requested inverse or operation."""
    pass


class ValueParseError(SemiringError, ValueError):
    """Raised when a value literal is malformed or outside the carrier."""
    pass


class InterpretationError(AcSolveError):
    """Raised when an HT-interpretation is malformed."""
    pass


class EvaluationError(AcSolveError):
    """Raised when a formula cannot be evaluated."""
    pass


class UndefinedValueError(EvaluationError):
    """Raised when a sum or product ranges over an infinite support."""
    pass


class DesugarError(AcSolveError):
    """Raised when a surface construct cannot be rewritten."""
    pass


class AnalysisError(AcSolveError):
    """Raised when static analysis rejects a program for an operation.

    Attributes:
        report: The analysis report that caused the rejection, if any.
    """

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class ValueInventionError(AnalysisError):
    """Raised when a program outside the decidable fragment is solved without opt-in."""
    pass


class GroundingError(AcSolveError):
    """Raised when a rule cannot be grounded."""
    pass


class BudgetExceededError(AcSolveError):
    """Raised when a configured resource budget is exhausted."""
    pass


class ProvenanceError(AcSolveError):
    """Raised when a datalog program or edb is unsuitable for provenance."""
    pass


__all__ = [
    'AcSolveError',
    'ParseError',
    'UnknownSemiringError',
    'SemiringError',
    'CarrierMismatchError',
    'UnsupportedOperationError',
    'ValueParseError',
    'InterpretationError',
    'EvaluationError',
    'UndefinedValueError',
    'DesugarError',
    'AnalysisError',
    'ValueInventionError',
    'GroundingError',
    'BudgetExceededError',
    'ProvenanceError',
]
