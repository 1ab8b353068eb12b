"""
Exception hierarchy. Each class carries the CLI exit code it maps to.
"""

from typing import Any, Optional, Tuple


class SVineError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class DomainError(SVineError, ValueError):
    """A parameter or input lies outside its admissible domain."""

    exit_code = 2


class InputError(DomainError):
    """Malformed user input: data files, spec files, reports."""

    exit_code = 2


class NumericError(SVineError, ArithmeticError):
    """A root-finding or evaluation step failed to converge."""

    exit_code = 3

    def __init__(self, message: str, bracket: Optional[Tuple[Any, Any]] = None):
        super().__init__(message)
        self.bracket = bracket


class ConvergenceError(SVineError, RuntimeError):
    """The optimizer stopped without converging; `report` holds the best point found."""

    exit_code = 4

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report
