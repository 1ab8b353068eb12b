"""
Core engine: pair copulas, Rosenblatt recursions, linear-process oracle,
process simulation and inference.
"""

from .errors import ConvergenceError, DomainError, InputError, NumericError, SVineError

__all__ = ["SVineError", "DomainError", "InputError", "NumericError", "ConvergenceError"]
