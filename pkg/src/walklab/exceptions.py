"""Exceptions raised by walklab.

Every exception carries the process exit code that the command line
interface uses when the error reaches it.
"""

from __future__ import annotations

from typing import Any

__all__ = [
    "WalklabError",
    "InvalidInputError",
    "InvalidWordError",
    "UsageError",
    "UnsupportedOperationError",
    "DegenerateGrowthError",
    "InsufficientDepthError",
    "UnreliableComparisonError",
    "BudgetExceededError",
    "CutoffExceededError",
    "UndefinedDriftError",
    "OptimizationFailedError",
]


class WalklabError(Exception):
    """Base class for walklab errors."""

    exit_code: int = 1
    """Exit code used by the command line interface."""


class InvalidInputError(WalklabError, ValueError):
    """Raised for malformed presentations, words, measures or systems."""

    exit_code = 2


class InvalidWordError(InvalidInputError):
    """Raised when a word uses letters outside a presentation's alphabet."""


class UsageError(InvalidInputError):
    """Raised when operands belong to different presentations, or an
    operation is called with arguments outside its domain.
    """


class UnsupportedOperationError(InvalidInputError):
    """Raised when a group operation is requested from a semigroup."""


class DegenerateGrowthError(InvalidInputError):
    """Raised when sphere counts cannot support a growth estimate."""


class InsufficientDepthError(InvalidInputError):
    """Raised when a budget leaves fewer than two exact convolution steps."""


class UnreliableComparisonError(InvalidInputError):
    """Raised when too many walks leave a system's distance table."""


class BudgetExceededError(WalklabError):
    """Raised when an element budget stops a computation.

    Parameters
    ----------
    message
        Description of the exhausted budget.
    partial
        Whatever was completed before the budget ran out (for example the
        finished BFS levels, or the last complete convolution).
    completed
        The largest depth or step count that was fully completed.
    """

    exit_code = 3

    def __init__(
        self, message: str, *, partial: Any = None, completed: int = 0
    ) -> None:
        super().__init__(message)
        self.partial = partial
        self.completed = completed


class CutoffExceededError(BudgetExceededError):
    """Raised when an element lies outside a precomputed distance table."""


class UndefinedDriftError(WalklabError):
    """Raised when a quantity is divided by a drift that may be zero."""

    exit_code = 4


class OptimizationFailedError(WalklabError):
    """Raised when every optimizer restart hits an undefined objective."""

    exit_code = 5
