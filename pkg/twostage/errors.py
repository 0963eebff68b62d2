"""Exception hierarchy shared by the library and the command-line interface."""

from __future__ import annotations


class TwoStageError(Exception):
    """Base class for every error raised by :mod:`twostage`."""

    exit_code: int = 1


class InvalidParametersError(TwoStageError, ValueError):
    """Raised when design or instance parameters fall outside their valid range."""

    exit_code = 2


class InfeasibleInstanceError(TwoStageError):
    """Raised when an instance admits no meaningful continuous optimum."""

    exit_code = 3


class BudgetExceededError(TwoStageError):
    """Raised when exhaustive enumeration would visit more states than allowed."""

    exit_code = 4

    def __init__(self, states: int, budget: int) -> None:
        super().__init__(f"Enumeration needs {states} states, budget is {budget}")
        self.states = states
        self.budget = budget


__all__ = [
    "BudgetExceededError",
    "InfeasibleInstanceError",
    "InvalidParametersError",
    "TwoStageError",
]
