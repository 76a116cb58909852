"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.models import Trajectory


class ModelError(Exception):
    """Base class for every error raised by the package."""


class InvalidInputError(ModelError, ValueError):
    """Non-finite or out-of-domain input."""


class UnitMismatchError(InvalidInputError):
    """A value in one unit system was used where the other was required."""


class NotApplicableError(ModelError, ValueError):
    """The inputs fall outside the case an analysis covers."""


class ExistenceError(ModelError, ValueError):
    """The requested equilibrium does not exist for these parameters."""


class NumericalInstabilityError(ModelError, ArithmeticError):
    """A numerical refinement failed to settle."""


class InsufficientDataError(ModelError, ValueError):
    """Too few samples or section crossings to produce an estimate."""


class ConsistencyError(ModelError, RuntimeError):
    """Two independent computations of the same quantity disagree."""


class IntegrationError(ModelError, RuntimeError):
    """Step-size underflow during integration.

    The trajectory computed up to the failure is kept on ``partial``.
    """

    def __init__(self, message: str, partial: Trajectory | None = None):
        super().__init__(message)
        self.partial = partial
