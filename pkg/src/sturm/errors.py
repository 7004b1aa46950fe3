"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SturmError(Exception):
    """Base class for all errors raised by :mod:`sturm`."""


class DomainError(SturmError, ValueError):
    """An argument lies outside the domain of the requested function."""


class SupercriticalChargeError(DomainError):
    """Coulomb strength too large for a real effective angular momentum."""


class ConvergenceError(SturmError, ArithmeticError):
    """An iterative evaluation did not reach its tolerance.

    ``last`` and ``previous`` carry the final two iterates so callers can
    judge how far from convergence the evaluation stopped.
    """

    def __init__(self, message: str, last=None, previous=None, iterations: int | None = None):
        super().__init__(message)
        self.last = last
        self.previous = previous
        self.iterations = iterations


class ConditioningError(SturmError, ArithmeticError):
    """A matrix is too ill-conditioned for the requested inversion."""

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class PoleProximityError(ConditioningError):
    """The Green's matrix was requested too close to one of its poles."""


class MultiplicityError(SturmError):
    """A root has a null space of dimension larger than one."""

    def __init__(self, message: str, dimension: int):
        super().__init__(message)
        self.dimension = dimension


class ConfigError(SturmError, ValueError):
    """Invalid problem configuration; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
