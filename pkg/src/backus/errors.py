"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class BackusError(Exception):
    """Base class for every error raised by the package."""


class DomainError(BackusError, ValueError):
    """A point lies outside the open set where a kernel or solver is defined."""


class SingularInputError(BackusError, ValueError):
    """A kernel was asked for its value at its singularity."""


class ResolutionError(BackusError, ValueError):
    """A grid or truncation degree is too coarse for the requested operation."""


class SymmetryError(BackusError, ValueError):
    """Data violates the symmetry class an operator is restricted to."""


class PreconditionError(BackusError, ValueError):
    """An operation precondition on its input does not hold."""


class ConfigError(BackusError, ValueError):
    """Run configuration is malformed or unresolvable."""


class ConvergenceError(BackusError, RuntimeError):
    """The fixed-point iteration did not converge; carries the partial report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
