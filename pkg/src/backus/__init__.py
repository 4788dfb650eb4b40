"""Interior Backus problem on the unit ball.

Recover a harmonic ``u`` in B with ``|grad u| = g`` on S near ``u = x3`` by a
contraction on the normal derivative of the perturbation ``v = u - x3``.
"""

from .errors import (
    BackusError,
    ConfigError,
    ConvergenceError,
    DomainError,
    PreconditionError,
    ResolutionError,
    SingularInputError,
    SymmetryError,
)
from .harmonic_ext import SphereExpansion, poisson_extend_spectral, project_sphere
from .linearized import KernelOptions, KernelPath, LinearizedSolution, solve_linearized
from .nonlinear import BoundaryData, FixedPointReport, SolverConfig, fixed_point_solve, operator_T, operator_T_tilde
from .poly import Poly

__version__ = "0.1.0"

__all__ = [
    "BackusError",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "PreconditionError",
    "ResolutionError",
    "SingularInputError",
    "SymmetryError",
    "SphereExpansion",
    "poisson_extend_spectral",
    "project_sphere",
    "KernelOptions",
    "KernelPath",
    "LinearizedSolution",
    "solve_linearized",
    "BoundaryData",
    "FixedPointReport",
    "SolverConfig",
    "fixed_point_solve",
    "operator_T",
    "operator_T_tilde",
    "Poly",
]
