"""Within-method parallel explicit and implicit extrapolation ODE solvers.

Adaptive-order, adaptive-step extrapolation methods for stiff and
non-stiff systems of fewer than ~200 equations, with statically
load-balanced multithreading across the independent T-table rows, plus a
work-precision benchmark harness and CLI.
"""

from .core import (
    ConfigError,
    ODEProblem,
    Solution,
    SolverOptions,
    SolverStats,
    Tolerances,
    validate,
)
from .linalg import NonFiniteRHS, SingularMatrix
from .problems import NamedProblem, get_problem, hires, linear_100, options_for, orego, pollu, rober
from .solvers import ALGORITHMS, Algorithm, get_algorithm, solve, solve_fixed
from .steppers import NonFiniteState

__all__ = [
    "ALGORITHMS",
    "Algorithm",
    "ConfigError",
    "NamedProblem",
    "NonFiniteRHS",
    "NonFiniteState",
    "ODEProblem",
    "SingularMatrix",
    "Solution",
    "SolverOptions",
    "SolverStats",
    "Tolerances",
    "get_algorithm",
    "get_problem",
    "hires",
    "linear_100",
    "options_for",
    "orego",
    "pollu",
    "rober",
    "solve",
    "solve_fixed",
    "validate",
]

__version__ = "0.1.0"
