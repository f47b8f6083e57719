"""Hinged Euler-Bernoulli beam solvers: Hermite cubic finite elements in space,
Crank-Nicolson horizontal method of lines in time."""

from .banded import BandedMatrix, SingularMatrixError, lu_factor
from .fem import CoefficientSet, HermiteField, assemble_load, assemble_operator, l2_norm_error, l2_project
from .hmol import TimeGrid, Trajectory, UnsteadyProblem, cn_step, initialize, run
from .mesh import GaussRule, Mesh1D, gauss_rule, reference_second_derivatives, shape_eval
from .steady import BoundaryData, SteadyProblem, auxiliary_theta, solve_steady, solve_steady_homogenized
from .verification import (
    ConvergenceReport,
    fit_order,
    manufacture_steady,
    manufacture_unsteady,
    run_steady_study,
    run_unsteady_study,
)

__version__ = "0.1.0"
