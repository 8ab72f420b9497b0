"""Sparsity-constrained minimization: models, optimality checks and solvers."""
from .experiments import ExperimentReport, basin_grid, run_multistart
from .fixtures import reproduce_fixtures
from .instances import ProblemInstance, generate_gaussian_ls, generate_quadratic, generate_quartic
from .models import LeastSquaresModel, QuadraticModel, QuarticModel, UnboundedDirectionError
from .optimality import (
    BFCatalog,
    OptimalityCertificate,
    certify,
    enumerate_bf,
    is_basic_feasible,
    is_cw_minimum,
    is_l_stationary,
    stationarity_level,
)
from .rng import CounterRNG
from .solvers import (
    SolverConfig,
    SolverTrace,
    Termination,
    greedy_sparse_simplex,
    iht,
    matching_pursuit,
    orthogonal_matching_pursuit,
    partial_sparse_simplex,
    solve,
)
from .sparsity import SparseVector, project_cs

__version__ = "0.1.0"
