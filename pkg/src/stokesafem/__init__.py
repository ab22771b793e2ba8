"""Adaptive finite elements for the 2D Stokes problem driven by point
forces, with weighted residual a posteriori error estimation."""

from .mesh import DomainSpec, Mesh, MeshError, bisect, build_initial_mesh
from .quadrature import (
    AccuracyWarning,
    SingularityError,
    WeightSpec,
    weighted_cell_integral,
)
from .elements import DofMap, SchemeSpec, StabParams, build_dof_map
from .assembly import apply_dirichlet, assemble, delta_load
from .solver import Solution, SolverError, solve_saddle
from .estimator import IndicatorField, compute_indicators, global_estimator
from .exact import StokesletSpec, stokeslet, stokeslet_gradient, weighted_error
from .driver import (
    ConvergenceTable,
    RunConfig,
    compute_rates,
    mark,
    plot_convergence,
    run_afem,
)

__all__ = [
    "AccuracyWarning",
    "ConvergenceTable",
    "DofMap",
    "DomainSpec",
    "IndicatorField",
    "Mesh",
    "MeshError",
    "RunConfig",
    "SchemeSpec",
    "SingularityError",
    "Solution",
    "SolverError",
    "StabParams",
    "StokesletSpec",
    "WeightSpec",
    "apply_dirichlet",
    "assemble",
    "bisect",
    "build_dof_map",
    "build_initial_mesh",
    "compute_indicators",
    "compute_rates",
    "delta_load",
    "global_estimator",
    "mark",
    "plot_convergence",
    "run_afem",
    "solve_saddle",
    "stokeslet",
    "stokeslet_gradient",
    "weighted_cell_integral",
    "weighted_error",
]

__version__ = "0.1.0"
