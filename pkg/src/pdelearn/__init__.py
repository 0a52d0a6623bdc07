"""PDE-regularised learning from local-average or point data.

Finite-element solver for minimising a box-average data misfit plus the
energy of an elliptic auxiliary PDE, a parameter heuristic for the box size
and weight, numerical checks of the associated error bounds, and an
experiment harness for convergence sweeps.
"""

from .dataterm import (
    AveragingOperator, DataCloud, DataValues, assemble_data_matrix, build_averaging_operator,
    data_error_dual_norm, data_rhs, data_values, overlap_count, sample_points, tiled_cloud,
)
from .fespace import (
    FeSpace, ScalarField, assemble_load, assemble_mass, assemble_stiffness, cosine_sum,
    evaluate, h1_seminorm_error, interpolate, l2_error, shape_eval,
)
from .grid import Grid, QuadRule, build_grid, clip_box_to_cell, gauss_rule
from .params import HeuristicParams, select_parameters
from .regsolver import ConvergenceError, SolveReport, System, assemble_system, cnorm_sq, energy, solve

__version__ = "0.1.0"
