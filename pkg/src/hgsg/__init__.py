"""Locally and dimension adaptive sparse grid interpolation and quadrature."""

from hgsg.adaptive import AdaptiveConfig, RefineReport, create_grid, global_error, index_error, point_error, run
from hgsg.basis import BasisSpec, DegreeRule, eval_1d, eval_nd, volume_1d, volume_nd
from hgsg.estimator import HGSGInterpolator
from hgsg.functions import TestFunction, coefficient_schedule, compute_metrics, make_test_function
from hgsg.interpolant import GridState, SurplusRecord
from hgsg.lattice import Coord1D, LatticePoint

__all__ = [
    "AdaptiveConfig",
    "BasisSpec",
    "Coord1D",
    "DegreeRule",
    "GridState",
    "HGSGInterpolator",
    "LatticePoint",
    "RefineReport",
    "SurplusRecord",
    "TestFunction",
    "coefficient_schedule",
    "compute_metrics",
    "create_grid",
    "eval_1d",
    "eval_nd",
    "global_error",
    "index_error",
    "make_test_function",
    "point_error",
    "run",
    "volume_1d",
    "volume_nd",
]

__version__ = "0.1.0"
