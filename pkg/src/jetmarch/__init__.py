"""High-order semi-Lagrangian eikonal solvers on 2D regular grids.

The solvers march the 1-jet (and optionally the mixed second partial) of
the eikonal with Dijkstra-like label setting, using Hermite interpolation
and local Fermat-integral minimization for each update.  Includes
first-order baselines, cell-based second-derivative marching, geometric
spreading / WKB amplitude computation for linear speeds, and a CLI
harness for convergence studies.
"""

from .grid import Grid2, RING4, RING8
from .slowness import MODEL_NAMES, SlownessModel, get_model
from .curve import (
    CurveEval,
    UpdateGeometry,
    cubic_curve_mid,
    general_cost,
    graph_curve_mid,
    hermite_K,
    quadratic_cost,
    quadratic_curve,
    reflect_tangent,
    simpson_cost,
)
from .marcher import (
    FAR,
    TRIAL,
    VALID,
    InitRegion,
    MarchState,
    SOLVER_NAMES,
    initialize,
    march,
)
from .update import UpdateResult, bottom_up_update, line_update, solve_update
from .experiments import ErrorReport, FitResult, converge, error_norms, fit_order

__all__ = [
    "Grid2", "RING4", "RING8",
    "SlownessModel", "get_model", "MODEL_NAMES",
    "CurveEval", "UpdateGeometry", "hermite_K", "cubic_curve_mid",
    "graph_curve_mid", "quadratic_curve", "quadratic_cost", "reflect_tangent",
    "simpson_cost", "general_cost",
    "InitRegion", "MarchState", "initialize", "march",
    "FAR", "TRIAL", "VALID", "SOLVER_NAMES",
    "UpdateResult", "solve_update", "line_update", "bottom_up_update",
    "ErrorReport", "FitResult", "error_norms", "fit_order", "converge",
]

__version__ = "0.1.0"
