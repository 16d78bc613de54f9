"""Trust signals: the step-doubling error map and every baseline it is compared to."""

from .errormap import ErrorMap, aggregate, step_doubling, check_probe_horizon
from .wrappers import SolverModel, IdentityModel, LinearDriftModel
from .baselines import (
    ensemble_score,
    tta_score,
    grad_mag_score,
    energy_residual,
    momentum_residual,
)
from .features import pooled_features
from .errorhead import ErrorHead
from .conformal import ConformalScorer
from .richardson import richardson_score, DEFAULT_ORDERS
from .table import write_table, read_table, select, COLUMNS
from .scoring import (
    base_queries,
    query_start,
    fit_error_head,
    build_conformal,
    score_rows,
)

__all__ = [
    "ErrorMap", "aggregate", "step_doubling", "check_probe_horizon",
    "SolverModel", "IdentityModel", "LinearDriftModel",
    "ensemble_score", "tta_score", "grad_mag_score",
    "energy_residual", "momentum_residual",
    "pooled_features", "ErrorHead", "ConformalScorer",
    "richardson_score", "DEFAULT_ORDERS",
    "write_table", "read_table", "select", "COLUMNS",
    "base_queries", "query_start", "fit_error_head", "build_conformal", "score_rows",
]
