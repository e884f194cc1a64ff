"""pathlens: coordinate-path decompositions of linear models.

Decompose a linear regression model into a sequence of single-coefficient
updates, score the sequence under weighted interpretability losses, and
trace the tradeoff front between predictive cost and interpretability.
"""

from .errors import BudgetError, InfeasibleError, InputError, PathlensError
from .inner import greedy_step, solve_fixed_endpoint, solve_free
from .optimizers import (
    OptimizerConfig,
    best_explanation,
    direct_path,
    exact_path,
    explanation_loss,
    greedy_path,
    local_improvement,
)
from .pareto import (
    FrontReport,
    ParetoPoint,
    default_lambda_grid,
    expected_cost_path,
    solve_tradeoff,
    sweep,
)
from .paths import (
    CoordinatePath,
    WeightSchedule,
    complexity_loss,
    cost_sequence,
    dominates,
    materialize,
    model_complexity,
    path_from_json,
    path_to_json,
    weighted_loss,
)
from .regression import (
    Dataset,
    LinearModel,
    Scaling,
    SufficientStats,
    compute_stats,
    cost,
    load_csv,
    ols,
    standardize,
    stats_from_moments,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "CoordinatePath",
    "Dataset",
    "FrontReport",
    "InfeasibleError",
    "InputError",
    "LinearModel",
    "OptimizerConfig",
    "ParetoPoint",
    "PathlensError",
    "Scaling",
    "SufficientStats",
    "WeightSchedule",
    "best_explanation",
    "complexity_loss",
    "compute_stats",
    "cost",
    "cost_sequence",
    "default_lambda_grid",
    "direct_path",
    "dominates",
    "exact_path",
    "expected_cost_path",
    "explanation_loss",
    "greedy_path",
    "greedy_step",
    "load_csv",
    "local_improvement",
    "materialize",
    "model_complexity",
    "ols",
    "path_from_json",
    "path_to_json",
    "solve_fixed_endpoint",
    "solve_free",
    "solve_tradeoff",
    "standardize",
    "stats_from_moments",
    "sweep",
    "weighted_loss",
]
