from .errors import DcDualError
from .models import CriticalPointReport, DualPoint, DomainClass, PrimalProblem, SolveConfig, TrialityClass, load_problem
from .solver import find_stationary_points, maximize_dual_on_sa_plus, search_stationary_points

__all__ = [
    "CriticalPointReport",
    "DcDualError",
    "DomainClass",
    "DualPoint",
    "PrimalProblem",
    "SolveConfig",
    "TrialityClass",
    "find_stationary_points",
    "load_problem",
    "maximize_dual_on_sa_plus",
    "search_stationary_points",
]
