"""Aggregated exports for problem data, configuration and result records."""

from .problem import CanonicalMeasure, DualPoint, PrimalProblem, SpectralBounds
from .problem_file import ProblemFile, load_problem
from .reports import CriticalPointReport, CrossCheckVerdict, DerivativeCheck, LocalMinimum, StationarySearch
from .settings import GridSpec, SolveConfig
from .shared import ContourKind, DomainClass, TableSchema, TrialityClass, Verdict

__all__ = [
    "CanonicalMeasure",
    "ContourKind",
    "CriticalPointReport",
    "CrossCheckVerdict",
    "DerivativeCheck",
    "DomainClass",
    "DualPoint",
    "GridSpec",
    "LocalMinimum",
    "PrimalProblem",
    "ProblemFile",
    "SolveConfig",
    "SpectralBounds",
    "StationarySearch",
    "TableSchema",
    "TrialityClass",
    "Verdict",
    "load_problem",
]
