"""Independent verification of the dual solver.

Central finite differences check every analytic derivative; a brute-force
grid search refined by descent gives an answer for the global minimum of
Pi that does not depend on duality at all.
"""

from __future__ import annotations

import logging
from typing import Callable, NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, ndimage

from .dual_model import assemble_G, eval_dual, grad_dual, hess_dual
from .errors import NonFiniteValueError, OracleDimensionError
from .models.problem import DualPoint, PrimalProblem
from .models.reports import CriticalPointReport, CrossCheckVerdict, DerivativeCheck, LocalMinimum
from .models.settings import GridSpec, SolveConfig
from .models.shared import Verdict
from .problem_model import eval_primal, eval_primal_batch, grad_primal, hess_primal
from .solver import maximize_dual_on_sa_plus

__all__ = [
    "MAX_ORACLE_DIM",
    "OracleMinimum",
    "brute_force_min",
    "check_derivatives",
    "cross_check",
    "finite_diff_gradient",
    "finite_diff_hessian",
    "relative_error",
]

logger = logging.getLogger(__name__)

MAX_ORACLE_DIM = 3
GRAD_TOL = 1e-6
HESS_TOL = 1e-4
DESCENT_GRAD_TOL = 1e-6
POLISH_STEPS = 20
# minima closer than this (relative, infinity norm) are merged
MINIMA_MERGE_TOL = 1e-4
# oracle minima whose values agree to this (relative) count as tied
TIE_TOL = 1e-6
VALUE_TOL = 1e-3
POINT_TOL = 1e-2


# MARK: Finite differences
def finite_diff_gradient(func: Callable[[NDArray[np.float64]], float], x: ArrayLike, h: float = 1e-6) -> NDArray[np.float64]:
    """
    Central-difference gradient (f(x + h e_k) - f(x - h e_k)) / (2h).

    :param func: Scalar function of a vector
    :type func: Callable
    :param x: Evaluation point
    :type x: ArrayLike
    :param h: Step size (> 0)
    :type h: float
    :raises NonFiniteValueError: when a function value is not finite
    :return: Gradient estimate
    :rtype: NDArray
    """

    if h <= 0:
        raise ValueError("h must be positive")
    x0 = np.asarray(x, dtype=float)
    grad = np.zeros_like(x0)
    for k in range(x0.size):
        step = np.zeros_like(x0)
        step[k] = h
        f_plus = float(func(x0 + step))
        f_minus = float(func(x0 - step))
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFiniteValueError(f"non-finite function value near coordinate {k} of {x0.tolist()}")
        grad[k] = (f_plus - f_minus) / (2.0 * h)
    return grad


def finite_diff_hessian(grad: Callable[[NDArray[np.float64]], NDArray[np.float64]], x: ArrayLike, h: float = 1e-5) -> NDArray[np.float64]:
    """Central differences of an analytic gradient, symmetrized."""

    if h <= 0:
        raise ValueError("h must be positive")
    x0 = np.asarray(x, dtype=float)
    columns = []
    for k in range(x0.size):
        step = np.zeros_like(x0)
        step[k] = h
        g_plus = np.asarray(grad(x0 + step), dtype=float)
        g_minus = np.asarray(grad(x0 - step), dtype=float)
        if not (np.all(np.isfinite(g_plus)) and np.all(np.isfinite(g_minus))):
            raise NonFiniteValueError(f"non-finite gradient near coordinate {k} of {x0.tolist()}")
        columns.append((g_plus - g_minus) / (2.0 * h))
    H = np.column_stack(columns)
    return 0.5 * (H + H.T)


def relative_error(analytic: ArrayLike, numeric: ArrayLike) -> float:
    """max |analytic - numeric| / max(1, max |numeric|)."""

    a = np.asarray(analytic, dtype=float)
    b = np.asarray(numeric, dtype=float)
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b))))


def _check(name: str, point: NDArray[np.float64], analytic: ArrayLike, numeric: ArrayLike, tol: float) -> DerivativeCheck:
    error = relative_error(analytic, numeric)
    return DerivativeCheck(name=name, point=point.tolist(), relative_error=error, tolerance=tol, verdict=Verdict.of(error <= tol))


def _dual_sample(problem: PrimalProblem, rng: np.random.Generator, attempts: int = 200) -> DualPoint | None:
    """Random dual point whose G stays at least 0.5 away from singular."""

    for _ in range(attempts):
        zeta = DualPoint(tau=10.0 ** rng.uniform(-1.0, 0.7, size=problem.p), sigma=rng.uniform(-3.0, 6.0, size=problem.r))
        if float(np.min(np.abs(linalg.eigvalsh(assemble_G(problem, zeta))))) >= 0.5:
            return zeta
    return None


def check_derivatives(problem: PrimalProblem, rng: np.random.Generator, points: int = 20, cfg: SolveConfig | None = None) -> list[DerivativeCheck]:
    """
    Compare analytic primal and dual derivatives with finite differences.

    Primal points are drawn uniformly from [-2, 2]^n; dual points from
    log-uniform tau in [0.1, 5] and uniform sigma in [-3, 6], rejecting
    draws where G is within 0.5 of singular.

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param rng: Random generator
    :type rng: np.random.Generator
    :param points: Points per family
    :type points: int
    :param cfg: Supplies ``singular_tol`` for the dual evaluations
    :type cfg: SolveConfig | None
    :return: One record per derivative and point
    :rtype: list[DerivativeCheck]
    """

    cfg = cfg or SolveConfig()
    checks: list[DerivativeCheck] = []
    for _ in range(points):
        x = rng.uniform(-2.0, 2.0, size=problem.n)
        scale = 1.0 + float(np.linalg.norm(x))
        numeric = finite_diff_gradient(lambda y: eval_primal(problem, y), x, 1e-6 * scale)
        checks.append(_check("grad_primal", x, grad_primal(problem, x), numeric, GRAD_TOL))
        numeric = finite_diff_hessian(lambda y: grad_primal(problem, y), x, 1e-5 * scale)
        checks.append(_check("hess_primal", x, hess_primal(problem, x), numeric, HESS_TOL))

    p, tol = problem.p, cfg.singular_tol
    for _ in range(points):
        zeta = _dual_sample(problem, rng)
        if zeta is None:
            logger.warning("no well-conditioned dual sample found, skipping dual derivative checks")
            break
        z = zeta.as_vector()
        scale = 1.0 + float(np.linalg.norm(z))
        numeric = finite_diff_gradient(lambda v: eval_dual(problem, DualPoint.from_vector(v, p), tol), z, 1e-6 * scale)
        checks.append(_check("grad_dual", z, grad_dual(problem, zeta, tol), numeric, GRAD_TOL))
        numeric = finite_diff_hessian(lambda v: grad_dual(problem, DualPoint.from_vector(v, p), tol), z, 1e-5 * scale)
        checks.append(_check("hess_dual", z, hess_dual(problem, zeta, tol), numeric, HESS_TOL))
    return checks


# MARK: Brute force
class OracleMinimum(NamedTuple):
    x: NDArray[np.float64]
    value: float
    local_minima: list[LocalMinimum]


def _grid_axes(grid: GridSpec) -> list[NDArray[np.float64]]:
    return [np.linspace(lo, hi, grid.points_per_axis) for lo, hi in zip(grid.lower, grid.upper)]


def _seed_cells(values: NDArray[np.float64], coords: NDArray[np.float64], count: int) -> NDArray[np.float64]:
    """Up to ``count`` grid points, discrete local minima first, ordered by value then lexicographic x."""

    filled = np.where(np.isnan(values), np.inf, values)
    local = (filled == ndimage.minimum_filter(filled, size=3, mode="nearest")) & np.isfinite(filled)
    flat_values = filled.reshape(-1)
    flat_coords = coords.reshape(-1, coords.shape[-1])

    def ordered(mask: NDArray[np.bool_]) -> NDArray[np.intp]:
        idx = np.flatnonzero(mask.reshape(-1))
        keys = [flat_coords[idx, k] for k in reversed(range(flat_coords.shape[1]))]
        return idx[np.lexsort((*keys, flat_values[idx]))]

    chosen = list(ordered(local)[:count])
    if len(chosen) < count:
        taken = set(chosen)
        chosen += [i for i in ordered(np.isfinite(filled)) if i not in taken][: count - len(chosen)]
    return flat_coords[chosen]


def _descend(problem: PrimalProblem, x0: NDArray[np.float64], grid: GridSpec) -> LocalMinimum:
    """Armijo gradient descent followed by a few safeguarded Newton steps."""

    x = x0.copy()
    value = eval_primal(problem, x)
    g = grad_primal(problem, x)
    t = 1.0
    for _ in range(grid.refine_steps):
        if float(np.max(np.abs(g))) <= DESCENT_GRAD_TOL:
            break
        t = min(1.0, 2.0 * t)
        gg = float(g @ g)
        while t > 1e-16:
            trial = x - t * g
            try:
                trial_value = eval_primal(problem, trial)
            except NonFiniteValueError:
                trial_value = np.inf
            if trial_value <= value - grid.armijo_c * t * gg:
                break
            t *= 0.5
        else:
            break
        x, value = trial, trial_value
        g = grad_primal(problem, x)

    for _ in range(POLISH_STEPS):
        if float(np.max(np.abs(g))) <= 1e-12:
            break
        H = hess_primal(problem, x)
        if float(linalg.eigvalsh(H)[0]) <= 0:
            break
        trial = x - linalg.solve(H, g, assume_a="pos")
        try:
            trial_value = eval_primal(problem, trial)
            trial_g = grad_primal(problem, trial)
        except NonFiniteValueError:
            break
        if trial_value > value + 1e-12 * (1.0 + abs(value)) and float(np.max(np.abs(trial_g))) >= float(np.max(np.abs(g))):
            break
        x, value, g = trial, trial_value, trial_g
    return LocalMinimum(x=x.tolist(), value=value, grad_norm=float(np.max(np.abs(g))))


def _merge_minima(minima: list[LocalMinimum]) -> list[LocalMinimum]:
    unique: list[LocalMinimum] = []
    for candidate in sorted(minima, key=lambda m: (m.value, tuple(m.x))):
        cx = np.asarray(candidate.x)
        if any(float(np.max(np.abs(cx - np.asarray(kept.x)))) <= MINIMA_MERGE_TOL * (1.0 + float(np.max(np.abs(cx)))) for kept in unique):
            continue
        unique.append(candidate)
    return unique


def brute_force_min(problem: PrimalProblem, grid: GridSpec | None = None) -> OracleMinimum:
    """
    Global minimum of Pi by grid evaluation and descent refinement.

    Pi is evaluated on the full tensor grid, the best ``grid.seeds`` cells
    (discrete local minima first) are refined by Armijo descent, and the
    limit points are merged.

    :param problem: Problem instance with n <= 3
    :type problem: PrimalProblem
    :param grid: Grid; defaults to [-5, 5]^n with 201 points per axis
    :type grid: GridSpec | None
    :raises OracleDimensionError: when n > 3
    :return: Best point, its value and every distinct limit point sorted by value
    :rtype: OracleMinimum
    """

    if problem.n > MAX_ORACLE_DIM:
        raise OracleDimensionError(f"oracle limited to n ≤ {MAX_ORACLE_DIM} (got n = {problem.n})")
    grid = grid or GridSpec.box(problem.n)
    if grid.n != problem.n:
        raise OracleDimensionError(f"grid has {grid.n} axes but n = {problem.n}")

    mesh = np.meshgrid(*_grid_axes(grid), indexing="ij")
    coords = np.stack(mesh, axis=-1)
    values = eval_primal_batch(problem, coords.reshape(-1, problem.n), on_overflow="mask").reshape(mesh[0].shape)
    logger.info("oracle grid: %d cells, best %.6g", values.size, float(np.nanmin(values)))

    minima = [_descend(problem, seed, grid) for seed in _seed_cells(values, coords, grid.seeds)]
    minima = _merge_minima(minima)
    best = minima[0]
    return OracleMinimum(x=np.asarray(best.x), value=best.value, local_minima=minima)


# MARK: Cross-check
def cross_check(problem: PrimalProblem, cfg: SolveConfig | None = None, grid: GridSpec | None = None, report: CriticalPointReport | None = None) -> CrossCheckVerdict:
    """
    Compare the MIN_MAX solution with the brute-force oracle.

    PASS when the values agree to 1e-3 (1 + |value|) and the points to 1e-2
    in the infinity norm. When several oracle minima tie in value, the
    point comparison is skipped and only values are compared.

    ``report`` may carry an already computed MIN_MAX report.

    :raises OracleDimensionError: when n > 3
    """

    cfg = cfg or SolveConfig()
    if problem.n > MAX_ORACLE_DIM:
        raise OracleDimensionError(f"oracle limited to n ≤ {MAX_ORACLE_DIM} (got n = {problem.n})")
    report = report or maximize_dual_on_sa_plus(problem, cfg)
    oracle = brute_force_min(problem, grid)

    x_dual = np.asarray(report.x)
    tied = [m for m in oracle.local_minima if abs(m.value - oracle.value) <= TIE_TOL * (1.0 + abs(oracle.value))]
    closest = min(tied, key=lambda m: float(np.max(np.abs(np.asarray(m.x) - x_dual))))
    value_error = abs(report.primal_value - oracle.value)
    x_error = float(np.max(np.abs(np.asarray(closest.x) - x_dual)))
    values_only = len(tied) > 1

    ok = value_error <= VALUE_TOL * (1.0 + abs(report.primal_value))
    if not values_only:
        ok = ok and x_error <= POINT_TOL
    if not ok:
        logger.warning("oracle disagrees: dual %.10g vs oracle %.10g", report.primal_value, oracle.value)
    return CrossCheckVerdict(
        verdict=Verdict.of(ok),
        dual_value=report.primal_value,
        oracle_value=oracle.value,
        x_dual=report.x,
        x_oracle=closest.x,
        value_error=value_error,
        x_error=x_error,
        values_only=values_only,
        delta=report.delta,
        local_minima=oracle.local_minima,
    )
