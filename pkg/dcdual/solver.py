"""Stationary points of the canonical dual function.

On S_a+ the dual function is concave, so its maximizer is found by damped
Newton ascent from an interior start. Elsewhere stationary points are
located by damped Newton on grad Pi^d = 0 with the merit |grad|^2 / 2 from
a seeded set of random starts. Every step keeps tau > 0 with a
fraction-to-boundary rule and keeps the inertia of G(zeta) unchanged, so an
iterate never crosses det G = 0.

Each converged pair is turned into a :class:`CriticalPointReport` carrying
the recovered x = G^-1 f, the three values Pi, Xi, Pi^d, the Delta bound
and the triality class.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
from tqdm import tqdm

from .dual_model import DualState, delta_bound, domain_of_state, dual_state, eval_dual, hess_dual, solve_G, total_complementary
from .errors import DcDualError, DualDomainError, MaxIterExceededError, NoInteriorStartError, NonFiniteValueError, SingularGError
from .models.problem import DualPoint, PrimalProblem
from .models.reports import CriticalPointReport, StationarySearch
from .models.settings import SolveConfig
from .models.shared import DomainClass, TrialityClass
from .problem_model import combine_matrices, eval_primal, grad_primal, hess_primal

__all__ = [
    "build_report",
    "classify_triality",
    "find_stationary_points",
    "maximize_dual_on_sa_plus",
    "recover_primal",
    "sa_plus_start",
    "search_stationary_points",
    "verify_gap",
]

logger = logging.getLogger(__name__)

ARMIJO_C = 1e-4
MAX_HALVINGS = 60
# a stalled line search is accepted as converged within this multiple of grad_tol
STALL_FACTOR = 1e3
TAU_SEED_RANGE = (-3.0, 3.0)
SIGMA_SEED_RANGE = (-10.0, 10.0)
# log10 of the fraction of the sigma-ray reach left between an S_a- seed and det G = 0
BOUNDARY_GAP_RANGE = (-3.0, 0.0)
SA_MINUS_DRAWS_PER_SEED = 200
INTERIOR_START_INDEX = -1


class _Mode(StrEnum):
    ASCENT = "ascent"
    ROOT = "root"


# MARK: Newton
def _newton_direction(hess: NDArray[np.float64], grad: NDArray[np.float64], mode: _Mode) -> NDArray[np.float64]:
    try:
        direction = linalg.solve(hess, -grad, assume_a="sym", check_finite=False)
    except linalg.LinAlgError:
        direction = linalg.lstsq(hess, -grad, check_finite=False)[0]
    if not np.all(np.isfinite(direction)):
        direction = grad.copy() if mode == _Mode.ASCENT else -grad
    if mode == _Mode.ASCENT and float(grad @ direction) <= 0.0:
        logger.debug("Newton direction is not an ascent direction, using the gradient")
        direction = grad.copy()
    return direction


def _trial_state(problem: PrimalProblem, values: NDArray[np.float64], cfg: SolveConfig) -> DualState | None:
    tau = values[: problem.p]
    if tau.size and float(np.min(tau)) < cfg.tau_floor:
        return None
    try:
        state = dual_state(problem, DualPoint.from_vector(values, problem.p), cfg.singular_tol)
    except (SingularGError, DualDomainError, NonFiniteValueError):
        return None
    if not (np.isfinite(state.value) and np.all(np.isfinite(state.grad))):
        return None
    return state


def _acceptable(current: DualState, trial: DualState, t: float, slope: float, cfg: SolveConfig, mode: _Mode) -> bool:
    if trial.positive_count != current.positive_count:
        return False
    if trial.min_abs_eigenvalue < (1.0 - cfg.cone_margin) * current.min_abs_eigenvalue:
        return False
    g_now = float(np.linalg.norm(current.grad))
    g_new = float(np.linalg.norm(trial.grad))
    if mode == _Mode.ASCENT:
        return trial.value >= current.value + ARMIJO_C * t * slope or g_new <= (1.0 - ARMIJO_C * t) * g_now
    return g_new**2 <= (1.0 - 2.0 * ARMIJO_C * t) * g_now**2


def _line_search(problem: PrimalProblem, state: DualState, direction: NDArray[np.float64], cfg: SolveConfig, mode: _Mode) -> DualState | None:
    """Backtrack from the fraction-to-boundary step until the trial point is acceptable."""

    t = 1.0
    d_tau = direction[: problem.p]
    shrinking = d_tau < 0
    if np.any(shrinking):
        t = min(1.0, cfg.cone_margin * float(np.min(state.zeta.tau[shrinking] / -d_tau[shrinking])))
    slope = float(state.grad @ direction)
    origin = state.zeta.as_vector()
    for _ in range(MAX_HALVINGS):
        trial = _trial_state(problem, origin + t * direction, cfg)
        if trial is not None and _acceptable(state, trial, t, slope, cfg, mode):
            return trial
        t *= 0.5
    return None


def _newton(problem: PrimalProblem, zeta0: DualPoint, cfg: SolveConfig, mode: _Mode) -> tuple[DualState, int]:
    """
    Damped Newton iteration on grad Pi^d.

    :raises MaxIterExceededError: when max_iter is reached or the line search stalls away from stationarity
    :return: Final state and number of steps taken
    :rtype: tuple[DualState, int]
    """

    state = dual_state(problem, zeta0, cfg.singular_tol)
    for iteration in range(cfg.max_iter):
        if state.grad_norm <= cfg.grad_tol:
            return state, iteration
        direction = _newton_direction(state.hessian(problem), state.grad, mode)
        step = _line_search(problem, state, direction, cfg, mode)
        if step is None:
            if state.grad_norm <= STALL_FACTOR * cfg.grad_tol:
                logger.debug("line search stalled at |grad|=%.3g, accepting", state.grad_norm)
                return state, iteration
            raise MaxIterExceededError(state.zeta.as_vector(), state.grad_norm, "line search")
        logger.debug("%s step %d: |grad| %.3e -> %.3e", mode, iteration, state.grad_norm, step.grad_norm)
        state = step
    if state.grad_norm <= cfg.grad_tol:
        return state, cfg.max_iter
    raise MaxIterExceededError(state.zeta.as_vector(), state.grad_norm, "iterations")


# MARK: Interior start
def _is_interior(problem: PrimalProblem, tau: NDArray[np.float64], sigma: NDArray[np.float64], cfg: SolveConfig) -> bool:
    eigenvalues = linalg.eigvalsh(combine_matrices(problem, tau, sigma), check_finite=False)
    return float(eigenvalues[0]) > cfg.singular_tol * max(1.0, float(np.max(np.abs(eigenvalues))))


def sa_plus_start(problem: PrimalProblem, cfg: SolveConfig | None = None) -> DualPoint:
    """
    Find a dual point with G(zeta) positive definite.

    Starts from tau = 1, sigma = 0 and doubles tau; when that does not
    reach S_a+, restarts from tau = 1, sigma = 1 and doubles sigma, which
    always dominates C eventually because every B_j is positive definite.
    The tau ray is tried even when no single A_i is positive definite,
    since a sum of semidefinite A_i can be.

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param cfg: Solver configuration (``max_start_doublings`` bounds each ray)
    :type cfg: SolveConfig | None
    :raises NoInteriorStartError: when neither ray enters S_a+ within the budget
    :return: A point of S_a+
    :rtype: DualPoint
    """

    cfg = cfg or SolveConfig()
    tau = np.ones(problem.p)
    sigma = np.zeros(problem.r)
    if problem.p:
        for _ in range(cfg.max_start_doublings + 1):
            if _is_interior(problem, tau, sigma, cfg):
                return DualPoint(tau=tau, sigma=sigma)
            tau = 2.0 * tau
    if problem.r:
        tau = np.ones(problem.p)
        sigma = np.ones(problem.r)
        for _ in range(cfg.max_start_doublings + 1):
            if _is_interior(problem, tau, sigma, cfg):
                return DualPoint(tau=tau, sigma=sigma)
            sigma = 2.0 * sigma
    raise NoInteriorStartError(f"no point with G(zeta) positive definite found after {cfg.max_start_doublings} doublings")


# MARK: Reports
def recover_primal(problem: PrimalProblem, zeta: DualPoint, singular_tol: float = 1e-10) -> NDArray[np.float64]:
    """
    x = G(zeta)^-1 f.

    :raises SingularGError: when G(zeta) is singular
    """

    return solve_G(problem, zeta, problem.f, singular_tol)


def _max_pairwise(values: tuple[float, float, float]) -> float:
    a, b, c = values
    return max(abs(a - b), abs(a - c), abs(b - c))


def verify_gap(problem: PrimalProblem, report: CriticalPointReport) -> float:
    """Largest pairwise difference among Pi(x), Xi(x, zeta) and Pi^d(zeta), recomputed from the report."""

    zeta = report.zeta
    return _max_pairwise((eval_primal(problem, report.x), total_complementary(problem, report.x, zeta), eval_dual(problem, zeta)))


def _triality_from(domain: DomainClass, dual_eigs: ArrayLike, m: int, n: int, margin: float) -> TrialityClass:
    eigs = np.asarray(dual_eigs, dtype=float)
    if domain == DomainClass.SA_PLUS:
        return TrialityClass.MIN_MAX
    if domain != DomainClass.SA_MINUS or eigs.size == 0:
        return TrialityClass.UNCLASSIFIED
    if float(np.max(eigs)) <= -margin:
        return TrialityClass.DOUBLE_MAX
    if float(np.min(eigs)) >= margin and m == n:
        return TrialityClass.DOUBLE_MIN
    return TrialityClass.UNCLASSIFIED


def _sign_transfer(triality: TrialityClass, primal_eigs: NDArray[np.float64], margin: float) -> bool | None:
    scale = margin * max(1.0, float(np.max(np.abs(primal_eigs))))
    if triality == TrialityClass.DOUBLE_MAX:
        return bool(float(np.max(primal_eigs)) <= scale)
    if triality == TrialityClass.DOUBLE_MIN:
        return bool(float(np.min(primal_eigs)) >= -scale)
    return None


def classify_triality(problem: PrimalProblem, report: CriticalPointReport, cfg: SolveConfig | None = None) -> TrialityClass:
    """
    Triality class of a converged pair.

    MIN_MAX on S_a+. On S_a-: DOUBLE_MAX when the dual Hessian is negative
    definite, DOUBLE_MIN when it is positive definite and m = n, and
    UNCLASSIFIED otherwise.

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param report: Report holding a converged stationary pair
    :type report: CriticalPointReport
    :param cfg: Supplies ``hessian_margin`` and ``singular_tol``
    :type cfg: SolveConfig | None
    :return: Triality tag
    :rtype: TrialityClass
    """

    cfg = cfg or SolveConfig()
    eigs = report.dual_hessian_eigenvalues
    if not eigs and report.domain == DomainClass.SA_MINUS:
        eigs = linalg.eigvalsh(hess_dual(problem, report.zeta, cfg.singular_tol)).tolist()
    return _triality_from(report.domain, eigs, problem.m, problem.n, cfg.hessian_margin)


def build_report(problem: PrimalProblem, state: DualState, cfg: SolveConfig, iterations: int = 0, start_index: int = INTERIOR_START_INDEX) -> CriticalPointReport:
    """Assemble the report of a Newton limit point."""

    zeta = state.zeta
    x = state.x
    primal_value = eval_primal(problem, x)
    complementary_value = total_complementary(problem, x, zeta)
    gap = _max_pairwise((primal_value, complementary_value, state.value))
    domain = domain_of_state(state, cfg.singular_tol)
    dual_eigs = linalg.eigvalsh(state.hessian(problem), check_finite=False)
    primal_eigs = linalg.eigvalsh(hess_primal(problem, x), check_finite=False)
    triality = _triality_from(domain, dual_eigs, problem.m, problem.n, cfg.hessian_margin)
    sign_transfer = _sign_transfer(triality, primal_eigs, cfg.hessian_margin)
    if sign_transfer is False:
        logger.warning("primal Hessian sign does not match %s at zeta=%s", triality, zeta.as_vector().tolist())
    if gap > cfg.gap_tol:
        logger.warning("duality gap %.3e above tolerance at zeta=%s", gap, zeta.as_vector().tolist())
    return CriticalPointReport(
        tau=zeta.tau.tolist(),
        sigma=zeta.sigma.tolist(),
        x=x.tolist(),
        domain=domain,
        triality=triality,
        primal_value=primal_value,
        dual_value=state.value,
        complementary_value=complementary_value,
        gap_residual=gap,
        delta=delta_bound(problem, problem.spectral_bounds, zeta),
        grad_norm_dual=state.grad_norm,
        grad_norm_primal=float(np.max(np.abs(grad_primal(problem, x)))),
        converged=bool(state.grad_norm <= STALL_FACTOR * cfg.grad_tol and gap <= cfg.gap_tol),
        iterations=iterations,
        start_index=start_index,
        dual_hessian_eigenvalues=dual_eigs.tolist(),
        primal_hessian_eigenvalues=primal_eigs.tolist(),
        sign_transfer_holds=sign_transfer,
    )


# MARK: Global maximization
def maximize_dual_on_sa_plus(problem: PrimalProblem, cfg: SolveConfig | None = None) -> CriticalPointReport:
    """
    Maximize Pi^d over S_a+ and recover the primal point.

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param cfg: Solver configuration
    :type cfg: SolveConfig | None
    :raises NoInteriorStartError: when no point of S_a+ is found
    :raises MaxIterExceededError: when Newton ascent does not converge
    :raises SingularGError: when the start point is singular
    :return: MIN_MAX report; ``delta > 0`` certifies x as the global minimizer of Pi
    :rtype: CriticalPointReport
    """

    cfg = cfg or SolveConfig()
    start = sa_plus_start(problem, cfg)
    logger.info("interior start zeta=%s", start.as_vector().tolist())
    state, iterations = _newton(problem, start, cfg, _Mode.ASCENT)
    report = build_report(problem, state, cfg, iterations, INTERIOR_START_INDEX)
    logger.info("S_a+ maximum after %d steps: Pi^d=%.10g, delta=%.6g", iterations, report.dual_value, report.delta)
    return report


# MARK: Multistart
@dataclass(frozen=True)
class _StartOutcome:
    index: int
    report: CriticalPointReport | None = None
    reason: str | None = None


def _drop_reason(exc: Exception) -> str:
    if isinstance(exc, MaxIterExceededError):
        return "max_iter" if exc.reason == "iterations" else "line_search"
    if isinstance(exc, SingularGError):
        return "singular"
    if isinstance(exc, NonFiniteValueError):
        return "non_finite"
    if isinstance(exc, DualDomainError):
        return "domain"
    if isinstance(exc, NoInteriorStartError):
        return "no_interior"
    return "linalg"


def _seed_points(problem: PrimalProblem, cfg: SolveConfig) -> list[DualPoint]:
    rng = np.random.default_rng(cfg.seed)
    tau = 10.0 ** rng.uniform(*TAU_SEED_RANGE, size=(cfg.multistart_count, problem.p))
    sigma = rng.uniform(*SIGMA_SEED_RANGE, size=(cfg.multistart_count, problem.r))
    return [DualPoint(tau=t, sigma=s) for t, s in zip(tau, sigma)]


def _sa_minus_seed_points(problem: PrimalProblem, cfg: SolveConfig) -> list[DualPoint]:
    """
    Seeds with G(zeta) negative definite, spread over their distance to det G = 0.

    Base points are drawn from the random-seed box and kept when G is
    negative definite. Each one is then moved along the all-ones sigma
    direction, where G grows by the positive definite sum of the B_j, to
    leave a fraction of the remaining reach. The fractions are stratified
    log-uniformly over [1e-3, 1] by seed index, so seeds sit both deep in
    S_a- and close to its boundary, including the positive-sigma band.

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param cfg: Solver configuration (``sa_minus_seed_count`` seeds, stream keyed by ``seed``)
    :type cfg: SolveConfig
    :return: Up to ``sa_minus_seed_count`` dual points in S_a-
    :rtype: list[DualPoint]
    """

    count = cfg.sa_minus_seed_count
    if not count or not problem.r:
        return []
    rng = np.random.default_rng([cfg.seed, 1])
    B_sum = problem.B.sum(axis=0)
    low, high = BOUNDARY_GAP_RANGE
    seeds: list[DualPoint] = []
    for _ in range(count * SA_MINUS_DRAWS_PER_SEED):
        tau = 10.0 ** rng.uniform(*TAU_SEED_RANGE, size=problem.p)
        sigma = rng.uniform(*SIGMA_SEED_RANGE, size=problem.r)
        G = combine_matrices(problem, tau, sigma)
        eigenvalues = linalg.eigvalsh(G, check_finite=False)
        if float(eigenvalues[-1]) >= -cfg.singular_tol * max(1.0, float(np.max(np.abs(eigenvalues)))):
            continue
        # G + s * sum(B_j) first turns singular at the smallest eigenvalue of the pencil (-G, sum(B_j))
        reach = float(linalg.eigh(-G, B_sum, eigvals_only=True, check_finite=False)[0])
        gap = 10.0 ** (low + (high - low) * (len(seeds) + rng.uniform()) / count)
        seeds.append(DualPoint(tau=tau, sigma=sigma + reach * (1.0 - gap)))
        if len(seeds) == count:
            break
    if len(seeds) < count:
        logger.debug("only %d of %d S_a- seeds found", len(seeds), count)
    return seeds


def _run_start(problem: PrimalProblem, cfg: SolveConfig, index: int, zeta0: DualPoint | None) -> _StartOutcome:
    try:
        if zeta0 is None:
            zeta0 = sa_plus_start(problem, cfg)
            mode = _Mode.ASCENT
        else:
            mode = _Mode.ROOT
        state, iterations = _newton(problem, zeta0, cfg, mode)
        report = build_report(problem, state, cfg, iterations, index)
    except (DcDualError, linalg.LinAlgError) as exc:
        logger.debug("start %d dropped: %s", index, exc)
        return _StartOutcome(index=index, reason=_drop_reason(exc))
    if not report.converged:
        return _StartOutcome(index=index, reason="gap")
    return _StartOutcome(index=index, report=report)


def _is_duplicate(a: CriticalPointReport, b: CriticalPointReport, tol: float) -> bool:
    za = np.asarray(a.zeta_vector)
    zb = np.asarray(b.zeta_vector)
    return float(np.linalg.norm(za - zb)) <= tol * (1.0 + float(np.linalg.norm(za)))


def _deduplicate(reports: list[CriticalPointReport], tol: float) -> list[CriticalPointReport]:
    unique: list[CriticalPointReport] = []
    for report in reports:
        for k, kept in enumerate(unique):
            if _is_duplicate(kept, report, tol):
                if report.grad_norm_dual < kept.grad_norm_dual:
                    unique[k] = report
                break
        else:
            unique.append(report)
    return unique


def _sort_key(report: CriticalPointReport) -> tuple:
    return (report.triality.sort_rank, report.primal_value, tuple(report.zeta_vector))


def search_stationary_points(problem: PrimalProblem, cfg: SolveConfig | None = None) -> StationarySearch:
    """
    Multistart search for stationary points of Pi^d over S_a.

    The interior start (index -1) runs Newton ascent. Two seeded groups run
    Newton on grad Pi^d = 0: ``multistart_count`` random starts
    (log-uniform tau in [1e-3, 1e3], uniform sigma in [-10, 10]) followed by
    ``sa_minus_seed_count`` starts with G negative definite placed at
    stratified distances from det G = 0. Results are merged in start order,
    so serial and threaded runs agree exactly.

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param cfg: Solver configuration
    :type cfg: SolveConfig | None
    :return: Deduplicated, ordered reports with per-reason drop counts
    :rtype: StationarySearch
    """

    cfg = cfg or SolveConfig()
    starts: list[tuple[int, DualPoint | None]] = [(INTERIOR_START_INDEX, None)]
    starts += list(enumerate(_seed_points(problem, cfg) + _sa_minus_seed_points(problem, cfg)))

    def task(item: tuple[int, DualPoint | None]) -> _StartOutcome:
        return _run_start(problem, cfg, *item)

    with tqdm(total=len(starts), desc="multistart", unit="start", disable=not cfg.progress, leave=False) as bar:
        if cfg.serial:
            outcomes = []
            for item in starts:
                outcomes.append(task(item))
                bar.update(1)
        else:
            with ThreadPoolExecutor() as pool:
                outcomes = []
                for outcome in pool.map(task, starts):
                    outcomes.append(outcome)
                    bar.update(1)

    drop_reasons: dict[str, int] = {}
    converged = [outcome.report for outcome in outcomes if outcome.report is not None]
    for outcome in outcomes:
        if outcome.reason is not None:
            drop_reasons[outcome.reason] = drop_reasons.get(outcome.reason, 0) + 1
    dropped = sum(drop_reasons.values())
    if dropped:
        logger.warning("%d of %d starts dropped: %s", dropped, len(starts), drop_reasons)

    reports = sorted(_deduplicate(converged, cfg.dedup_tol), key=_sort_key)
    logger.info("%d stationary points from %d converged starts", len(reports), len(converged))
    return StationarySearch(reports=reports, starts=len(starts), converged=len(converged), dropped=dropped, drop_reasons=dict(sorted(drop_reasons.items())))


def find_stationary_points(problem: PrimalProblem, cfg: SolveConfig | None = None) -> list[CriticalPointReport]:
    """Deduplicated stationary points of Pi^d, ordered by triality class then primal value."""

    return search_stationary_points(problem, cfg).reports
