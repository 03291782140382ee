"""Dual-side quantities: G(zeta), the total complementary function, the
canonical dual function and its derivatives, and the spectral machinery
(S_a+/S_a- membership and the Delta lower bound).

Linear systems with G are solved with a symmetric indefinite (Bunch-Kaufman)
factorization; G^-1 is never formed. Singularity is decided from the
eigenvalues of G, scaled by max(1, ||G||_2).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from .errors import DimensionMismatchError, DualDomainError, SingularGError
from .models.problem import DualPoint, PrimalProblem, SpectralBounds
from .models.shared import DomainClass
from .problem_model import canonical_measure, combine_matrices, eval_V_star, grad_V_star

__all__ = [
    "DEFAULT_SINGULAR_TOL",
    "TAU_DOMAIN_FLOOR",
    "DualState",
    "assemble_G",
    "classify_domain",
    "delta_bound",
    "domain_of_state",
    "dual_state",
    "eval_dual",
    "grad_dual",
    "grad_total_complementary",
    "hess_dual",
    "lambda_conjugate",
    "singular_threshold",
    "solve_G",
    "total_complementary",
]

logger = logging.getLogger(__name__)

DEFAULT_SINGULAR_TOL = 1e-10
# below this tau the inverse blockdiag(diag(1/tau), I) is not representable
TAU_DOMAIN_FLOOR = 1e-300


def _check_dual(problem: PrimalProblem, zeta: DualPoint) -> None:
    if zeta.tau.shape != (problem.p,) or zeta.sigma.shape != (problem.r,):
        raise DimensionMismatchError(f"dual point must have shapes ({problem.p},), ({problem.r},), got {zeta.tau.shape}, {zeta.sigma.shape}")


# MARK: G(zeta)
def assemble_G(problem: PrimalProblem, zeta: DualPoint) -> NDArray[np.float64]:
    """
    G(zeta) = sum_i tau_i A_i + sum_j sigma_j B_j - C.

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param zeta: Dual point
    :type zeta: DualPoint
    :return: Symmetric n x n matrix
    :rtype: NDArray
    """

    _check_dual(problem, zeta)
    return combine_matrices(problem, zeta.tau, zeta.sigma)


def singular_threshold(eigenvalues: NDArray[np.float64], tol: float = DEFAULT_SINGULAR_TOL) -> float:
    """Scale-aware threshold tol * max(1, ||G||_2) from the eigenvalues of G."""

    return tol * max(1.0, float(np.max(np.abs(eigenvalues))))


def _eigvalsh(G: NDArray[np.float64]) -> NDArray[np.float64]:
    return linalg.eigvalsh(G, check_finite=False)


def solve_G(problem: PrimalProblem, zeta: DualPoint, rhs: ArrayLike, singular_tol: float = DEFAULT_SINGULAR_TOL) -> NDArray[np.float64]:
    """
    Solve G(zeta) y = rhs.

    :raises SingularGError: when min |eig(G)| <= singular_tol * max(1, ||G||_2)
    """

    G = assemble_G(problem, zeta)
    eigenvalues = _eigvalsh(G)
    _raise_if_singular(zeta, eigenvalues, singular_tol)
    return _sym_solve(G, np.asarray(rhs, dtype=float), zeta)


def _raise_if_singular(zeta: DualPoint, eigenvalues: NDArray[np.float64], singular_tol: float) -> None:
    smallest = float(np.min(np.abs(eigenvalues)))
    if smallest <= singular_threshold(eigenvalues, singular_tol):
        raise SingularGError(zeta.as_vector(), smallest)


def _sym_solve(G: NDArray[np.float64], rhs: NDArray[np.float64], zeta: DualPoint) -> NDArray[np.float64]:
    try:
        return linalg.solve(G, rhs, assume_a="sym", check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularGError(zeta.as_vector(), None, f"symmetric factorization of G failed at zeta={zeta.as_vector().tolist()}: {exc}") from exc


# MARK: Dual state
@dataclass(frozen=True, eq=False)
class DualState:
    """
    Everything the solver needs at one dual point, computed from a single
    eigendecomposition and factorization of G.

    :param zeta: The dual point
    :param G: G(zeta)
    :param eigenvalues: Ascending eigenvalues of G
    :param x: G^-1 f
    :param value: Pi^d(zeta)
    :param grad: Gradient of Pi^d, length m
    """

    zeta: DualPoint
    G: NDArray[np.float64]
    eigenvalues: NDArray[np.float64]
    x: NDArray[np.float64]
    value: float
    grad: NDArray[np.float64]

    @property
    def positive_count(self) -> int:
        """Number of positive eigenvalues of G (its inertia for nonsingular G)."""

        return int(np.count_nonzero(self.eigenvalues > 0))

    @property
    def min_abs_eigenvalue(self) -> float:
        return float(np.min(np.abs(self.eigenvalues)))

    @property
    def grad_norm(self) -> float:
        return float(np.max(np.abs(self.grad))) if self.grad.size else 0.0

    def hessian(self, problem: PrimalProblem) -> NDArray[np.float64]:
        return _hess_from(problem, self.zeta, self.G, self.x)


def dual_state(problem: PrimalProblem, zeta: DualPoint, singular_tol: float = DEFAULT_SINGULAR_TOL) -> DualState:
    """
    Evaluate G, its spectrum, x = G^-1 f, Pi^d and grad Pi^d at ``zeta``.

    :raises SingularGError: when zeta is outside S_a to within ``singular_tol``
    """

    G = assemble_G(problem, zeta)
    eigenvalues = _eigvalsh(G)
    _raise_if_singular(zeta, eigenvalues, singular_tol)
    x = _sym_solve(G, problem.f, zeta)
    value = -0.5 * float(problem.f @ x) - eval_V_star(problem, zeta)
    grad = canonical_measure(problem, x).as_vector() - grad_V_star(problem, zeta)
    return DualState(zeta=zeta, G=G, eigenvalues=eigenvalues, x=x, value=value, grad=grad)


# MARK: Xi and Pi^d
def total_complementary(problem: PrimalProblem, x: ArrayLike, zeta: DualPoint) -> float:
    """
    Xi(x, zeta) = x'G(zeta)x/2 - f'x - V1*(tau) - V2*(sigma).

    :return: The total complementary value; equals Pi(x) and Pi^d(zeta) at a critical pair
    :rtype: float
    """

    x = problem.check_primal(x)
    G = assemble_G(problem, zeta)
    return 0.5 * float(x @ (G @ x)) - float(problem.f @ x) - eval_V_star(problem, zeta)


def grad_total_complementary(problem: PrimalProblem, x: ArrayLike, zeta: DualPoint) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Partial gradients of Xi: (G(zeta)x - f, Lambda(x) - grad V*(zeta))."""

    x = problem.check_primal(x)
    gx = assemble_G(problem, zeta) @ x - problem.f
    gz = canonical_measure(problem, x).as_vector() - grad_V_star(problem, zeta)
    return gx, gz


def eval_dual(problem: PrimalProblem, zeta: DualPoint, singular_tol: float = DEFAULT_SINGULAR_TOL) -> float:
    """
    Pi^d(zeta) = -f'G(zeta)^-1 f / 2 - V1*(tau) - V2*(sigma).

    :raises SingularGError: when |det G| is numerically zero
    """

    x = solve_G(problem, zeta, problem.f, singular_tol)
    return -0.5 * float(problem.f @ x) - eval_V_star(problem, zeta)


def lambda_conjugate(problem: PrimalProblem, zeta: DualPoint, singular_tol: float = DEFAULT_SINGULAR_TOL) -> float:
    """
    Closed form of inf_x { <Lambda(x), zeta> - Q(x) }.

    Finite only on S_a+, where it equals -f'G(zeta)^-1 f / 2; -inf elsewhere.
    """

    G = assemble_G(problem, zeta)
    eigenvalues = _eigvalsh(G)
    if float(eigenvalues[0]) <= singular_threshold(eigenvalues, singular_tol):
        return -math.inf
    return -0.5 * float(problem.f @ _sym_solve(G, problem.f, zeta))


def grad_dual(problem: PrimalProblem, zeta: DualPoint, singular_tol: float = DEFAULT_SINGULAR_TOL) -> NDArray[np.float64]:
    """
    Gradient of Pi^d.

    Components x'A_i x/2 - alpha_i - ln tau_i and x'B_j x/2 - sigma_j - beta_j
    with x = G(zeta)^-1 f.
    """

    return dual_state(problem, zeta, singular_tol).grad


def _hess_from(problem: PrimalProblem, zeta: DualPoint, G: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.float64]:
    if problem.p and float(np.min(zeta.tau)) < TAU_DOMAIN_FLOOR:
        raise DualDomainError(f"tau below {TAU_DOMAIN_FLOOR:g} at zeta={zeta.as_vector().tolist()}")
    Z = np.column_stack([A @ x for A in problem.A] + [B @ x for B in problem.B])
    W = _sym_solve(G, Z, zeta)
    H_inv = np.diag(np.concatenate([1.0 / zeta.tau, np.ones(problem.r)]))
    hess = -(Z.T @ W) - H_inv
    return 0.5 * (hess + hess.T)


def hess_dual(problem: PrimalProblem, zeta: DualPoint, singular_tol: float = DEFAULT_SINGULAR_TOL) -> NDArray[np.float64]:
    """
    Hessian of Pi^d: -Z'G^-1 Z - H^-1.

    Z = [A_1 x, ..., B_r x] with x = G^-1 f and H^-1 = blockdiag(diag(1/tau), I_r).
    Negative definite whenever G(zeta) is positive definite.

    :raises SingularGError: outside S_a
    :raises DualDomainError: when some tau_i is below 1e-300
    """

    x = solve_G(problem, zeta, problem.f, singular_tol)
    return _hess_from(problem, zeta, assemble_G(problem, zeta), x)


# MARK: Spectral classification
def classify_domain(problem: PrimalProblem, zeta: DualPoint, tol: float = DEFAULT_SINGULAR_TOL) -> DomainClass:
    """
    Classify zeta by the eigenvalues of G(zeta).

    With t = tol * max(1, ||G||_2): SINGULAR if min|eig| <= t, SA_PLUS if
    min eig > t, SA_MINUS if max eig < -t, INDEFINITE otherwise.

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param zeta: Dual point
    :type zeta: DualPoint
    :param tol: Relative singularity tolerance
    :type tol: float
    :return: Domain tag
    :rtype: DomainClass
    """

    eigenvalues = _eigvalsh(assemble_G(problem, zeta))
    return _domain_from_eigenvalues(eigenvalues, tol)


def _domain_from_eigenvalues(eigenvalues: NDArray[np.float64], tol: float) -> DomainClass:
    threshold = singular_threshold(eigenvalues, tol)
    if float(np.min(np.abs(eigenvalues))) <= threshold:
        return DomainClass.SINGULAR
    if float(eigenvalues[0]) > threshold:
        return DomainClass.SA_PLUS
    if float(eigenvalues[-1]) < -threshold:
        return DomainClass.SA_MINUS
    return DomainClass.INDEFINITE


def domain_of_state(state: DualState, tol: float = DEFAULT_SINGULAR_TOL) -> DomainClass:
    return _domain_from_eigenvalues(state.eigenvalues, tol)


def delta_bound(problem: PrimalProblem, bounds: SpectralBounds, zeta: DualPoint) -> float:
    """
    Lower bound on every eigenvalue of G(zeta).

    Delta = sum_i tau_i lmin(A_i) + sum_j sigma_j lbar(B_j) - lmax(C), where
    lbar(B_j) is lmin(B_j) for sigma_j > 0 and lmax(B_j) otherwise.

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param bounds: Cached extreme eigenvalues (``problem.spectral_bounds``)
    :type bounds: SpectralBounds
    :param zeta: Dual point
    :type zeta: DualPoint
    :return: Delta
    :rtype: float
    """

    _check_dual(problem, zeta)
    lbar = np.where(zeta.sigma > 0, bounds.lambda_min_B, bounds.lambda_max_B)
    return float(zeta.tau @ bounds.lambda_min_A + zeta.sigma @ lbar - bounds.lambda_max_C)
