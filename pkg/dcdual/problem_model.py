"""Primal-side quantities of the canonical d.c. problem.

Pi(x) = V(Lambda(x)) - Q(x) where Lambda(x) = (x'A_i x/2, x'B_j x/2) is the
canonical measure, V is the sum of shifted exponentials and shifted
squares, and Q(x) = x'Cx/2 + f'x. The constitutive map zeta = grad V(xi)
links every primal point to a dual point, which gives the gradient and
Hessian of Pi in closed form.
"""

from __future__ import annotations

import logging
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionMismatchError, NonFiniteValueError
from .models.problem import CanonicalMeasure, DualPoint, PrimalProblem

__all__ = [
    "EXP_LIMIT",
    "canonical_measure",
    "combine_matrices",
    "dual_of_primal_point",
    "eval_V",
    "eval_V_star",
    "eval_primal",
    "eval_primal_batch",
    "grad_V_star",
    "grad_primal",
    "hess_primal",
]

logger = logging.getLogger(__name__)

# largest exponent accepted before exp() is treated as an overflow
EXP_LIMIT = 700.0


def _safe_exp(exponent: NDArray[np.float64]) -> NDArray[np.float64]:
    if exponent.size and float(np.max(exponent)) > EXP_LIMIT:
        raise NonFiniteValueError(f"exp overflow: theta - alpha reaches {float(np.max(exponent)):.6g} (limit {EXP_LIMIT:g})")
    return np.exp(exponent)


def combine_matrices(problem: PrimalProblem, tau: ArrayLike, sigma: ArrayLike) -> NDArray[np.float64]:
    """
    Return sum_i tau_i A_i + sum_j sigma_j B_j - C.

    Accumulates term by term with elementwise operations, so the result is
    exactly symmetric whenever the inputs are.
    """

    G = -problem.C.copy()
    for weight, matrix in zip(np.asarray(tau, dtype=float), problem.A):
        G += weight * matrix
    for weight, matrix in zip(np.asarray(sigma, dtype=float), problem.B):
        G += weight * matrix
    return G


# MARK: Canonical measure and V
def canonical_measure(problem: PrimalProblem, x: ArrayLike) -> CanonicalMeasure:
    """
    Evaluate xi = Lambda(x).

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param x: Primal point of length n
    :type x: ArrayLike
    :raises DimensionMismatchError: if ``x`` has the wrong length
    :return: theta_i = x'A_i x / 2 and eta_j = x'B_j x / 2
    :rtype: CanonicalMeasure
    """

    x = problem.check_primal(x)
    theta = np.array([0.5 * x @ (A @ x) for A in problem.A], dtype=float)
    eta = np.array([0.5 * x @ (B @ x) for B in problem.B], dtype=float)
    return CanonicalMeasure(theta=theta, eta=eta)


def eval_V(problem: PrimalProblem, xi: CanonicalMeasure) -> float:
    """V(xi) = sum_i exp(theta_i - alpha_i) + sum_j (eta_j - beta_j)^2 / 2."""

    if xi.theta.shape != (problem.p,) or xi.eta.shape != (problem.r,):
        raise DimensionMismatchError(f"canonical measure must have shapes ({problem.p},), ({problem.r},)")
    v1 = float(np.sum(_safe_exp(xi.theta - problem.alpha)))
    v2 = float(0.5 * np.sum((xi.eta - problem.beta) ** 2))
    return v1 + v2


def _check_dual(problem: PrimalProblem, zeta: DualPoint) -> None:
    if zeta.tau.shape != (problem.p,) or zeta.sigma.shape != (problem.r,):
        raise DimensionMismatchError(f"dual point must have shapes ({problem.p},), ({problem.r},), got {zeta.tau.shape}, {zeta.sigma.shape}")


def eval_V_star(problem: PrimalProblem, zeta: DualPoint) -> float:
    """
    Legendre conjugate V*(zeta) = V1*(tau) + V2*(sigma).

    V1*(tau) = sum_i (alpha_i + ln tau_i - 1) tau_i and
    V2*(sigma) = sigma'sigma / 2 + beta'sigma. Non-positive tau never
    reaches this point because :class:`DualPoint` rejects it.
    """

    _check_dual(problem, zeta)
    tau, sigma = zeta.tau, zeta.sigma
    v1 = float(np.sum((problem.alpha + np.log(tau) - 1.0) * tau))
    v2 = float(0.5 * sigma @ sigma + problem.beta @ sigma)
    return v1 + v2


def grad_V_star(problem: PrimalProblem, zeta: DualPoint) -> NDArray[np.float64]:
    """Inverse constitutive map: (alpha_i + ln tau_i, sigma_j + beta_j)."""

    _check_dual(problem, zeta)
    return np.concatenate([problem.alpha + np.log(zeta.tau), zeta.sigma + problem.beta])


def dual_of_primal_point(problem: PrimalProblem, x: ArrayLike) -> DualPoint:
    """
    Constitutive map zeta(x) = grad V(Lambda(x)).

    :raises NonFiniteValueError: if some theta_i - alpha_i exceeds the exp limit
    :return: tau_i = exp(theta_i - alpha_i), sigma_j = eta_j - beta_j
    :rtype: DualPoint
    """

    xi = canonical_measure(problem, x)
    tau = _safe_exp(xi.theta - problem.alpha)
    return DualPoint(tau=tau, sigma=xi.eta - problem.beta)


# MARK: Objective
def eval_primal(problem: PrimalProblem, x: ArrayLike) -> float:
    """
    Evaluate Pi(x).

    :param problem: Problem instance
    :type problem: PrimalProblem
    :param x: Primal point of length n
    :type x: ArrayLike
    :raises DimensionMismatchError: if ``x`` has the wrong length
    :raises NonFiniteValueError: on exp overflow
    :return: sum_i exp(x'A_i x/2 - alpha_i) + sum_j (x'B_j x/2 - beta_j)^2/2 - x'Cx/2 - f'x
    :rtype: float
    """

    x = problem.check_primal(x)
    xi = canonical_measure(problem, x)
    return eval_V(problem, xi) - (0.5 * float(x @ (problem.C @ x)) + float(problem.f @ x))


def eval_primal_batch(problem: PrimalProblem, points: ArrayLike, on_overflow: Literal["raise", "mask"] = "raise") -> NDArray[np.float64]:
    """
    Evaluate Pi at every row of ``points``.

    :param points: Array of shape (k, n)
    :type points: ArrayLike
    :param on_overflow: 'raise' propagates exp overflow as an error; 'mask'
        returns NaN for the overflowing rows so grid callers can mark them
    :type on_overflow: str
    :return: Values of shape (k,)
    :rtype: NDArray
    """

    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[1] != problem.n:
        raise DimensionMismatchError(f"points must have shape (k, {problem.n}), got {X.shape}")
    theta = 0.5 * np.einsum("ki,pij,kj->kp", X, problem.A, X)
    eta = 0.5 * np.einsum("ki,rij,kj->kr", X, problem.B, X)
    exponent = theta - problem.alpha
    overflow = np.any(exponent > EXP_LIMIT, axis=1)
    if np.any(overflow) and on_overflow == "raise":
        raise NonFiniteValueError(f"exp overflow at {int(np.count_nonzero(overflow))} of {X.shape[0]} points")
    exponent = np.where(exponent > EXP_LIMIT, 0.0, exponent)
    values = np.sum(np.exp(exponent), axis=1) + 0.5 * np.sum((eta - problem.beta) ** 2, axis=1)
    values -= 0.5 * np.einsum("ki,ij,kj->k", X, problem.C, X) + X @ problem.f
    values[overflow] = np.nan
    return values


# MARK: Derivatives
def grad_primal(problem: PrimalProblem, x: ArrayLike) -> NDArray[np.float64]:
    """Gradient of Pi: G(zeta(x)) x - f."""

    x = problem.check_primal(x)
    zeta = dual_of_primal_point(problem, x)
    return combine_matrices(problem, zeta.tau, zeta.sigma) @ x - problem.f


def hess_primal(problem: PrimalProblem, x: ArrayLike) -> NDArray[np.float64]:
    """
    Hessian of Pi: G(zeta(x)) + sum_i tau_i (A_i x)(A_i x)' + sum_j (B_j x)(B_j x)'.

    Built from outer products added one at a time, so it is exactly symmetric.
    """

    x = problem.check_primal(x)
    zeta = dual_of_primal_point(problem, x)
    H = combine_matrices(problem, zeta.tau, zeta.sigma)
    for weight, A in zip(zeta.tau, problem.A):
        v = A @ x
        H += weight * np.outer(v, v)
    for B in problem.B:
        v = B @ x
        H += np.outer(v, v)
    return H
