"""Problem instance and the primal/dual point types.

The instance data (A_i, alpha_i, B_j, beta_j, C, f) is held in read-only
numpy arrays. Matrices are symmetrized on ingestion and the largest
relative asymmetry is kept on the instance; B_j and C are checked for
positive definiteness with a full symmetric eigendecomposition whose
extreme eigenvalues are cached as :class:`SpectralBounds`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from ..errors import DimensionMismatchError, DualDomainError, ProblemValidationError

__all__ = [
    "SYMMETRY_REJECT_TOL",
    "CanonicalMeasure",
    "DualPoint",
    "PrimalProblem",
    "SpectralBounds",
]

# relative asymmetry above which input matrices are rejected
SYMMETRY_REJECT_TOL = 1e-8

FloatArray = NDArray[np.float64]


def _frozen(values: ArrayLike, ndim: int, name: str) -> FloatArray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise DimensionMismatchError(f"{name} must have {ndim} dimension(s), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ProblemValidationError(f"{name} contains non-finite entries", matrix=name)
    arr.setflags(write=False)
    return arr


def _stacked(values: ArrayLike, n: int, name: str) -> FloatArray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return _frozen(np.zeros((0, n, n)), 3, name)
    if arr.ndim != 3 or arr.shape[1:] != (n, n):
        raise DimensionMismatchError(f"{name} must be a stack of {n}x{n} matrices, got shape {arr.shape}")
    return _frozen(arr, 3, name)


def _symmetrize(matrix: FloatArray, name: str, index: int | None) -> tuple[FloatArray, float]:
    scale = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    deviation = float(np.max(np.abs(matrix - matrix.T))) / scale if scale > 0 else 0.0
    label = name if index is None else f"{name}[{index}]"
    if deviation > SYMMETRY_REJECT_TOL:
        raise ProblemValidationError(f"{label} is not symmetric (relative asymmetry {deviation:.3g})", matrix=name, index=index)
    return (matrix + matrix.T) / 2.0, deviation


# MARK: Spectral bounds
@dataclass(frozen=True, eq=False)
class SpectralBounds:
    """
    Extreme eigenvalues feeding the Delta lower bound on eig(G).

    :param lambda_min_A: Smallest eigenvalue of each A_i (length p)
    :param lambda_min_B: Smallest eigenvalue of each B_j (length r)
    :param lambda_max_B: Largest eigenvalue of each B_j (length r)
    :param lambda_max_C: Largest eigenvalue of C
    """

    lambda_min_A: FloatArray
    lambda_min_B: FloatArray
    lambda_max_B: FloatArray
    lambda_max_C: float

    def __post_init__(self) -> None:
        for name in ("lambda_min_A", "lambda_min_B", "lambda_max_B"):
            object.__setattr__(self, name, _frozen(getattr(self, name), 1, name))
        if np.any(self.lambda_min_B <= 0) or self.lambda_max_C <= 0:
            raise ProblemValidationError("spectral bounds require B_j and C positive definite")
        if np.any(self.lambda_min_B > self.lambda_max_B):
            raise ProblemValidationError("lambda_min_B must not exceed lambda_max_B")

    def to_dict(self) -> dict[str, list[float] | float]:
        return {
            "lambda_min_A": self.lambda_min_A.tolist(),
            "lambda_min_B": self.lambda_min_B.tolist(),
            "lambda_max_B": self.lambda_max_B.tolist(),
            "lambda_max_C": float(self.lambda_max_C),
        }


# MARK: Primal problem
@dataclass(frozen=True, eq=False)
class PrimalProblem:
    """
    Instance data of Pi(x) = sum_i exp(x'A_i x/2 - alpha_i)
    + sum_j (x'B_j x/2 - beta_j)^2/2 - x'Cx/2 - f'x.

    :param A: Stack of p symmetric n x n matrices, shape (p, n, n)
    :param alpha: Shifts alpha_i, shape (p,)
    :param B: Stack of r symmetric positive-definite matrices, shape (r, n, n)
    :param beta: Shifts beta_j, shape (r,)
    :param C: Symmetric positive-definite n x n matrix
    :param f: Linear term, shape (n,)
    """

    A: FloatArray
    alpha: FloatArray
    B: FloatArray
    beta: FloatArray
    C: FloatArray
    f: FloatArray
    symmetry_deviation: float = field(init=False, default=0.0)
    spectral_bounds: SpectralBounds = field(init=False, repr=False)

    def __post_init__(self) -> None:
        f = _frozen(self.f, 1, "f")
        n = f.shape[0]
        if n < 1:
            raise DimensionMismatchError("f must have at least one entry")
        C = _frozen(self.C, 2, "C")
        A = _stacked(self.A, n, "A")
        B = _stacked(self.B, n, "B")
        alpha = _frozen(np.reshape(self.alpha, (-1,)), 1, "alpha")
        beta = _frozen(np.reshape(self.beta, (-1,)), 1, "beta")

        if C.shape != (n, n):
            raise DimensionMismatchError(f"C must be {n}x{n}, got {C.shape}")
        if alpha.shape[0] != A.shape[0]:
            raise DimensionMismatchError(f"alpha has {alpha.shape[0]} entries but there are {A.shape[0]} A matrices")
        if beta.shape[0] != B.shape[0]:
            raise DimensionMismatchError(f"beta has {beta.shape[0]} entries but there are {B.shape[0]} B matrices")
        if A.shape[0] + B.shape[0] < 1:
            raise ProblemValidationError("at least one exponential or quartic term is required (p + r >= 1)")

        deviation = 0.0
        sym_A, sym_B = np.empty_like(A), np.empty_like(B)
        for i in range(A.shape[0]):
            sym_A[i], dev = _symmetrize(A[i], "A", i)
            deviation = max(deviation, dev)
        for j in range(B.shape[0]):
            sym_B[j], dev = _symmetrize(B[j], "B", j)
            deviation = max(deviation, dev)
        sym_C, dev = _symmetrize(C, "C", None)
        deviation = max(deviation, dev)

        lambda_min_B, lambda_max_B = [], []
        for j in range(sym_B.shape[0]):
            eigs = linalg.eigvalsh(sym_B[j])
            if eigs[0] <= 0:
                raise ProblemValidationError(f"B[{j}] is not positive definite (smallest eigenvalue {eigs[0]:.6g})", matrix="B", index=j, eigenvalue=float(eigs[0]))
            lambda_min_B.append(eigs[0])
            lambda_max_B.append(eigs[-1])
        eigs_C = linalg.eigvalsh(sym_C)
        if eigs_C[0] <= 0:
            raise ProblemValidationError(f"C is not positive definite (smallest eigenvalue {eigs_C[0]:.6g})", matrix="C", eigenvalue=float(eigs_C[0]))
        lambda_min_A = [linalg.eigvalsh(sym_A[i])[0] for i in range(sym_A.shape[0])]

        for arr in (sym_A, sym_B, sym_C):
            arr.setflags(write=False)
        object.__setattr__(self, "A", sym_A)
        object.__setattr__(self, "B", sym_B)
        object.__setattr__(self, "C", sym_C)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "symmetry_deviation", deviation)
        object.__setattr__(
            self,
            "spectral_bounds",
            SpectralBounds(
                lambda_min_A=np.asarray(lambda_min_A, dtype=float),
                lambda_min_B=np.asarray(lambda_min_B, dtype=float),
                lambda_max_B=np.asarray(lambda_max_B, dtype=float),
                lambda_max_C=float(eigs_C[-1]),
            ),
        )

    @property
    def n(self) -> int:
        return int(self.f.shape[0])

    @property
    def p(self) -> int:
        return int(self.A.shape[0])

    @property
    def r(self) -> int:
        return int(self.B.shape[0])

    @property
    def m(self) -> int:
        """Dual dimension p + r."""

        return self.p + self.r

    def check_primal(self, x: ArrayLike) -> FloatArray:
        """Return ``x`` as a float vector, raising on a dimension mismatch."""

        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.n,):
            raise DimensionMismatchError(f"x must have shape ({self.n},), got {arr.shape}")
        return arr

    def __repr__(self) -> str:
        return f"PrimalProblem(n={self.n}, p={self.p}, r={self.r})"


# MARK: Canonical measure
@dataclass(frozen=True, eq=False)
class CanonicalMeasure:
    """xi = (theta, eta) with theta_i = x'A_i x/2 and eta_j = x'B_j x/2."""

    theta: FloatArray
    eta: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", _frozen(self.theta, 1, "theta"))
        object.__setattr__(self, "eta", _frozen(self.eta, 1, "eta"))

    def as_vector(self) -> FloatArray:
        return np.concatenate([self.theta, self.eta])


# MARK: Dual point
@dataclass(frozen=True, eq=False)
class DualPoint:
    """
    Canonical dual variable zeta = (tau, sigma) with tau > 0.

    :param tau: Multipliers of the exponential terms, shape (p,)
    :param sigma: Multipliers of the quartic terms, shape (r,)
    :raises DualDomainError: if any tau_i is not strictly positive
    """

    tau: FloatArray
    sigma: FloatArray

    def __post_init__(self) -> None:
        tau = np.array(np.reshape(self.tau, (-1,)), dtype=float)
        sigma = np.array(np.reshape(self.sigma, (-1,)), dtype=float)
        if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(sigma))):
            raise DualDomainError("dual point has non-finite entries")
        if np.any(tau <= 0):
            raise DualDomainError(f"tau must be strictly positive, got {tau.tolist()}")
        tau.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "sigma", sigma)

    @property
    def m(self) -> int:
        return int(self.tau.shape[0] + self.sigma.shape[0])

    def as_vector(self) -> FloatArray:
        return np.concatenate([self.tau, self.sigma])

    @classmethod
    def from_vector(cls, values: ArrayLike, p: int) -> "DualPoint":
        """Split a flat (tau, sigma) vector after its first ``p`` entries."""

        arr = np.asarray(values, dtype=float).reshape(-1)
        return cls(tau=arr[:p], sigma=arr[p:])

    @classmethod
    def of(cls, tau: Sequence[float], sigma: Sequence[float]) -> "DualPoint":
        return cls(tau=np.asarray(tau, dtype=float), sigma=np.asarray(sigma, dtype=float))

    def __repr__(self) -> str:
        return f"DualPoint(tau={self.tau.tolist()}, sigma={self.sigma.tolist()})"
