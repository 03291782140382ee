"""Exception hierarchy for the canonical dual solver.

Every error raised on purpose by the package derives from
:class:`DcDualError`. Where a failure is also a plain value or arithmetic
problem the class additionally inherits the matching builtin so callers
that only catch ``ValueError`` keep working.
"""

from __future__ import annotations

from typing import Sequence

__all__ = [
    "DcDualError",
    "DimensionMismatchError",
    "ProblemValidationError",
    "NonFiniteValueError",
    "DualDomainError",
    "SingularGError",
    "NoInteriorStartError",
    "MaxIterExceededError",
    "OracleDimensionError",
]


def _format_point(zeta: Sequence[float] | None) -> str:
    if zeta is None:
        return "-"
    return "(" + ", ".join(f"{float(v):.6g}" for v in zeta) + ")"


# MARK: Base
class DcDualError(Exception):
    """Root of all package errors."""


# MARK: Input errors
class DimensionMismatchError(DcDualError, ValueError):
    """An array does not match the dimensions declared by the problem."""


class ProblemValidationError(DcDualError, ValueError):
    """
    Problem data violates a structural requirement.

    :param message: Human readable description
    :type message: str
    :param matrix: Name of the offending matrix family ('A', 'B', 'C')
    :type matrix: str | None
    :param index: Zero-based index inside the family, if any
    :type index: int | None
    :param eigenvalue: Offending eigenvalue for definiteness failures
    :type eigenvalue: float | None
    """

    def __init__(self, message: str, matrix: str | None = None, index: int | None = None, eigenvalue: float | None = None) -> None:
        super().__init__(message)
        self.matrix = matrix
        self.index = index
        self.eigenvalue = eigenvalue


class OracleDimensionError(DcDualError, ValueError):
    """The brute-force oracle only handles n <= 3."""


# MARK: Numerical errors
class NonFiniteValueError(DcDualError, ArithmeticError):
    """An exponential left the representable range or a value became non-finite."""


class DualDomainError(DcDualError, ValueError):
    """The dual point lies outside tau > 0."""


class SingularGError(DcDualError, ArithmeticError):
    """
    G(zeta) is singular to within the configured tolerance.

    :param zeta: Offending dual point as a flat (tau, sigma) sequence
    :type zeta: Sequence[float] | None
    :param min_abs_eigenvalue: Smallest eigenvalue magnitude of G(zeta)
    :type min_abs_eigenvalue: float | None
    """

    def __init__(self, zeta: Sequence[float] | None = None, min_abs_eigenvalue: float | None = None, message: str | None = None) -> None:
        self.zeta = None if zeta is None else [float(v) for v in zeta]
        self.min_abs_eigenvalue = min_abs_eigenvalue
        if message is None:
            message = f"G(zeta) is singular at zeta={_format_point(zeta)} (min |eig| = {min_abs_eigenvalue:.3g})" if min_abs_eigenvalue is not None else f"G(zeta) is singular at zeta={_format_point(zeta)}"
        super().__init__(message)


class NoInteriorStartError(DcDualError):
    """No point with G(zeta) positive definite was found within the search budget."""


class MaxIterExceededError(DcDualError):
    """
    Newton iteration did not reach the stationarity threshold.

    :param zeta: Last iterate as a flat (tau, sigma) sequence
    :type zeta: Sequence[float]
    :param grad_norm: Infinity norm of the dual gradient at the last iterate
    :type grad_norm: float
    :param reason: Short reason ('iterations' or 'line search')
    :type reason: str
    """

    def __init__(self, zeta: Sequence[float], grad_norm: float, reason: str = "iterations") -> None:
        self.zeta = [float(v) for v in zeta]
        self.grad_norm = float(grad_norm)
        self.reason = reason
        super().__init__(f"Newton stopped ({reason}) at zeta={_format_point(zeta)} with |grad|_inf = {grad_norm:.3g}")
