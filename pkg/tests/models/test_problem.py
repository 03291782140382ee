"""Tests for dcdual.models.problem: ingestion checks, spectral bounds and dual points."""

import numpy as np
import pytest

from dcdual.errors import DimensionMismatchError, DualDomainError, ProblemValidationError
from dcdual.models import DualPoint, PrimalProblem


def _problem(**overrides) -> PrimalProblem:
    data = dict(A=[np.diag([1.5, 2.0])], alpha=[1.0], B=[np.diag([0.5, 3.0])], beta=[1.0], C=np.diag([1.5, 1.0]), f=[2.0, 1.0])
    data.update(overrides)
    return PrimalProblem(**data)


class TestPrimalProblem:
    """Tests for PrimalProblem validation."""

    def test_dimensions(self, example1):
        assert (example1.n, example1.p, example1.r, example1.m) == (2, 1, 1, 2)

    def test_arrays_are_read_only(self, example1):
        with pytest.raises(ValueError):
            example1.C[0, 0] = 5.0

    def test_spectral_bounds(self, example4):
        """Extreme eigenvalues are cached on ingestion."""
        bounds = example4.spectral_bounds
        assert bounds.lambda_min_A.tolist() == [-3.0]
        assert bounds.lambda_min_B.tolist() == [1.0]
        assert bounds.lambda_max_B.tolist() == [1.0]
        assert bounds.lambda_max_C == pytest.approx(4.4)

    def test_small_asymmetry_is_symmetrized(self):
        """An asymmetry below the rejection threshold is averaged away and recorded."""
        C = np.array([[1.5, 1e-10], [0.0, 1.0]])
        problem = _problem(C=C)
        assert np.array_equal(problem.C, problem.C.T)
        assert problem.symmetry_deviation > 0

    def test_large_asymmetry_rejected(self):
        with pytest.raises(ProblemValidationError, match="A\\[0\\] is not symmetric"):
            _problem(A=[np.array([[1.0, 0.5], [0.0, 1.0]])])

    def test_non_spd_B_names_index_and_eigenvalue(self):
        with pytest.raises(ProblemValidationError) as info:
            _problem(B=[np.diag([1.0, -2.0])])
        assert info.value.matrix == "B"
        assert info.value.index == 0
        assert info.value.eigenvalue == pytest.approx(-2.0)
        assert "B[0]" in str(info.value)

    def test_non_spd_C(self):
        with pytest.raises(ProblemValidationError, match="C is not positive definite"):
            _problem(C=np.diag([1.0, 0.0]))

    def test_shift_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            _problem(alpha=[1.0, 2.0])

    @pytest.mark.parametrize("field", ["A", "B"])
    def test_flat_matrix_stack_rejected(self, field):
        """A (1, 4) array is not a stack of 2x2 matrices even though it has n^2 entries."""
        with pytest.raises(DimensionMismatchError, match=f"{field} must be a stack of 2x2 matrices"):
            _problem(**{field: np.ones((1, 4))})

    def test_wrong_matrix_size_rejected(self):
        """A stack of 3x3 matrices on an n = 2 problem is rejected."""
        with pytest.raises(DimensionMismatchError):
            _problem(A=[np.eye(3)])

    def test_needs_a_term(self):
        """p + r = 0 has no dual."""
        with pytest.raises(ProblemValidationError):
            _problem(A=np.zeros((0, 2, 2)), alpha=[], B=np.zeros((0, 2, 2)), beta=[])

    def test_non_finite_rejected(self):
        with pytest.raises(ProblemValidationError):
            _problem(f=[np.nan, 1.0])

    def test_check_primal(self, example1):
        assert example1.check_primal([1, 2]).dtype == float
        with pytest.raises(DimensionMismatchError):
            example1.check_primal([1.0])


class TestDualPoint:
    """Tests for DualPoint."""

    def test_from_vector_splits_after_p(self):
        zeta = DualPoint.from_vector([0.5, 1.0, -2.0], 1)
        assert zeta.tau.tolist() == [0.5]
        assert zeta.sigma.tolist() == [1.0, -2.0]
        assert zeta.m == 3

    def test_tau_must_be_positive(self):
        with pytest.raises(DualDomainError):
            DualPoint.of([0.0], [1.0])

    def test_sigma_may_be_negative(self):
        assert DualPoint.of([1.0], [-5.0]).as_vector().tolist() == [1.0, -5.0]

    def test_non_finite_rejected(self):
        with pytest.raises(DualDomainError):
            DualPoint.of([np.inf], [0.0])
