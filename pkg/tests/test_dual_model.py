"""Tests for dcdual.dual_model: G(zeta), Xi, Pi^d, derivatives and spectral classification."""

import math

import numpy as np
import pytest

from dcdual.dual_model import (
    assemble_G,
    classify_domain,
    delta_bound,
    dual_state,
    eval_dual,
    grad_dual,
    grad_total_complementary,
    hess_dual,
    lambda_conjugate,
    total_complementary,
)
from dcdual.errors import DimensionMismatchError, DualDomainError, SingularGError
from dcdual.models import DomainClass, DualPoint
from dcdual.oracle import finite_diff_gradient
from dcdual.problem_model import dual_of_primal_point, eval_primal

EX1_ZETA = DualPoint.of([2.01147], [-0.223104])
EX1_X = [1.42283, 0.424878]


# MARK: G(zeta)
class TestAssembleG:
    """Tests for assemble_G."""

    def test_example1_value(self, example1):
        """G = tau A + sigma B - C on diagonal data."""
        G = assemble_G(example1, DualPoint.of([2.0], [1.0]))
        np.testing.assert_allclose(G, [[2.0, 0.0], [0.0, 6.0]])

    def test_is_symmetric(self, random_problem):
        """G is exactly symmetric for symmetric inputs."""
        problem = random_problem(3, n=3, p=2, r=2)
        G = assemble_G(problem, DualPoint.of([0.3, 1.7], [-0.4, 2.2]))
        assert np.array_equal(G, G.T)

    def test_wrong_dual_shape(self, example1):
        """The dual point must split as (p, r)."""
        with pytest.raises(DimensionMismatchError):
            assemble_G(example1, DualPoint.of([1.0], [1.0, 2.0]))


# MARK: Xi and Pi^d
class TestDualFunction:
    """Tests for eval_dual, total_complementary and lambda_conjugate."""

    def test_example1_value(self, example1):
        """Pi^d at the reference dual solution."""
        assert eval_dual(example1, EX1_ZETA) == pytest.approx(-2.8428, abs=1e-3)

    def test_example2_double_max_value(self, example2):
        """Pi^d at the reference double-max point."""
        assert eval_dual(example2, DualPoint.of([0.151452], [-1.68381])) == pytest.approx(2.98579, abs=1e-3)

    def test_example4_double_min_value(self, example4):
        """Pi^d at the reference double-min point."""
        assert eval_dual(example4, DualPoint.of([0.149286], [3.90584])) == pytest.approx(-12.7833, abs=1e-3)

    def test_singular_G_raises(self, example1):
        """tau = 1, sigma = 0 makes G = diag(0, 1)."""
        with pytest.raises(SingularGError) as info:
            eval_dual(example1, DualPoint.of([1.0], [0.0]))
        assert info.value.zeta == [1.0, 0.0]
        assert info.value.min_abs_eigenvalue == pytest.approx(0.0, abs=1e-12)

    def test_total_complementary_matches_primal_on_constitutive_pair(self, example3):
        """Xi(x, zeta(x)) = Pi(x) for every x."""
        x = np.array([0.8, -1.3])
        zeta = dual_of_primal_point(example3, x)
        assert total_complementary(example3, x, zeta) == pytest.approx(eval_primal(example3, x), rel=1e-12)

    def test_total_complementary_at_critical_pair(self, example1):
        """Xi agrees with Pi^d at the reference solution."""
        assert total_complementary(example1, EX1_X, EX1_ZETA) == pytest.approx(-2.8428, abs=1e-3)

    def test_grad_total_complementary_vanishes_at_solution(self, example1):
        """Both partial gradients of Xi are small at the reference pair."""
        gx, gz = grad_total_complementary(example1, EX1_X, EX1_ZETA)
        assert np.max(np.abs(gx)) < 1e-4
        assert np.max(np.abs(gz)) < 1e-4

    def test_lambda_conjugate_on_sa_plus(self, example1):
        """On S_a+ the conjugate equals -f'G^-1 f / 2."""
        zeta = DualPoint.of([3.0], [1.0])
        G = assemble_G(example1, zeta)
        expected = -0.5 * float(example1.f @ np.linalg.solve(G, example1.f))
        assert lambda_conjugate(example1, zeta) == pytest.approx(expected)

    def test_lambda_conjugate_off_sa_plus(self, example4):
        """Outside S_a+ the infimum is unbounded below."""
        assert lambda_conjugate(example4, DualPoint.of([0.149286], [3.90584])) == -math.inf


# MARK: Derivatives
class TestDualDerivatives:
    """Tests for grad_dual and hess_dual."""

    def test_gradient_vanishes_at_reference_solution(self, example1):
        """The reference dual point is stationary to its printed precision."""
        assert np.max(np.abs(grad_dual(example1, EX1_ZETA))) < 1e-4

    def test_gradient_matches_finite_differences(self, example2):
        """Analytic gradient agrees with central differences."""
        z = np.array([0.4, 2.5])
        numeric = finite_diff_gradient(lambda v: eval_dual(example2, DualPoint.from_vector(v, 1)), z, 1e-6)
        assert grad_dual(example2, DualPoint.from_vector(z, 1)) == pytest.approx(numeric, abs=1e-6)

    def test_hessian_negative_definite_on_sa_plus(self, example1):
        """Pi^d is strictly concave where G is positive definite."""
        H = hess_dual(example1, EX1_ZETA)
        assert np.array_equal(H, H.T)
        assert np.linalg.eigvalsh(H).max() < 0

    def test_hessian_positive_at_double_min(self, example4):
        """The reference double-min point has a positive definite dual Hessian."""
        H = hess_dual(example4, DualPoint.of([0.149286], [3.90584]))
        assert np.linalg.eigvalsh(H).min() > 0

    def test_hessian_rejects_tiny_tau(self, example1):
        """tau below 1e-300 cannot be inverted."""
        with pytest.raises(DualDomainError):
            hess_dual(example1, DualPoint.of([1e-310], [5.0]))

    def test_dual_state_matches_separate_calls(self, example3):
        """The cached state agrees with eval_dual and grad_dual."""
        zeta = DualPoint.of([0.2], [4.0])
        state = dual_state(example3, zeta)
        assert state.value == pytest.approx(eval_dual(example3, zeta), rel=1e-14)
        assert state.grad == pytest.approx(grad_dual(example3, zeta), rel=1e-14)
        assert state.positive_count == 2


# MARK: Spectral classification
class TestClassifyDomain:
    """Tests for classify_domain and delta_bound."""

    def test_example1_solution_is_sa_plus(self, example1):
        """The reference MIN_MAX point lies in S_a+."""
        assert classify_domain(example1, EX1_ZETA) == DomainClass.SA_PLUS

    def test_example4_double_max_is_sa_minus(self, example4):
        """G is negative definite at the reference double-max point."""
        assert classify_domain(example4, DualPoint.of([0.361948], [-1.97615])) == DomainClass.SA_MINUS

    def test_indefinite(self, example1):
        """tau = 0.5, sigma = 0.5: G = diag(-0.5, 1.5)."""
        assert classify_domain(example1, DualPoint.of([0.5], [0.5])) == DomainClass.INDEFINITE

    def test_singular(self, example1):
        """tau = 1, sigma = 0: G has a zero eigenvalue."""
        assert classify_domain(example1, DualPoint.of([1.0], [0.0])) == DomainClass.SINGULAR

    def test_delta_example1(self, example1):
        """Delta at the reference solution."""
        assert delta_bound(example1, example1.spectral_bounds, EX1_ZETA) == pytest.approx(0.8479, abs=1e-4)

    def test_delta_example2(self, example2):
        """Delta at the reference MIN_MAX point."""
        assert delta_bound(example2, example2.spectral_bounds, DualPoint.of([0.142222], [3.60283])) == pytest.approx(0.60283, abs=1e-4)

    def test_delta_uses_lambda_max_for_negative_sigma(self, example1):
        """For sigma <= 0 the bound uses lambda_max(B)."""
        zeta = DualPoint.of([1.0], [-1.0])
        assert delta_bound(example1, example1.spectral_bounds, zeta) == pytest.approx(1.5 - 3.0 - 1.5)

    @pytest.mark.slow
    def test_delta_bounds_smallest_eigenvalue(self, random_problem):
        """lambda_min(G) >= Delta on random instances and dual points."""
        rng = np.random.default_rng(7)
        for seed in range(100):
            problem = random_problem(seed, n=int(rng.integers(1, 4)), p=int(rng.integers(0, 3)), r=int(rng.integers(1, 3)))
            zeta = DualPoint(tau=10.0 ** rng.uniform(-2, 2, size=problem.p), sigma=rng.uniform(-5, 5, size=problem.r))
            lam_min = np.linalg.eigvalsh(assemble_G(problem, zeta)).min()
            assert lam_min >= delta_bound(problem, problem.spectral_bounds, zeta) - 1e-10
