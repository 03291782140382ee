"""Tests for dcdual.solver: S_a+ maximization, multistart search, recovery and classification."""

import numpy as np
import pytest

from dcdual.dual_model import classify_domain
from dcdual.errors import MaxIterExceededError, NoInteriorStartError
from dcdual.models import CriticalPointReport, DomainClass, DualPoint, PrimalProblem, SolveConfig, TrialityClass
from dcdual.problem_model import combine_matrices, grad_primal
from dcdual.solver import (
    _sa_minus_seed_points,
    _triality_from,
    classify_triality,
    find_stationary_points,
    maximize_dual_on_sa_plus,
    recover_primal,
    sa_plus_start,
    search_stationary_points,
    verify_gap,
)


def _find(reports: list[CriticalPointReport], zeta: list[float], tol: float = 1e-3) -> CriticalPointReport:
    """Return the report whose zeta matches ``zeta`` to ``tol``."""
    for report in reports:
        if np.max(np.abs(np.asarray(report.zeta_vector) - zeta)) <= tol * (1 + np.max(np.abs(zeta))):
            return report
    raise AssertionError(f"no report near {zeta}: {[r.zeta_vector for r in reports]}")


# MARK: Interior start
class TestSaPlusStart:
    """Tests for sa_plus_start."""

    def test_tau_ray_example1(self, example1):
        """A = diag(1.5, 2) is positive definite, so doubling tau suffices."""
        start = sa_plus_start(example1)
        assert start.tau.tolist() == [2.0]
        assert start.sigma.tolist() == [0.0]

    def test_sigma_ray_example2(self, example2):
        """A = diag(1, 0) has no positive smallest eigenvalue; sigma is grown instead."""
        start = sa_plus_start(example2)
        assert start.tau.tolist() == [1.0]
        assert start.sigma.tolist() == [4.0]

    def test_sigma_ray_example4(self, example4):
        """Indefinite A: sigma grows until sigma I dominates C - tau A."""
        start = sa_plus_start(example4)
        assert start.sigma.tolist() == [8.0]

    def test_tau_ray_with_semidefinite_terms(self):
        """Two singular A_i whose sum is positive definite still give an S_a+ start without quartic terms."""
        problem = PrimalProblem(
            A=[np.diag([1.0, 0.0]), np.diag([0.0, 1.0])],
            alpha=[0.0, 0.0],
            B=np.zeros((0, 2, 2)),
            beta=[],
            C=np.eye(2),
            f=[1.0, 1.0],
        )
        start = sa_plus_start(problem)
        assert start.tau.tolist() == [2.0, 2.0]
        assert classify_domain(problem, start) == DomainClass.SA_PLUS

    def test_no_interior_start(self):
        """Without quartic terms and with A negative there is no S_a+ point."""
        problem = PrimalProblem(A=[[[-1.0]]], alpha=[0.0], B=np.zeros((0, 1, 1)), beta=[], C=[[1.0]], f=[1.0])
        with pytest.raises(NoInteriorStartError):
            sa_plus_start(problem)


# MARK: Global maximization
class TestMaximizeDualOnSaPlus:
    """Tests for maximize_dual_on_sa_plus against the reference examples."""

    @pytest.mark.parametrize(
        ("name", "zeta", "x", "value", "delta"),
        [
            ("example1", [2.01147, -0.223104], [1.42283, 0.424878], -2.8428, 0.8479),
            ("example2", [0.142222, 3.60283], [0.315066, 3.3177], -17.1934, 0.60283),
            ("example3", [0.145563, 3.95352], [0.867833, 2.72044], -13.6736, 0.7352),
            ("example4", [0.0612941, 4.67004], [2.05695, 3.01812], -22.6111, 0.0862),
        ],
    )
    def test_reference_solutions(self, request, name, zeta, x, value, delta):
        """The S_a+ maximizer, recovered point, value and Delta match the reference values."""
        problem = request.getfixturevalue(name)
        report = maximize_dual_on_sa_plus(problem)
        assert report.zeta_vector == pytest.approx(zeta, abs=1e-4)
        assert report.x == pytest.approx(x, abs=1e-4)
        assert report.primal_value == pytest.approx(value, abs=1e-3)
        assert report.dual_value == pytest.approx(value, abs=1e-3)
        assert report.delta == pytest.approx(delta, abs=1e-3)
        assert report.domain == DomainClass.SA_PLUS
        assert report.triality == TrialityClass.MIN_MAX
        assert report.gap_residual <= 1e-6
        assert report.converged
        assert report.start_index == -1

    def test_stationarity_and_primal_gradient(self, example1):
        """The dual gradient meets grad_tol and the primal gradient is correspondingly small."""
        cfg = SolveConfig()
        report = maximize_dual_on_sa_plus(example1, cfg)
        assert report.grad_norm_dual <= cfg.grad_tol
        bound = 10 * cfg.grad_tol * (1 + np.max(np.abs(example1.f)))
        assert np.max(np.abs(grad_primal(example1, report.x))) <= bound

    def test_dual_hessian_negative(self, example2):
        """On S_a+ every dual Hessian eigenvalue is negative."""
        report = maximize_dual_on_sa_plus(example2)
        assert max(report.dual_hessian_eigenvalues) < 0
        assert report.sign_transfer_holds is None

    def test_iteration_cap(self, example1):
        """One Newton step is not enough; the error carries the last iterate."""
        with pytest.raises(MaxIterExceededError) as info:
            maximize_dual_on_sa_plus(example1, SolveConfig(max_iter=1))
        assert len(info.value.zeta) == 2
        assert info.value.grad_norm > 0
        assert info.value.reason == "iterations"


# MARK: Multistart
class TestFindStationaryPoints:
    """Tests for find_stationary_points and search_stationary_points."""

    def test_example4_three_classes(self, example4, serial_config):
        """All three reference critical pairs are found and classified."""
        reports = find_stationary_points(example4, serial_config)
        min_max = _find(reports, [0.0612941, 4.67004])
        double_max = _find(reports, [0.361948, -1.97615])
        double_min = _find(reports, [0.149286, 3.90584])
        assert min_max.triality == TrialityClass.MIN_MAX
        assert double_max.triality == TrialityClass.DOUBLE_MAX
        assert double_max.primal_value == pytest.approx(2.52149, abs=1e-3)
        assert double_min.triality == TrialityClass.DOUBLE_MIN
        assert double_min.x == pytest.approx([-1.84496, -2.89962], abs=1e-4)
        assert double_min.primal_value == pytest.approx(-12.7833, abs=1e-3)

    def test_example4_sign_transfer(self, example4, serial_config):
        """Primal Hessians carry the sign the triality class predicts."""
        reports = find_stationary_points(example4, serial_config)
        double_max = _find(reports, [0.361948, -1.97615])
        double_min = _find(reports, [0.149286, 3.90584])
        assert double_max.sign_transfer_holds is True
        assert max(double_max.primal_hessian_eigenvalues) <= 1e-8
        assert double_min.sign_transfer_holds is True
        assert min(double_min.primal_hessian_eigenvalues) >= -1e-8

    def test_example4_double_min_with_default_config(self, example4):
        """The default configuration, threaded, reaches the double-min pair near the S_a- boundary."""
        reports = find_stationary_points(example4, SolveConfig())
        assert {r.triality for r in reports} >= {TrialityClass.MIN_MAX, TrialityClass.DOUBLE_MAX, TrialityClass.DOUBLE_MIN}
        double_min = _find(reports, [0.149286, 3.90584])
        assert double_min.triality == TrialityClass.DOUBLE_MIN
        assert double_min.primal_value == pytest.approx(-12.7833, abs=1e-3)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_example4_double_min_across_seeds(self, example4, seed):
        """The double-min pair does not depend on a lucky random draw."""
        reports = find_stationary_points(example4, SolveConfig(seed=seed, serial=True))
        assert _find(reports, [0.149286, 3.90584]).triality == TrialityClass.DOUBLE_MIN

    def test_example2_double_max_sign_transfer(self, example2, serial_config):
        """The example 2 double-max pair maximizes Pi locally."""
        double_max = _find(find_stationary_points(example2, serial_config), [0.151452, -1.68381])
        assert double_max.sign_transfer_holds is True
        assert max(double_max.primal_hessian_eigenvalues) <= 1e-8

    def test_example3_double_max_sign_transfer(self, example3, serial_config):
        """The large-tau double-max pair of example 3 maximizes Pi locally."""
        double_max = _find(find_stationary_points(example3, serial_config), [54.3685, -0.492123])
        assert double_max.sign_transfer_holds is True
        assert max(double_max.primal_hessian_eigenvalues) <= 1e-8

    def test_example2_min_max_and_double_max(self, example2, serial_config):
        """Example 2 has a MIN_MAX and a DOUBLE_MAX pair with zero gap."""
        reports = find_stationary_points(example2, serial_config)
        assert _find(reports, [0.142222, 3.60283]).triality == TrialityClass.MIN_MAX
        double_max = _find(reports, [0.151452, -1.68381])
        assert double_max.triality == TrialityClass.DOUBLE_MAX
        assert double_max.x == pytest.approx([-0.474364, -0.427002], abs=1e-4)
        assert double_max.primal_value == pytest.approx(2.98579, abs=1e-3)

    def test_example3_large_tau_double_max(self, example3, serial_config):
        """The double-max pair with tau near 54 is reached from the log-uniform seeds."""
        reports = find_stationary_points(example3, serial_config)
        double_max = _find(reports, [54.3685, -0.492123])
        assert double_max.triality == TrialityClass.DOUBLE_MAX
        assert double_max.x == pytest.approx([-0.0871798, -0.023517], abs=1e-4)
        assert double_max.primal_value == pytest.approx(54.9641, abs=1e-3)

    def test_reports_are_unique_and_ordered(self, example4, serial_config):
        """No two reports share a zeta and the list is ordered by class then value."""
        reports = find_stationary_points(example4, serial_config)
        for i, a in enumerate(reports):
            for b in reports[i + 1 :]:
                za, zb = np.asarray(a.zeta_vector), np.asarray(b.zeta_vector)
                assert np.linalg.norm(za - zb) > 1e-6 * (1 + np.linalg.norm(za))
        keys = [(r.triality.sort_rank, r.primal_value) for r in reports]
        assert keys == sorted(keys)
        assert reports[0].triality == TrialityClass.MIN_MAX

    def test_class_invariants(self, example2, serial_config):
        """MIN_MAX lives in S_a+ and both double classes live in S_a-."""
        for report in find_stationary_points(example2, serial_config):
            assert report.converged
            assert report.gap_residual <= serial_config.gap_tol
            if report.triality == TrialityClass.MIN_MAX:
                assert report.domain == DomainClass.SA_PLUS
            if report.triality in (TrialityClass.DOUBLE_MAX, TrialityClass.DOUBLE_MIN):
                assert report.domain == DomainClass.SA_MINUS

    def test_diagnostics_account_for_every_start(self, example1, serial_config):
        """Converged and dropped starts add up to the starts attempted."""
        search = search_stationary_points(example1, serial_config)
        assert search.starts == serial_config.multistart_count + serial_config.sa_minus_seed_count + 1
        assert search.converged + search.dropped == search.starts
        assert sum(search.drop_reasons.values()) == search.dropped

    def test_dropped_starts_are_counted(self, example1):
        """A one-step budget drops nearly every start as max_iter."""
        search = search_stationary_points(example1, SolveConfig(max_iter=1, multistart_count=8, serial=True))
        assert search.dropped >= 1
        assert "max_iter" in search.drop_reasons

    def test_deterministic_bit_for_bit(self, example4, serial_config):
        """Two runs with the same seed give identical reports."""
        first = [r.to_dict() for r in find_stationary_points(example4, serial_config)]
        second = [r.to_dict() for r in find_stationary_points(example4, serial_config)]
        assert first == second

    def test_threaded_matches_serial(self, example4, serial_config):
        """Threaded execution merges results in start order."""
        serial = [r.to_dict() for r in find_stationary_points(example4, serial_config)]
        threaded = [r.to_dict() for r in find_stationary_points(example4, serial_config.merged(serial=False))]
        assert serial == threaded

    @pytest.mark.slow
    def test_zero_gap_on_random_instances(self, random_problem):
        """Every converged pair on random small instances has zero gap and consistent tags."""
        rng = np.random.default_rng(11)
        cfg = SolveConfig(multistart_count=16, serial=True)
        for seed in range(50):
            problem = random_problem(seed, n=int(rng.integers(1, 4)), p=int(rng.integers(0, 3)), r=int(rng.integers(1, 3)))
            for report in find_stationary_points(problem, cfg):
                assert verify_gap(problem, report) <= 1e-6
                if report.triality == TrialityClass.MIN_MAX:
                    assert report.domain == DomainClass.SA_PLUS
                if report.delta > 0:
                    assert report.domain == DomainClass.SA_PLUS


class TestSaMinusSeeds:
    """Tests for the seed group drawn from G(zeta) negative definite."""

    def test_all_seeds_in_sa_minus(self, example4, serial_config):
        """Every seed has a negative definite G and the requested count is met."""
        seeds = _sa_minus_seed_points(example4, serial_config)
        assert len(seeds) == serial_config.sa_minus_seed_count
        for zeta in seeds:
            assert np.linalg.eigvalsh(combine_matrices(example4, zeta.tau, zeta.sigma)).max() < 0

    def test_positive_sigma_band_covered(self, example4, serial_config):
        """Some seeds sit within unit distance of det G = 0 with sigma above 3."""
        seeds = _sa_minus_seed_points(example4, serial_config)
        near = [z for z in seeds if z.sigma[0] > 3.0 and np.linalg.eigvalsh(combine_matrices(example4, z.tau, z.sigma)).max() > -1.0]
        assert near

    def test_deterministic(self, example4, serial_config):
        """The same seed reproduces the same points."""
        first = _sa_minus_seed_points(example4, serial_config)
        second = _sa_minus_seed_points(example4, serial_config)
        assert [z.as_vector().tolist() for z in first] == [z.as_vector().tolist() for z in second]

    def test_disabled_or_without_quartic_terms(self, example4):
        """A zero count or r = 0 gives no seeds."""
        assert _sa_minus_seed_points(example4, SolveConfig(sa_minus_seed_count=0)) == []
        problem = PrimalProblem(A=[[[-1.0]]], alpha=[0.0], B=np.zeros((0, 1, 1)), beta=[], C=[[1.0]], f=[1.0])
        assert _sa_minus_seed_points(problem, SolveConfig()) == []


# MARK: Recovery and classification
class TestRecoveryAndClassification:
    """Tests for recover_primal, classify_triality and verify_gap."""

    def test_recover_example1(self, example1):
        """x = G^-1 f at the reference dual point."""
        assert recover_primal(example1, DualPoint.of([2.01147], [-0.223104])).tolist() == pytest.approx([1.42283, 0.424878], abs=1e-4)

    def test_recover_example4_double_max(self, example4):
        """x = G^-1 f at the reference double-max dual point."""
        x = recover_primal(example4, DualPoint.of([0.361948], [-1.97615]))
        assert x.tolist() == pytest.approx([-0.141603, -0.166273], abs=1e-4)

    def test_recover_scaled_identity(self):
        """When G = cI the recovered point is f / c."""
        eye = np.eye(2)
        problem = PrimalProblem(A=[eye], alpha=[0.0], B=[eye], beta=[0.0], C=eye, f=[4.0, -2.0])
        x = recover_primal(problem, DualPoint.of([3.0], [0.0]))
        assert x.tolist() == pytest.approx([2.0, -1.0])

    def test_classify_matches_report(self, example4, serial_config):
        """Reclassifying a report reproduces its stored class."""
        for report in find_stationary_points(example4, serial_config):
            assert classify_triality(example4, report, serial_config) == report.triality

    def test_classify_recomputes_missing_eigenvalues(self, example4, serial_config):
        """Without stored Hessian eigenvalues the dual Hessian is recomputed."""
        report = _find(find_stationary_points(example4, serial_config), [0.361948, -1.97615])
        stripped = report.model_copy(update={"dual_hessian_eigenvalues": []})
        assert classify_triality(example4, stripped) == TrialityClass.DOUBLE_MAX

    def test_double_min_needs_square_dual(self):
        """A positive definite dual Hessian with m != n is left unclassified."""
        assert _triality_from(DomainClass.SA_MINUS, [0.5, 0.7], 2, 2, 1e-8) == TrialityClass.DOUBLE_MIN
        assert _triality_from(DomainClass.SA_MINUS, [0.5, 0.7], 2, 3, 1e-8) == TrialityClass.UNCLASSIFIED
        assert _triality_from(DomainClass.INDEFINITE, [-1.0, -2.0], 2, 2, 1e-8) == TrialityClass.UNCLASSIFIED

    def test_verify_gap_example2(self, example2, serial_config):
        """Both example 2 pairs close the gap to 1e-6."""
        reports = find_stationary_points(example2, serial_config)
        assert verify_gap(example2, _find(reports, [0.142222, 3.60283])) <= 1e-6
        assert verify_gap(example2, _find(reports, [0.151452, -1.68381])) <= 1e-6
