"""Unit tests for SolverService.

Tests covered:
- worker_count() / child_seed(): environment override, determinism
- minimize(): monotone energy trace, W = 0 collapses to the trivial
  solution, max_iters = 1 reports non-convergence, certificate recompute
- pm_distance() / canonical_sign() / merge()
- DeflationOperator: factor, log-derivative against finite differences, step
- deflated_newton(): returns to an undeflated root, leaves a deflated one
- ray_minimizer() / initializers(): scaled to the ray minimum, sign symmetry
- multi_solution(): distinct solutions, invalid k, odd symmetry, seeds,
  k = 3 on a fine grid and on noncoercive_B
"""

import numpy as np
import pytest

from src.models.grid import Grid, GridFunction
from src.models.results import Provenance, SolverOptions
from src.repositories.builtin_instance_repository import with_zero_potential
from src.services import solver_service
from src.services.solver_service import DeflationOperator, child_seed, worker_count


@pytest.fixture(scope="module")
def start(coercive_a):
    return GridFunction.from_callable(coercive_a.grid, lambda t: np.exp(-(t**2) / 2.0))


@pytest.fixture(scope="module")
def ground(solver, coercive_a, start):
    return solver.minimize(coercive_a, start, SolverOptions())


class TestHelpers:
    """Test worker_count and child_seed."""

    def test_worker_count_from_environment(self, monkeypatch):
        """GIVEN FRACHAM_THREADS=3 / WHEN worker_count / THEN 3"""
        monkeypatch.setenv("FRACHAM_THREADS", "3")
        assert worker_count() == 3

    def test_worker_count_legacy_variable(self, monkeypatch):
        monkeypatch.delenv("FRACHAM_THREADS", raising=False)
        monkeypatch.setenv("FRACHS_THREADS", "2")
        assert worker_count() == 2

    def test_worker_count_default(self, monkeypatch):
        monkeypatch.delenv("FRACHAM_THREADS", raising=False)
        monkeypatch.delenv("FRACHS_THREADS", raising=False)
        assert worker_count() >= 1

    def test_child_seed_is_deterministic(self):
        """GIVEN the same (seed, label) / WHEN child_seed / THEN same value; other labels differ"""
        assert child_seed(0, "random_1") == child_seed(0, "random_1")
        assert child_seed(0, "random_1") != child_seed(0, "random_2")
        assert child_seed(0, "random_1") != child_seed(1, "random_1")

    def test_child_seed_accepts_large_seeds(self):
        assert child_seed(2**64 - 1, "random_1") >= 0


class TestMinimize:
    """Test the single descent."""

    def test_energy_trace_is_monotone(self, solver, coercive_a, start):
        """GIVEN coercive_A / WHEN minimize / THEN trace nonincreasing and converged"""
        solution = solver.minimize(coercive_a, start, SolverOptions(grad_tol=1e-6))
        trace = np.array(solution.energy_trace)
        assert np.all(np.diff(trace) <= 1e-14 * (1.0 + np.abs(trace[:-1])))
        assert solution.converged
        assert solution.residual_norm <= 1e-6
        assert solution.energy.total < 0
        assert solution.nontrivial

    def test_zero_potential_converges_to_trivial(self, solver, coercive_a, start):
        """GIVEN W = 0 / WHEN minimize / THEN ||u||_X ~ 0, converged, trivial"""
        instance = with_zero_potential(coercive_a)
        solution = solver.minimize(instance, start, SolverOptions(grad_tol=1e-8))
        assert solution.converged
        assert solution.xalpha_norm <= 1e-6
        assert not solution.nontrivial

    def test_single_iteration_is_not_converged(self, solver, coercive_a, start, mocker):
        """GIVEN max_iters=1 / WHEN minimize / THEN converged=False and a warning is sent"""
        capture = mocker.patch.object(solver_service, "capture_message")
        solution = solver.minimize(coercive_a, start, SolverOptions(max_iters=1))
        assert solution.iterations == 1
        assert not solution.converged
        assert not solution.accepted
        capture.assert_called_once()
        assert capture.call_args.kwargs["level"] == "warning"

    def test_certify_recomputes(self, solver, coercive_a, start):
        """GIVEN converged=True but a large residual / WHEN certify / THEN not converged"""
        solution = solver.certify(coercive_a, start, 0, True, Provenance("given", 0))
        assert not solution.converged
        assert solution.residual_norm > 1e-6

    def test_unpreconditioned_direction(self, solver, coercive_a, start):
        """GIVEN precondition=false / WHEN a few iterations / THEN energy still decreases"""
        solution = solver.minimize(coercive_a, start, SolverOptions(max_iters=20, precondition=False))
        assert solution.energy_trace[-1] < solution.energy_trace[0]

    @pytest.mark.slow
    def test_ground_state_insensitive_to_smoothing(self, solver, instances, small_grid):
        """GIVEN eps = 0 and eps = 1e-9 / WHEN minimize / THEN ground states agree to 1e-5 in X"""
        start = GridFunction.from_callable(small_grid, lambda t: np.exp(-(t**2) / 2.0))
        exact = instances.get("coercive_A", small_grid, epsilon=0.0)
        smoothed = instances.get("coercive_A", small_grid, epsilon=1e-9)
        first = solver.minimize(exact, start, SolverOptions())
        second = solver.minimize(smoothed, start, SolverOptions())
        assert first.converged and second.converged
        assert solver.pm_distance(first.u, second.u, smoothed) <= 1e-5


class TestMerge:
    """Test the +-aware deduplication."""

    def test_pm_distance_identifies_negation(self, solver, coercive_a, start):
        assert solver.pm_distance(start, -1.0 * start, coercive_a) == 0.0
        assert solver.pm_distance(start, 2.0 * start, coercive_a) > 0

    def test_canonical_sign(self, solver, basis_service, coercive_a, start):
        """GIVEN u and -u / WHEN canonical_sign / THEN the same representative"""
        basis = basis_service.build_basis(coercive_a, 8)
        plus = solver.certify(coercive_a, start, 0, False, Provenance("given", 0))
        minus = solver.certify(coercive_a, -1.0 * start, 0, False, Provenance("given", 0))
        a = solver.canonical_sign(plus, basis, coercive_a)
        b = solver.canonical_sign(minus, basis, coercive_a)
        np.testing.assert_array_equal(a.u.values, b.u.values)
        assert b.provenance.ancestry == ("negated",)


@pytest.mark.slow
class TestMultiSolution:
    """Test multi_solution on coercive_A."""

    @pytest.fixture(scope="class")
    def result(self, solver, coercive_a):
        return solver.multi_solution(coercive_a, 2, SolverOptions(seed=0))

    def test_distinct_nontrivial_solutions(self, solver, coercive_a, result):
        """GIVEN k=2 / WHEN multi_solution / THEN 2 accepted, pairwise distinct up to sign"""
        assert len(result.solutions) == 2
        assert not result.shortfall
        for solution in result.solutions:
            assert solution.accepted and solution.nontrivial
            assert solution.energy.total < 0
        first, second = result.solutions
        assert solver.pm_distance(first.u, second.u, coercive_a) > 1e-3

    def test_sorted_by_energy(self, result):
        energies = [s.energy.total for s in result.solutions]
        assert energies == sorted(energies)

    def test_candidates_counted(self, result):
        # one descent, then at least one round of Newton runs
        assert result.candidates >= 2
        assert result.details["rounds"] >= 1
        assert result.requested == 2

    def test_second_solution_is_a_newton_saddle(self, result):
        assert any("deflated_newton" in s.provenance.ancestry for s in result.solutions)

    def test_odd_symmetry(self, solver, coercive_a, result):
        """GIVEN negated initializers / WHEN multi_solution / THEN same solutions after sign normalization"""
        mirrored = solver.multi_solution(coercive_a, 2, SolverOptions(seed=0), negate=True)
        for a, b in zip(result.solutions, mirrored.solutions):
            assert b.energy.total == pytest.approx(a.energy.total, rel=1e-12)
            np.testing.assert_allclose(b.u.values, a.u.values, atol=1e-10)

    def test_deterministic(self, solver, coercive_a, result):
        again = solver.multi_solution(coercive_a, 2, SolverOptions(seed=0))
        assert [s.energy.total for s in again.solutions] == [s.energy.total for s in result.solutions]


class TestMultiSolutionValidation:
    """Test multi_solution argument checks."""

    def test_k_zero_rejected(self, solver, coercive_a):
        with pytest.raises(ValueError):
            solver.multi_solution(coercive_a, 0)


class TestDeflationOperator:
    """Test the multiplicative deflation factor."""

    def test_without_known_only_zero_is_deflated(self, energy, coercive_a, start):
        """GIVEN no known solutions / WHEN factor(u) / THEN ||u||_X^-2 + 1"""
        operator = DeflationOperator(energy, coercive_a)
        norm = energy.xalpha_norm(start, coercive_a)
        assert operator.factor(start) == pytest.approx(norm**-2 + 1.0, rel=1e-12)

    def test_factor_grows_near_a_root(self, energy, coercive_a, start):
        operator = DeflationOperator(energy, coercive_a, [start])
        assert operator.factor(1.001 * start) > 1e4 * operator.factor(3.0 * start)

    def test_factor_is_even(self, energy, coercive_a, start, band_limited):
        """GIVEN roots 0 and +-r / WHEN factor(u) and factor(-u) / THEN bitwise equal"""
        operator = DeflationOperator(energy, coercive_a, [start])
        u = 0.1 * band_limited(coercive_a.grid, 3, modes=8) + start * 0.5
        assert operator.factor(u) == operator.factor(-1.0 * u)

    def test_log_derivative_matches_finite_difference(self, energy, coercive_a, start, band_limited):
        """GIVEN u, d / WHEN M'(u)d / M(u) / THEN central difference of log M to 1e-6"""
        operator = DeflationOperator(energy, coercive_a, [start])
        u = 0.7 * start + 0.05 * band_limited(coercive_a.grid, 5, modes=8)
        d = 0.05 * band_limited(coercive_a.grid, 6, modes=8)
        h = 1e-6
        numeric = (
            np.log(operator.factor(u + h * d)) - np.log(operator.factor(u - h * d))
        ) / (2.0 * h)
        assert operator.log_derivative(u, d) == pytest.approx(numeric, rel=1e-6)

    def test_step_divides_by_deflation_denominator(self, energy, coercive_a, start, band_limited):
        operator = DeflationOperator(energy, coercive_a, [start])
        u = 0.7 * start
        d = 0.05 * band_limited(coercive_a.grid, 6, modes=8)
        tau = 1.0 - operator.log_derivative(u, d)
        np.testing.assert_allclose(operator.step(u, d).values, d.values / tau)


class TestDeflatedNewton:
    """Test the Newton-Krylov iteration."""

    def test_returns_to_an_undeflated_root(self, solver, coercive_a, ground, band_limited):
        """GIVEN the ground state plus a small bump / WHEN deflated_newton without known roots / THEN back to it"""
        assert ground.accepted
        u0 = ground.u + 1e-3 * band_limited(coercive_a.grid, 8, modes=8)
        solution = solver.deflated_newton(coercive_a, u0, (), SolverOptions(grad_tol=1e-7))
        assert solution.converged
        assert solution.residual_norm <= 1e-7
        assert solver.pm_distance(solution.u, ground.u, coercive_a) <= 1e-4
        assert solution.provenance.ancestry == ("deflated_newton",)

    def test_leaves_a_deflated_root(self, solver, coercive_a, ground, band_limited):
        """GIVEN the ground state deflated / WHEN deflated_newton from next to it / THEN it does not return"""
        u0 = ground.u + 1e-3 * band_limited(coercive_a.grid, 8, modes=8)
        solution = solver.deflated_newton(coercive_a, u0, (ground.u,), SolverOptions())
        assert not (
            solution.accepted
            and solver.pm_distance(solution.u, ground.u, coercive_a) <= 1e-3
        )

    def test_certificate_uses_the_undeflated_residual(self, solver, energy, coercive_a, ground):
        solution = solver.deflated_newton(coercive_a, ground.u, (), SolverOptions())
        assert solution.residual_norm == energy.residual_norm(solution.u, coercive_a)
        assert solution.iterations == 0


class TestInitializers:
    """Test the scaled initializers."""

    @pytest.fixture(scope="class")
    def basis(self, basis_service, coercive_a):
        return basis_service.build_basis(coercive_a, 8)

    def test_ray_minimizer_is_a_minimum(self, solver, energy, coercive_a, basis):
        """GIVEN e_1 / WHEN ray_minimizer / THEN I(s e_1) <= I at 0.9 s and 1.1 s, and < 0"""
        s = solver.ray_minimizer(coercive_a, basis[0])

        def at(x):
            return energy.value(x * basis[0], coercive_a)

        assert at(s) < 0
        assert at(s) <= at(0.9 * s)
        assert at(s) <= at(1.1 * s)

    def test_initializers_count_and_sign(self, solver, coercive_a, basis):
        """GIVEN k=2 / WHEN initializers and their negation / THEN 8 + 4 starts, exact mirror"""
        plus = solver.initializers(coercive_a, basis, 2, seed=0)
        minus = solver.initializers(coercive_a, basis, 2, seed=0, negate=True)
        assert [label for label, _ in plus][:2] == ["basis_1", "basis_2"]
        assert len(plus) == 12
        for (_, a), (_, b) in zip(plus, minus):
            np.testing.assert_array_equal(a.values, -b.values)


@pytest.mark.slow
class TestMultiplicityRuns:
    """Test multi_solution on the acceptance instances."""

    def _check(self, solver, instance, result, k):
        assert len(result.solutions) == k
        for solution in result.solutions:
            assert solution.accepted and solution.nontrivial
            assert solution.residual_norm <= 1e-6
            assert solution.energy.total < 0
        for i, a in enumerate(result.solutions):
            for b in result.solutions[i + 1:]:
                assert solver.pm_distance(a.u, b.u, instance) > 1e-3

    def test_three_solutions_on_fine_grid(self, solver, instances):
        """GIVEN coercive_A at T=20, N=2048 / WHEN multi_solution(k=3) / THEN 3 distinct negative-energy solutions"""
        instance = instances.get("coercive_A", Grid(20.0, 2048))
        result = solver.multi_solution(instance, 3, SolverOptions(seed=7))
        self._check(solver, instance, result, 3)

    def test_three_solutions_are_reproducible(self, solver, coercive_a):
        first = solver.multi_solution(coercive_a, 3, SolverOptions(seed=7))
        second = solver.multi_solution(coercive_a, 3, SolverOptions(seed=7))
        assert [s.energy.total for s in first.solutions] == [s.energy.total for s in second.solutions]
        for a, b in zip(first.solutions, second.solutions):
            np.testing.assert_array_equal(a.u.values, b.u.values)

    def test_noncoercive_instance(self, solver, noncoercive_b):
        """GIVEN noncoercive_B / WHEN multi_solution(k=2) / THEN 2 distinct negative-energy solutions"""
        result = solver.multi_solution(noncoercive_b, 2, SolverOptions(seed=0))
        self._check(solver, noncoercive_b, result, 2)
