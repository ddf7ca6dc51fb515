"""Unit tests for MinimaxService.

Tests covered:
- radius_from_constants(): scaling in ||b||, zero weight
- coercivity_radius(): sampled energies positive at 2 tau
- sphere_maximum(): ascent never lowers a start's energy
- estimate_cj(): W = 0 gives a positive level, coercive_A negative levels
  above the analytic lower bound with an interior optimal radius, the
  downward extension of the radius grid, index errors
- estimate_levels(): the shared tau is checked by sampling
"""

import math

import numpy as np
import pytest

from src.models.results import SolverOptions
from src.services import minimax_service
from src.repositories.builtin_instance_repository import with_zero_potential

FAST = SolverOptions(sphere_starts=8, sphere_iters=20, radius_points=9)


@pytest.fixture(scope="module")
def basis(basis_service, coercive_a):
    return basis_service.build_basis(coercive_a, 8)


class TestCoercivityRadius:
    """Test the radius tau."""

    def test_scaling_in_b(self, minimax):
        """GIVEN ||b|| doubled / WHEN radius_from_constants / THEN tau times 2^(1/(2-theta))"""
        tau = minimax.radius_from_constants(1.5, 0.3, 1.0)
        doubled = minimax.radius_from_constants(1.5, 0.3, 2.0)
        assert doubled == pytest.approx(tau * 2.0 ** (1.0 / 0.5))

    def test_zero_weight(self, minimax):
        """GIVEN b = 0 / WHEN radius_from_constants / THEN tau = 0"""
        assert minimax.radius_from_constants(1.5, 0.3, 0.0) == 0.0

    def test_energy_positive_beyond_tau(self, minimax, coercive_a, basis):
        """GIVEN coercive_A / WHEN 100 samples at ||u||_X = 2 tau / THEN all I > 0"""
        radius = minimax.coercivity_radius(coercive_a, basis)
        assert radius.tau > 0
        assert radius.samples == 100
        assert radius.verified
        assert radius.min_sampled_energy > 0

    def test_zero_potential_radius(self, minimax, coercive_a, basis):
        radius = minimax.coercivity_radius(with_zero_potential(coercive_a), basis)
        assert radius.tau == 0.0
        assert radius.verified


class TestSphereMaximum:
    """Test the projected ascent."""

    def test_ascent_never_decreases(self, minimax, coercive_a, basis):
        """GIVEN 6 starts on the unit sphere of span{e_1..e_3} / WHEN more iterations / THEN no start loses"""
        stack = basis.stacked()[:3]
        starts = minimax.starting_directions(3, 6, seed=0)
        initial, _ = minimax.sphere_maximum(coercive_a, stack, 0.05, starts, 0)
        final, directions = minimax.sphere_maximum(coercive_a, stack, 0.05, starts, 30)
        assert np.all(final >= initial - 1e-15)
        np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0)

    def test_starting_directions(self, minimax):
        """GIVEN j=3, count=5 / WHEN starting_directions / THEN e_1..e_3 then 2 unit vectors"""
        starts = minimax.starting_directions(3, 5, seed=4)
        np.testing.assert_array_equal(starts[:3], np.eye(3))
        assert starts.shape == (5, 3)
        np.testing.assert_allclose(np.linalg.norm(starts, axis=1), 1.0)
        np.testing.assert_array_equal(starts, minimax.starting_directions(3, 5, seed=4))


class TestEstimateCj:
    """Test estimate_cj and estimate_levels."""

    def test_zero_potential_level_is_positive(self, minimax, coercive_a, basis):
        """GIVEN W = 0 / WHEN estimate_cj(j=1) / THEN c_hat = delta_min^2 / 2 > 0"""
        estimate = minimax.estimate_cj(with_zero_potential(coercive_a), basis, 1, FAST)
        assert estimate.c_hat > 0
        assert not estimate.negative
        assert estimate.c_hat == pytest.approx(0.5 * estimate.optimal_radius**2, rel=1e-10)

    @pytest.mark.slow
    def test_negative_levels_above_lower_bound(self, minimax, coercive_a, basis):
        """GIVEN coercive_A / WHEN estimate_levels(j_max=4) / THEN c_hat_j < 0, bound holds, delta* interior"""
        levels = minimax.estimate_levels(coercive_a, basis, 4, FAST)
        assert [level.j for level in levels] == [1, 2, 3, 4]
        for level in levels:
            assert level.negative
            assert level.bound_holds
            assert len(level.radius_profile) >= 9
            assert level.restarts == 8
            radii = [radius for radius, _ in level.radius_profile]
            assert radii == sorted(radii)
            assert radii[0] < level.optimal_radius < radii[-1]

    def test_grid_extends_below_a_negative_floor(self, minimax, coercive_a, basis, monkeypatch):
        """GIVEN a radius grid starting above delta* / WHEN estimate_cj(j=1) / THEN the grid grows downwards to delta*"""
        reference = minimax.estimate_cj(coercive_a, basis, 1, FAST)
        low = math.log10(1.3 * reference.optimal_radius)
        monkeypatch.setattr(minimax_service, "RADIUS_RANGE", (low, low + 1.0))

        estimate = minimax.estimate_cj(coercive_a, basis, 1, FAST)

        radii = [radius for radius, _ in estimate.radius_profile]
        assert radii[0] < 10.0**low
        assert radii[0] < estimate.optimal_radius < radii[-1]
        assert estimate.c_hat == pytest.approx(reference.c_hat, rel=1e-2)

    def test_positive_floor_is_not_extended(self, minimax, coercive_a, basis):
        """GIVEN W = 0 / WHEN estimate_cj / THEN the grid starts at 1e-3"""
        estimate = minimax.estimate_cj(with_zero_potential(coercive_a), basis, 1, FAST)
        assert estimate.radius_profile[0][0] == pytest.approx(1e-3)
        assert estimate.optimal_radius == pytest.approx(1e-3)

    def test_levels_check_tau_by_sampling(self, minimax, coercive_a, basis, mocker):
        """GIVEN estimate_levels / WHEN tau is computed / THEN it is checked on 100 samples"""
        spy = mocker.spy(minimax, "coercivity_radius")
        minimax.estimate_levels(coercive_a, basis, 1, FAST)
        radius = spy.spy_return
        assert radius.samples == 100
        assert math.isfinite(radius.min_sampled_energy)
        assert radius.verified

    def test_certificate_recomputes_energy(self, minimax, energy, coercive_a, basis):
        """GIVEN the certificate point / WHEN I evaluated directly / THEN equals c_hat"""
        estimate = minimax.estimate_cj(coercive_a, basis, 2, FAST)
        point = estimate.certificate[0]
        u = basis.combine(point.radius * np.array(point.coordinates))
        assert energy.value(u, coercive_a) == pytest.approx(estimate.c_hat, rel=1e-12)
        assert len(point.coordinates) == 2

    @pytest.mark.parametrize("j", [0, 9], ids=["zero", "beyond_basis"])
    def test_index_out_of_range(self, minimax, coercive_a, basis, j):
        with pytest.raises(ValueError):
            minimax.estimate_cj(coercive_a, basis, j, FAST)

    def test_lower_bound_formula(self, minimax):
        assert minimax.lower_bound(1.5, 0.25, 2.0, 4.0) == pytest.approx(
            -(0.25**1.5 / 1.5) * 2.0 * 4.0**1.5
        )
