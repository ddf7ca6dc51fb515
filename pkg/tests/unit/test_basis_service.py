"""Unit tests for BasisService.

Tests covered:
- hermite_functions(): L2 orthonormality on a fine grid
- normalized_gram_determinant(): unit, singular and degenerate Gram matrices
- basis_scale() / scale_window(): operator-adapted scale inside the window
- build_basis(): X^a orthonormality, Ritz ordering and signs, size with
  n > 1, invalid J, rank deficiency
- estimate_beta(): monotone in j and in J, truncated-tail decay, invariance
  under rotations of the tail, the 1/sqrt(inf l) bound
- beta_table(): refinement column and its 5% agreement
"""

import numpy as np
import pytest

from src.models.errors import RankDeficiencyError
from src.models.grid import Grid
from src.models.results import BasisSet
from src.services.basis_service import (
    BETA_TOLERANCE,
    hermite_functions,
    normalized_gram_determinant,
)


class TestHermiteFunctions:
    """Test the Hermite recurrence."""

    def test_l2_orthonormal(self):
        """GIVEN psi_0..psi_11 / WHEN L2 Gram on [-20, 20] / THEN identity"""
        x = np.linspace(-20, 20, 8001)
        psi = hermite_functions(x, 12)
        gram = (x[1] - x[0]) * psi @ psi.T
        np.testing.assert_allclose(gram, np.eye(12), atol=1e-10)

    def test_parity(self):
        x = np.linspace(-3, 3, 61)
        psi = hermite_functions(x, 4)
        np.testing.assert_allclose(psi[2], psi[2][::-1])
        np.testing.assert_allclose(psi[3], -psi[3][::-1])


class TestGramDeterminant:
    """Test normalized_gram_determinant."""

    @pytest.mark.parametrize(
        "gram,expected",
        [
            (np.diag([4.0, 9.0]), 1.0),
            (np.array([[1.0, 1.0], [1.0, 1.0]]), 0.0),
            (np.diag([1.0, 0.0]), 0.0),
        ],
        ids=["diagonal", "repeated_function", "zero_function"],
    )
    def test_values(self, gram, expected):
        assert normalized_gram_determinant(gram) == pytest.approx(expected, abs=1e-14)

    def test_independent_of_scaling(self):
        """GIVEN G and D G D / WHEN normalized determinant / THEN equal"""
        gram = np.array([[2.0, 0.5], [0.5, 1.0]])
        scaling = np.diag([10.0, 0.1])
        assert normalized_gram_determinant(scaling @ gram @ scaling) == pytest.approx(
            normalized_gram_determinant(gram), rel=1e-12
        )


class TestScale:
    """Test the operator-adapted Hermite scale."""

    def test_scale_inside_window(self, basis_service, coercive_a):
        lower, upper = basis_service.scale_window(coercive_a, 64)
        scale = basis_service.basis_scale(coercive_a, 64)
        assert 0 < lower < upper <= np.sqrt(coercive_a.grid.T)
        assert lower <= scale <= upper

    def test_scale_lowers_rayleigh_quotient(self, basis_service, energy, coercive_a):
        """GIVEN the chosen scale and sqrt(T) / WHEN ||psi_0||_X^2 / ||psi_0||^2 / THEN chosen is lower"""

        def quotient(scale):
            stack = basis_service.candidates(coercive_a, 1, scale)
            return (
                energy.xalpha_gram(stack, coercive_a)[0, 0]
                / energy.l2_gram(stack, coercive_a.grid)[0, 0]
            )

        chosen = basis_service.basis_scale(coercive_a, 64)
        assert quotient(chosen) <= quotient(np.sqrt(coercive_a.grid.T))

    def test_window_shrinks_with_count(self, basis_service, coercive_a):
        few = basis_service.scale_window(coercive_a, 8)
        many = basis_service.scale_window(coercive_a, 64)
        assert many[0] > few[0]
        assert many[1] <= few[1]


class TestBuildBasis:
    """Test build_basis."""

    def test_orthonormal_in_xalpha(self, basis_service, coercive_a):
        """GIVEN J=16 / WHEN build_basis / THEN X^a Gram = I to 1e-10"""
        basis = basis_service.build_basis(coercive_a, 16)
        assert len(basis) == 16
        assert basis_service.orthonormality_defect(coercive_a, basis) <= 1e-10

    def test_ritz_ordering(self, basis_service, energy, coercive_a):
        """GIVEN J=16 / WHEN L2 Gram of the basis / THEN diagonal and decreasing"""
        basis = basis_service.build_basis(coercive_a, 16)
        gram = energy.l2_gram(basis.stacked(), coercive_a.grid)
        diagonal = np.diag(gram)
        np.testing.assert_allclose(gram - np.diag(diagonal), 0.0, atol=1e-10)
        assert np.all(np.diff(diagonal) <= 1e-12)

    def test_rebuild_is_identical(self, basis_service, coercive_a):
        """GIVEN the Ritz sign convention / WHEN rebuilding / THEN identical functions"""
        first = basis_service.build_basis(coercive_a, 8)
        second = basis_service.build_basis(coercive_a, 8)
        for a, b in zip(first.functions, second.functions):
            np.testing.assert_array_equal(a.values, b.values)

    def test_vector_basis_size(self, basis_service, vector_c):
        """GIVEN n=2, J=4 / WHEN build_basis / THEN 8 functions with 2 components"""
        basis = basis_service.build_basis(vector_c, 4)
        assert len(basis) == 8
        assert basis[0].dim == 2
        assert basis_service.orthonormality_defect(vector_c, basis) <= 1e-10

    @pytest.mark.parametrize("J", [0, 129], ids=["zero", "above_N_over_4"])
    def test_invalid_size(self, basis_service, coercive_a, J):
        with pytest.raises(ValueError):
            basis_service.build_basis(coercive_a, J)

    @pytest.mark.parametrize("scale", [20.0, 0.01], ids=["too_wide", "below_grid_spacing"])
    def test_rank_deficiency(self, basis_service, instances, scale):
        """GIVEN 16 candidates the 64-point grid cannot separate / WHEN build_basis / THEN RankDeficiencyError"""
        coarse = instances.get("coercive_A", Grid(20.0, 64))
        with pytest.raises(RankDeficiencyError):
            basis_service.build_basis(coarse, 16, scale=scale)

    def test_default_scale_passes_rank_check(self, basis_service, coercive_a):
        basis = basis_service.build_basis(coercive_a, 64)
        assert len(basis) == 64

    def test_combine(self, basis_service, coercive_a):
        basis = basis_service.build_basis(coercive_a, 4)
        combined = basis.combine(np.array([0.0, 2.0]))
        np.testing.assert_allclose(combined.values, 2.0 * basis[1].values)


class TestBeta:
    """Test estimate_beta and beta_table."""

    @pytest.fixture(scope="class")
    def bases(self, basis_service, coercive_a):
        # one scale, so the J=16 span lies inside the J=32 span
        scale = basis_service.basis_scale(coercive_a, 64)
        return (
            basis_service.build_basis(coercive_a, 16, scale=scale),
            basis_service.build_basis(coercive_a, 32, scale=scale),
        )

    def test_nonincreasing_in_j(self, basis_service, coercive_a, bases):
        """GIVEN J=16 and J=32 / WHEN beta_1..beta_J / THEN nonincreasing"""
        for basis in bases:
            betas = [basis_service.estimate_beta(coercive_a, basis, j) for j in range(1, len(basis) + 1)]
            assert all(b <= a + 1e-12 for a, b in zip(betas, betas[1:]))

    def test_beta_1_below_inverse_root_of_inf_l(self, basis_service, coercive_a, bases):
        bound = 1.0 / np.sqrt(coercive_a.inf_l) + 1e-8
        for basis in bases:
            assert basis_service.estimate_beta(coercive_a, basis, 1) <= bound

    def test_beta_is_l2_norm_of_ritz_function(self, basis_service, spectral, coercive_a, bases):
        basis = bases[0]
        for j in (1, 5, 16):
            assert basis_service.estimate_beta(coercive_a, basis, j) == pytest.approx(
                spectral.l2_norm(basis[j - 1]), rel=1e-10
            )

    def test_tail_decay(self, basis_service, coercive_a, bases):
        """GIVEN J=32 / WHEN beta_16 vs beta_1 / THEN beta_16 <= beta_1 / 2"""
        basis = bases[1]
        assert basis_service.estimate_beta(coercive_a, basis, 16) <= 0.5 * basis_service.estimate_beta(
            coercive_a, basis, 1
        )

    def test_larger_basis_does_not_shrink_beta(self, basis_service, coercive_a, bases):
        """GIVEN nested spans / WHEN beta_1..beta_16 for J=16 and J=32 / THEN the larger span dominates"""
        small, large = bases
        for j in range(1, 17):
            assert basis_service.estimate_beta(coercive_a, large, j) >= basis_service.estimate_beta(
                coercive_a, small, j
            ) - 1e-12

    def test_invariant_under_tail_rotation(self, basis_service, coercive_a, bases):
        """GIVEN e_j..e_J rotated by an orthogonal matrix / WHEN estimate_beta(j) / THEN unchanged to 1e-8"""
        basis = bases[0]
        j = 4
        rng = np.random.default_rng(11)
        rotation, _ = np.linalg.qr(rng.standard_normal((len(basis) - j + 1,) * 2))
        stack = basis.stacked()
        tail = np.tensordot(rotation, stack[j - 1:], axes=1)
        rotated = BasisSet(
            functions=basis.functions[: j - 1]
            + tuple(basis[0].with_values(values) for values in tail),
            size_parameter=basis.size_parameter,
            scale=basis.scale,
        )
        assert basis_service.estimate_beta(coercive_a, rotated, j) == pytest.approx(
            basis_service.estimate_beta(coercive_a, basis, j), abs=1e-8
        )

    @pytest.mark.parametrize("j", [0, 17], ids=["zero", "beyond_J"])
    def test_index_out_of_range(self, basis_service, coercive_a, bases, j):
        with pytest.raises(ValueError):
            basis_service.estimate_beta(coercive_a, bases[0], j)

    def test_beta_table_refines(self, basis_service, coercive_a):
        """GIVEN J=8, j_max=3 / WHEN beta_table / THEN three rows with a J=16 column"""
        table = basis_service.beta_table(coercive_a, 8, j_max=3)
        assert [row.j for row in table] == [1, 2, 3]
        assert all(row.basis_size == 8 for row in table)
        assert all(row.refined is not None and row.refined >= row.beta - 1e-12 for row in table)
        assert table[0].label == "truncated-tail estimate"

    def test_beta_table_converges(self, basis_service, coercive_a):
        """GIVEN J=32 / WHEN beta_table / THEN beta_1..beta_4 move by <= 5% at J=64, beta_16 <= beta_1/2"""
        table = basis_service.beta_table(coercive_a, 32)
        assert all(row.relative_change <= BETA_TOLERANCE for row in table[:4])
        assert table[15].beta <= 0.5 * table[0].beta

    def test_beta_table_without_refinement(self, basis_service, coercive_a):
        table = basis_service.beta_table(coercive_a, 8, refine=False)
        assert len(table) == 8
        assert all(row.refined is None for row in table)

    def test_embedding_constant_is_beta_1(self, basis_service, coercive_a, bases):
        assert basis_service.embedding_constant(coercive_a, bases[0]) == basis_service.estimate_beta(
            coercive_a, bases[0], 1
        )
