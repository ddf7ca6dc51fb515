"""Hermite bases of X^a and truncated embedding constants beta_j.

Candidates are the normalized Hermite functions psi_k(t/s) times the
coordinate vectors of R^n, ordered (k, coordinate). The scale s minimizes
the Rayleigh quotient ||.||_X^2 / ||.||_L2^2 of psi_0(t/s) inside the
window the grid resolves, so the candidates follow the operator's own
length scale.

The candidates are orthonormalized in X^a by modified Gram-Schmidt with one
re-orthogonalization pass, then rotated inside their span so that the L2
Gram matrix is diagonal with decreasing entries (Rayleigh-Ritz). After the
rotation e_1, e_2, .. are ordered from the lowest to the highest Ritz level
and beta_j is exactly the L2 norm of e_j.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from src.models.errors import RankDeficiencyError
from src.models.grid import GridFunction
from src.models.problem import ProblemInstance
from src.models.results import BasisSet, BetaEstimate
from src.services.energy_service import EnergyService

logger = logging.getLogger(__name__)

RANK_THRESHOLD = 1e-8
BETA_TOLERANCE = 0.05
# fraction of the box (and of the band limit) a Hermite function may use
RESOLUTION_MARGIN = 0.8
SCALE_SAMPLES = 41


def hermite_functions(x: np.ndarray, count: int) -> np.ndarray:
    """psi_0..psi_{count-1} at x, by the stable three-term recurrence."""
    x = np.asarray(x, dtype=float)
    values = np.zeros((count, x.size))
    values[0] = np.pi ** -0.25 * np.exp(-0.5 * x**2)
    if count > 1:
        values[1] = np.sqrt(2.0) * x * values[0]
    for k in range(1, count - 1):
        values[k + 1] = (
            np.sqrt(2.0 / (k + 1)) * x * values[k] - np.sqrt(k / (k + 1)) * values[k - 1]
        )
    return values


def normalized_gram_determinant(gram: np.ndarray) -> float:
    """det of D^-1/2 G D^-1/2; 0 when a diagonal entry vanishes."""
    diagonal = np.diag(gram)
    if np.any(diagonal <= 0):
        return 0.0
    scale = 1.0 / np.sqrt(diagonal)
    sign, logdet = np.linalg.slogdet(gram * np.outer(scale, scale))
    return float(np.exp(logdet)) if sign > 0 else 0.0


class BasisService:
    """Basis construction and beta_j estimation."""

    def __init__(self, energy: EnergyService) -> None:
        self.energy = energy

    # scale ----------------------------------------------------------------

    @staticmethod
    def scale_window(instance: ProblemInstance, count: int) -> Tuple[float, float]:
        """(s_min, s_max) for which psi_0..psi_{count-1}(t/s) fit the grid.

        psi_k lives on |x| <= sqrt(2k + 1) in space and in frequency, so
        s * sqrt(2 count + 1) must stay inside the box and
        sqrt(2 count + 1) / s below the largest grid frequency.
        """
        grid = instance.grid
        reach = np.sqrt(2.0 * count + 1.0)
        w_max = float(np.max(np.abs(grid.frequencies)))
        upper = min(np.sqrt(grid.T), RESOLUTION_MARGIN * grid.T / reach)
        lower = reach / (RESOLUTION_MARGIN * w_max)
        return lower, upper

    def basis_scale(self, instance: ProblemInstance, count: int) -> float:
        """Hermite scale for count functions per coordinate."""
        lower, upper = self.scale_window(instance, count)
        if lower >= upper:
            logger.warning(
                "grid too coarse for %d Hermite functions on %s (scale window %.3g > %.3g)",
                count,
                instance.name,
                lower,
                upper,
            )
            return float(np.sqrt(lower * upper))

        grid = instance.grid
        n = instance.dim
        best_scale, best_quotient = upper, np.inf
        for scale in np.geomspace(lower, upper, SCALE_SAMPLES):
            psi = hermite_functions(grid.nodes / scale, 1)[0]
            stack = np.zeros((n, grid.N, n))
            for c in range(n):
                stack[c, :, c] = psi
            quotients = np.diag(self.energy.xalpha_gram(stack, instance)) / np.diag(
                self.energy.l2_gram(stack, grid)
            )
            quotient = float(np.min(quotients))
            if quotient < best_quotient:
                best_scale, best_quotient = float(scale), quotient
        logger.debug("Hermite scale %.4g for %s (Rayleigh %.4g)", best_scale, instance.name, best_quotient)
        return best_scale

    # construction -----------------------------------------------------------

    def candidates(self, instance: ProblemInstance, J: int, scale: float) -> np.ndarray:
        grid = instance.grid
        psi = hermite_functions(grid.nodes / scale, J)
        n = instance.dim
        stack = np.zeros((J * n, grid.N, n))
        for k in range(J):
            for c in range(n):
                stack[k * n + c, :, c] = psi[k]
        return stack

    def build_basis(
        self, instance: ProblemInstance, J: int, scale: Optional[float] = None
    ) -> BasisSet:
        """X^a-orthonormal Ritz basis of J (times n) functions.

        The default scale is the one of a 2J basis, so that beta_table's
        refinement spans contain the J span.

        Raises:
            ValueError: if J < 1 or J > N/4
            RankDeficiencyError: if the normalized L2 Gram determinant of the
                candidates is below RANK_THRESHOLD
        """
        grid = instance.grid
        if J < 1 or J > grid.N // 4:
            raise ValueError(f"J must satisfy 1 <= J <= N/4 = {grid.N // 4}, got {J}")
        if scale is None:
            scale = self.basis_scale(instance, 2 * J)
        stack = self.candidates(instance, J, scale)
        size = stack.shape[0]

        l2_gram = self.energy.l2_gram(stack, grid)
        determinant = normalized_gram_determinant(l2_gram)
        if determinant < RANK_THRESHOLD:
            raise RankDeficiencyError(
                f"{size} basis candidates at scale {scale:.4g} span fewer dimensions "
                f"(normalized Gram determinant {determinant:.2e})"
            )

        gram = self.energy.xalpha_gram(stack, instance)
        # coefficients of the orthonormal functions in the candidate basis
        coeffs = np.zeros((size, size))
        for i in range(size):
            vector = np.zeros(size)
            vector[i] = 1.0
            for _ in range(2):
                for k in range(i):
                    projection = coeffs[k] @ gram @ vector
                    vector = vector - projection * coeffs[k]
            norm2 = vector @ gram @ vector
            if norm2 <= 0:
                raise RankDeficiencyError(f"basis candidate {i + 1} of {size} has zero X^a norm")
            coeffs[i] = vector / np.sqrt(norm2)

        coeffs = self._ritz_rotation(coeffs, l2_gram)
        functions = np.tensordot(coeffs, stack, axes=1)
        logger.debug("built %d basis functions for %s", size, instance.name)
        return BasisSet(
            functions=tuple(GridFunction(grid, f) for f in functions),
            size_parameter=J,
            scale=float(scale),
        )

    @staticmethod
    def _ritz_rotation(coeffs: np.ndarray, l2_gram: np.ndarray) -> np.ndarray:
        """Rotate X-orthonormal rows so the L2 Gram is diagonal, decreasing.

        Each row is signed so that its largest coefficient is positive.
        """
        reduced = coeffs @ l2_gram @ coeffs.T
        _, vectors = np.linalg.eigh(0.5 * (reduced + reduced.T))
        rotated = vectors[:, ::-1].T @ coeffs
        pivots = np.argmax(np.abs(rotated), axis=1)
        signs = np.sign(rotated[np.arange(len(rotated)), pivots])
        signs[signs == 0] = 1.0
        return rotated * signs[:, None]

    def orthonormality_defect(self, instance: ProblemInstance, basis: BasisSet) -> float:
        gram = self.energy.xalpha_gram(basis.stacked(), instance)
        return float(np.max(np.abs(gram - np.eye(len(basis)))))

    # beta_j -----------------------------------------------------------------

    def estimate_beta(self, instance: ProblemInstance, basis: BasisSet, j: int) -> float:
        """sup ||u||_L2 over the X^a unit sphere of span{e_j..e_J}.

        A truncated-tail estimate: the true Z_j is infinite dimensional.
        """
        if not 1 <= j <= len(basis):
            raise ValueError(f"j must satisfy 1 <= j <= {len(basis)}, got {j}")
        tail = basis.stacked()[j - 1:]
        gram = self.energy.l2_gram(tail, instance.grid)
        return float(np.sqrt(max(np.linalg.eigvalsh(gram)[-1], 0.0)))

    def beta_table(
        self,
        instance: ProblemInstance,
        J: int,
        j_max: Optional[int] = None,
        refine: bool = True,
    ) -> List[BetaEstimate]:
        """beta_1..beta_{j_max} for a basis of size J, with the J -> 2J check.

        Both bases share the scale of the 2J one, so their spans are nested.
        """
        refine = refine and 2 * J <= instance.grid.N // 4
        scale = self.basis_scale(instance, 2 * J)
        basis = self.build_basis(instance, J, scale=scale)
        j_max = len(basis) if j_max is None else min(j_max, len(basis))
        refined_basis = self.build_basis(instance, 2 * J, scale=scale) if refine else None
        table = []
        for j in range(1, j_max + 1):
            refined = (
                self.estimate_beta(instance, refined_basis, j) if refined_basis else None
            )
            table.append(
                BetaEstimate(
                    j=j,
                    beta=self.estimate_beta(instance, basis, j),
                    basis_size=len(basis),
                    refined=refined,
                )
            )
        return table

    def embedding_constant(self, instance: ProblemInstance, basis: BasisSet) -> float:
        """Measured C_2 = beta_1 on the basis span."""
        return self.estimate_beta(instance, basis, 1)
