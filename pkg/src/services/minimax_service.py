"""Negative minimax levels and the coercivity radius.

On the radius-delta sphere of span{e_1..e_j} (X^a-orthonormal basis)
||u||_X = delta, so

    I(delta sum lambda_i e_i) = 1/2 delta^2 - int W(t, delta sum lambda_i e_i)

and maximizing I over the sphere only involves the potential term.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.models.problem import ProblemInstance
from src.models.results import (
    BasisSet,
    CoercivityRadius,
    MinimaxEstimate,
    SolverOptions,
    SpherePoint,
)
from src.sentry_config import add_breadcrumb, capture_message
from src.services.basis_service import BasisService
from src.services.condition_service import ConditionService
from src.services.energy_service import EnergyService
from src.services.solver_service import child_seed

logger = logging.getLogger(__name__)

RADIUS_RANGE = (-3.0, 1.0)
EXTENSION_DECADES = 3.0
REFINE_ROUNDS = 3
COERCIVITY_SAMPLES = 100
INITIAL_ANGLE = 0.5
MIN_ANGLE = 1e-10


class MinimaxService:
    """Upper estimates c_hat_j and the radius tau beyond which I > 0."""

    def __init__(
        self,
        energy: EnergyService,
        basis: BasisService,
        conditions: ConditionService,
    ) -> None:
        self.energy = energy
        self.basis = basis
        self.conditions = conditions

    @staticmethod
    def radius_from_constants(theta: float, c2: float, b_norm: float) -> float:
        """Positive root of 1/2 s^2 = (C2^theta / theta) ||b|| s^theta."""
        if b_norm <= 0.0:
            return 0.0
        return float((2.0 * c2**theta * b_norm / theta) ** (1.0 / (2.0 - theta)))

    def coercivity_radius(
        self,
        instance: ProblemInstance,
        basis: BasisSet,
        b_norm: Optional[float] = None,
        samples: int = COERCIVITY_SAMPLES,
        seed: int = 0,
    ) -> CoercivityRadius:
        """tau with C2 measured as beta_1, checked by sampling I at ||u||_X = 2 tau."""
        if b_norm is None:
            b_norm = self.conditions.b_norm(instance.potential, instance.grid)
        c2 = self.basis.embedding_constant(instance, basis)
        tau = self.radius_from_constants(instance.potential.theta, c2, b_norm)
        if tau == 0.0:
            return CoercivityRadius(tau=0.0, c2=c2, b_norm=b_norm, samples=0, min_sampled_energy=0.0)

        rng = np.random.default_rng(child_seed(seed, "coercivity"))
        lowest = np.inf
        for _ in range(samples):
            coefficients = rng.standard_normal(len(basis))
            coefficients *= 2.0 * tau / np.linalg.norm(coefficients)
            lowest = min(lowest, self.energy.value(basis.combine(coefficients), instance))
        logger.debug("tau=%.6g (C2=%.6g, |b|=%.6g), min sampled I=%.6g", tau, c2, b_norm, lowest)
        return CoercivityRadius(
            tau=tau, c2=c2, b_norm=b_norm, samples=samples, min_sampled_energy=float(lowest)
        )

    # sphere maximization ------------------------------------------------

    def _potential_integrals(
        self, instance: ProblemInstance, stack: np.ndarray, directions: np.ndarray, radius: float
    ) -> Tuple[np.ndarray, np.ndarray]:
        """int W and its lambda-gradient for a (S, j) batch of unit directions."""
        grid = instance.grid
        starts = directions.shape[0]
        us = radius * np.tensordot(directions, stack, axes=1)  # (S, N, n)
        flat = us.reshape(-1, us.shape[-1])
        ts = np.tile(grid.nodes, starts)
        W = instance.potential.W(ts, flat).reshape(starts, grid.N)
        grad = instance.potential.grad(ts, flat).reshape(us.shape)
        integrals = grid.h * W.sum(axis=1)
        gradients = radius * grid.h * np.einsum("snc,jnc->sj", grad, stack)
        return integrals, gradients

    def sphere_maximum(
        self,
        instance: ProblemInstance,
        stack: np.ndarray,
        radius: float,
        directions: np.ndarray,
        iterations: int,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Projected ascent of I over unit lambda, one adaptive angle per start.

        Returns the final energies (S,) and directions (S, j); each start's
        energy never decreases.
        """
        base = 0.5 * radius**2
        current, gradients = self._potential_integrals(instance, stack, directions, radius)
        angles = np.full(directions.shape[0], INITIAL_ANGLE)
        for _ in range(iterations):
            # ascent on I is descent on int W
            tangent = -(gradients - np.sum(gradients * directions, axis=1, keepdims=True) * directions)
            norms = np.linalg.norm(tangent, axis=1)
            active = (norms > 0) & (angles > MIN_ANGLE)
            if not np.any(active):
                break
            unit = np.zeros_like(tangent)
            unit[active] = tangent[active] / norms[active, None]
            trial = np.cos(angles)[:, None] * directions + np.sin(angles)[:, None] * unit
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            trial_values, trial_gradients = self._potential_integrals(instance, stack, trial, radius)
            better = active & (trial_values < current)
            directions = np.where(better[:, None], trial, directions)
            current = np.where(better, trial_values, current)
            gradients = np.where(better[:, None], trial_gradients, gradients)
            angles = np.where(better, np.minimum(1.5 * angles, np.pi / 2), 0.5 * angles)
        return base - current, directions

    def starting_directions(self, j: int, count: int, seed: int) -> np.ndarray:
        """Coordinate directions e_1..e_j first, then seeded random unit vectors."""
        coordinates = np.eye(j)
        extra = max(count - j, 0)
        rng = np.random.default_rng(child_seed(seed, f"sphere_{j}"))
        random = rng.standard_normal((extra, j))
        random /= np.linalg.norm(random, axis=1, keepdims=True)
        return np.vstack([coordinates, random])

    @staticmethod
    def _grid_ratio(points: int) -> float:
        """Ratio of neighbouring radii on the base log grid."""
        if points < 2:
            return 10.0
        return float(10.0 ** ((RADIUS_RANGE[1] - RADIUS_RANGE[0]) / (points - 1)))

    def lower_bound(self, theta: float, beta_j: float, b_norm: float, tau: float) -> float:
        """-(beta_j^theta / theta) ||b|| tau^theta."""
        return -(beta_j**theta / theta) * b_norm * tau**theta

    def estimate_cj(
        self,
        instance: ProblemInstance,
        basis: BasisSet,
        j: int,
        options: Optional[SolverOptions] = None,
        tau: Optional[float] = None,
        beta_j: Optional[float] = None,
        b_norm: Optional[float] = None,
    ) -> MinimaxEstimate:
        """min over delta of the estimated sphere maximum of I in span{e_1..e_j}.

        delta runs over a log grid on [1e-3, 1e1]. While the smallest delta
        holds a negative minimum the grid is extended downwards, at most
        EXTENSION_DECADES decades, then the best delta is refined by
        bisecting the log spacing REFINE_ROUNDS times.

        Raises:
            ValueError: if j is outside 1..len(basis)
        """
        if not 1 <= j <= len(basis):
            raise ValueError(f"j must satisfy 1 <= j <= {len(basis)}, got {j}")
        options = options or SolverOptions()
        theta = instance.potential.theta
        if b_norm is None:
            b_norm = self.conditions.b_norm(instance.potential, instance.grid)
        if beta_j is None:
            beta_j = self.basis.estimate_beta(instance, basis, j)
        if tau is None:
            c2 = self.basis.embedding_constant(instance, basis)
            tau = self.radius_from_constants(theta, c2, b_norm)

        stack = basis.stacked()[:j]
        starts = self.starting_directions(j, options.sphere_starts, options.seed)
        scanned: Dict[float, Tuple[float, np.ndarray]] = {}

        def scan(radius: float) -> None:
            values, directions = self.sphere_maximum(
                instance, stack, radius, starts, options.sphere_iters
            )
            top = int(np.argmax(values))
            scanned[radius] = (float(values[top]), directions[top])

        def best_radius() -> float:
            return min(scanned, key=lambda r: scanned[r][0])

        for radius in np.logspace(*RADIUS_RANGE, options.radius_points):
            scan(float(radius))
        ratio = self._grid_ratio(options.radius_points)

        # a negative minimum on the floor means the well is below the grid
        floor = 10.0 ** (RADIUS_RANGE[0] - EXTENSION_DECADES)
        while (
            best_radius() == min(scanned)
            and scanned[best_radius()][0] < 0.0
            and min(scanned) / ratio >= floor
        ):
            scan(min(scanned) / ratio)

        for _ in range(REFINE_ROUNDS):
            ratio = np.sqrt(ratio)
            center = best_radius()
            for radius in (center / ratio, center * ratio):
                if min(scanned) < radius < max(scanned):
                    scan(float(radius))

        radius = best_radius()
        direction = scanned[radius][1]
        profile = [(r, scanned[r][0]) for r in sorted(scanned)]
        u = basis.combine(radius * direction)
        certified = self.energy.value(u, instance)
        estimate = MinimaxEstimate(
            j=j,
            c_hat=float(certified),
            optimal_radius=radius,
            restarts=int(starts.shape[0]),
            certificate=(SpherePoint(radius, tuple(float(x) for x in direction), float(certified)),),
            radius_profile=tuple(profile),
            lower_bound=self.lower_bound(theta, beta_j, b_norm, tau),
        )
        add_breadcrumb(
            f"c_hat_{j} estimated",
            category="minimax",
            data={"c_hat": estimate.c_hat, "radius": radius, "instance": instance.name},
        )
        logger.info(
            "c_hat_%d = %.6e at delta=%.4g (lower bound %.6e)",
            j,
            estimate.c_hat,
            radius,
            estimate.lower_bound,
        )
        if estimate.bound_holds is False:
            capture_message(
                f"c_hat_{j} below its lower bound on {instance.name}",
                level="warning",
                context={"c_hat": estimate.c_hat, "lower_bound": estimate.lower_bound},
            )
        return estimate

    def estimate_levels(
        self,
        instance: ProblemInstance,
        basis: BasisSet,
        j_max: int,
        options: Optional[SolverOptions] = None,
    ) -> List[MinimaxEstimate]:
        """c_hat_1..c_hat_{j_max} sharing one b-norm and one tau."""
        b_norm = self.conditions.b_norm(instance.potential, instance.grid)
        radius = self.coercivity_radius(
            instance, basis, b_norm=b_norm, seed=(options or SolverOptions()).seed
        )
        return [
            self.estimate_cj(
                instance,
                basis,
                j,
                options,
                tau=radius.tau,
                beta_j=self.basis.estimate_beta(instance, basis, j),
                b_norm=b_norm,
            )
            for j in range(1, j_max + 1)
        ]
