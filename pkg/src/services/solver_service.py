"""Critical-point search for the energy functional.

minimize: preconditioned steepest descent on the strong residual with a
Barzilai-Borwein trial step and Armijo backtracking on I, so the energy
trace is nonincreasing.

multi_solution: a descent from the first scaled basis direction gives the
ground state; deflated Newton-Krylov runs from every initializer
(scaled basis directions, random subspace combinations) then reach the
saddle points, each deflating 0 and every +-u already found. Candidates
are merged by a +-u aware distance in X^a and sorted deterministically.
"""

import logging
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import LinearOperator, minres

from src.models.grid import GridFunction
from src.models.problem import ProblemInstance
from src.models.results import (
    BasisSet,
    MultiplicityResult,
    Provenance,
    Solution,
    SolverOptions,
)
from src.sentry_config import add_breadcrumb, capture_message
from src.services.basis_service import BasisService
from src.services.energy_service import EnergyService
from src.services.spectral_service import SpectralService

logger = logging.getLogger(__name__)

MAX_HALVINGS = 60
MIN_BASIS = 8
INIT_RADIUS = 1.0
SIGN_TOLERANCE = 1e-8
NEWTON_ITERS = 40
KRYLOV_ITERS = 150
# central-difference step relative to max(1, ||u||_inf)
HESSIAN_STEP = 1e-6
DEFLATION_POWER = 2.0
DEFLATION_SHIFT = 1.0
MIN_DEFLATION_DENOMINATOR = 1e-12
RAY_BOUNDS = (1e-6, 1e2)


def worker_count() -> int:
    """Worker cap from FRACHAM_THREADS (or FRACHS_THREADS), else CPU count."""
    for key in ("FRACHAM_THREADS", "FRACHS_THREADS"):
        value = os.getenv(key)
        if value:
            return max(1, int(value))
    return os.cpu_count() or 1


def child_seed(seed: int, label: str) -> int:
    """Deterministic sub-seed for a labelled task."""
    sequence = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode())])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


class SolverService:
    """Descent to critical points and multiplicity search."""

    def __init__(
        self,
        spectral: SpectralService,
        energy: EnergyService,
        basis: BasisService,
    ) -> None:
        self.spectral = spectral
        self.energy = energy
        self.basis = basis

    # single descent -------------------------------------------------------

    def _direction(self, r: GridFunction, instance, options: SolverOptions) -> GridFunction:
        if options.precondition:
            return -self.energy.precondition(r, instance)
        return -r

    def minimize(
        self,
        instance: ProblemInstance,
        u0: GridFunction,
        options: Optional[SolverOptions] = None,
        initializer: str = "given",
    ) -> Solution:
        """Descend from u0 until ||residual||_L2 <= grad_tol or max_iters.

        A run that stops early is returned with converged=False, never
        silently accepted.
        """
        options = options or SolverOptions()
        instance.grid.check_same(u0.grid)
        ratio = options.backtracking
        c1 = options.sufficient_decrease

        u = u0
        value = self.energy.value(u, instance)
        r = self.energy.residual(u, instance)
        r_norm = self.spectral.l2_norm(r)
        trace = [value]
        step = 1.0
        previous: Optional[Tuple[GridFunction, GridFunction]] = None
        iterations = 0
        stalled = False

        while r_norm > options.grad_tol and iterations < options.max_iters:
            direction = self._direction(r, instance, options)
            slope = self.spectral.l2_inner(r, direction)
            if slope >= 0:
                direction, slope = -r, -r_norm**2
            if previous is not None:
                s = u - previous[0]
                y = r - previous[1]
                sy = self.spectral.l2_inner(s, y)
                py = self._direction(y, instance, options)
                ypy = -self.spectral.l2_inner(y, py)
                if sy > 0 and ypy > 0:
                    step = sy / ypy
                else:
                    step = min(2.0 * step, 1e6)
            accepted = False
            for _ in range(MAX_HALVINGS):
                candidate = u + step * direction
                candidate_value = self.energy.value(candidate, instance)
                if candidate_value <= value + c1 * step * slope:
                    accepted = True
                    break
                step *= ratio
            if not accepted:
                stalled = True
                logger.debug("line search stalled at iteration %d", iterations)
                break
            previous = (u, r)
            u = candidate
            value = candidate_value
            r = self.energy.residual(u, instance)
            r_norm = self.spectral.l2_norm(r)
            trace.append(value)
            iterations += 1
            if iterations % 500 == 0:
                logger.debug(
                    "iter %d: I=%.12e |r|=%.3e step=%.3e", iterations, value, r_norm, step
                )

        converged = r_norm <= options.grad_tol
        if not converged:
            capture_message(
                f"minimize did not converge ({'stalled' if stalled else 'max_iters'})",
                level="warning",
                context={
                    "instance": instance.name,
                    "initializer": initializer,
                    "residual": r_norm,
                    "iterations": iterations,
                },
            )
        return self.certify(
            instance,
            u,
            iterations=iterations,
            converged=converged,
            provenance=Provenance(initializer, options.seed),
            trace=tuple(trace),
            grad_tol=options.grad_tol,
        )

    def certify(
        self,
        instance: ProblemInstance,
        u: GridFunction,
        iterations: int,
        converged: bool,
        provenance: Provenance,
        trace: Tuple[float, ...] = (),
        grad_tol: float = 1e-6,
    ) -> Solution:
        """Recompute every certificate quantity from u alone."""
        residual_norm = self.energy.residual_norm(u, instance)
        return Solution(
            u=u,
            energy=self.energy.energy(u, instance),
            residual_norm=residual_norm,
            xalpha_norm=self.energy.xalpha_norm(u, instance),
            tail_mass=self.spectral.tail_mass(u),
            iterations=iterations,
            converged=converged and residual_norm <= grad_tol,
            provenance=provenance,
            energy_trace=trace,
            grad_tol=grad_tol,
        )

    # deflated Newton ----------------------------------------------------------

    def _newton_direction(
        self, instance: ProblemInstance, u: GridFunction, r: GridFunction
    ) -> GridFunction:
        """Inexact solution of I''(u) d = -r by preconditioned MINRES.

        I''(u) v is a central difference of the residual; the operator is
        symmetric and indefinite at saddle points.
        """
        shape = u.values.shape
        size = u.values.size
        reach = max(1.0, float(np.max(np.abs(u.values))))

        def hessian(x: np.ndarray) -> np.ndarray:
            v = np.reshape(x, shape)
            peak = float(np.max(np.abs(v)))
            if peak == 0.0:
                return np.zeros(size)
            h = HESSIAN_STEP * reach / peak
            plus = self.energy.residual(u.with_values(u.values + h * v), instance).values
            minus = self.energy.residual(u.with_values(u.values - h * v), instance).values
            return ((plus - minus) / (2.0 * h)).ravel()

        def precondition(x: np.ndarray) -> np.ndarray:
            preconditioned = self.energy.precondition(u.with_values(np.reshape(x, shape)), instance)
            return preconditioned.values.ravel()

        direction, info = minres(
            LinearOperator((size, size), matvec=hessian, dtype=float),
            -r.values.ravel(),
            M=LinearOperator((size, size), matvec=precondition, dtype=float),
            maxiter=KRYLOV_ITERS,
        )
        if info != 0:
            logger.debug("MINRES stopped with info=%d", info)
        return u.with_values(np.reshape(direction, shape))

    def _merit(self, r: GridFunction, instance: ProblemInstance) -> float:
        """1/2 <r, P r>, the residual measured in the dual X norm."""
        return 0.5 * self.spectral.l2_inner(r, self.energy.precondition(r, instance))

    def deflated_newton(
        self,
        instance: ProblemInstance,
        u0: GridFunction,
        known: Sequence[GridFunction] = (),
        options: Optional[SolverOptions] = None,
        initializer: str = "given",
    ) -> Solution:
        """Newton iteration on the residual, deflated at 0 and at +-known.

        The step is backtracked on M(u)^2 <r, P r> / 2, M the deflation
        factor, so iterates are pushed away from solutions already found.
        Convergence is judged on the undeflated residual.
        """
        options = options or SolverOptions()
        instance.grid.check_same(u0.grid)
        deflation = DeflationOperator(self.energy, instance, known)

        u = u0
        r = self.energy.residual(u, instance)
        r_norm = self.spectral.l2_norm(r)
        merit = deflation.factor(u) ** 2 * self._merit(r, instance)
        trace = [self.energy.value(u, instance)]
        iterations = 0
        while r_norm > options.grad_tol and iterations < NEWTON_ITERS:
            step = deflation.step(u, self._newton_direction(instance, u, r))
            length = 1.0
            accepted = False
            for _ in range(MAX_HALVINGS):
                candidate = u + length * step
                candidate_r = self.energy.residual(candidate, instance)
                candidate_merit = deflation.factor(candidate) ** 2 * self._merit(
                    candidate_r, instance
                )
                if candidate_merit <= (1.0 - options.sufficient_decrease * length) * merit:
                    accepted = True
                    break
                length *= options.backtracking
            if not accepted:
                logger.debug("%s: Newton line search stalled at iteration %d", initializer, iterations)
                break
            u, r, merit = candidate, candidate_r, candidate_merit
            r_norm = self.spectral.l2_norm(r)
            trace.append(self.energy.value(u, instance))
            iterations += 1

        logger.debug(
            "%s: deflated Newton stopped after %d iterations, |r|=%.3e (%d known)",
            initializer,
            iterations,
            r_norm,
            len(known),
        )
        return self.certify(
            instance,
            u,
            iterations=iterations,
            converged=r_norm <= options.grad_tol,
            provenance=Provenance(initializer, options.seed, ("deflated_newton",)),
            trace=tuple(trace),
            grad_tol=options.grad_tol,
        )

    # multiplicity -----------------------------------------------------------

    def ray_minimizer(self, instance: ProblemInstance, direction: GridFunction) -> float:
        """argmin over s > 0 of I(s * direction), bounded to RAY_BOUNDS."""
        result = minimize_scalar(
            lambda s: self.energy.value(s * direction, instance),
            bounds=RAY_BOUNDS,
            method="bounded",
            options={"xatol": 1e-8},
        )
        return float(result.x)

    def initializers(
        self,
        instance: ProblemInstance,
        basis: BasisSet,
        k: int,
        seed: int,
        negate: bool = False,
    ) -> List[Tuple[str, GridFunction]]:
        """delta_j e_j, then random subspace combinations, each scaled to its ray minimum."""
        sign = -1.0 if negate else 1.0
        directions = [(f"basis_{j + 1}", basis[j]) for j in range(len(basis))]
        for i in range(k + 2):
            label = f"random_{i + 1}"
            rng = np.random.default_rng(child_seed(seed, label))
            coefficients = rng.standard_normal(len(basis))
            coefficients /= self.energy.xalpha_norm(basis.combine(coefficients), instance)
            directions.append((label, basis.combine(coefficients)))
        return [
            (label, (sign * self.ray_minimizer(instance, direction)) * direction)
            for label, direction in directions
        ]

    def pm_distance(self, u: GridFunction, v: GridFunction, instance) -> float:
        """min(||u - v||_X, ||u + v||_X)."""
        return min(
            self.energy.xalpha_norm(u - v, instance),
            self.energy.xalpha_norm(u + v, instance),
        )

    def canonical_sign(self, solution: Solution, basis: BasisSet, instance) -> Solution:
        """Flip so the first non-negligible basis coefficient is positive."""
        for e in basis.functions:
            c = self.energy.xalpha_inner(solution.u, e, instance)
            if abs(c) > SIGN_TOLERANCE:
                return solution if c > 0 else solution.negated()
        return solution

    @staticmethod
    def sort_key(solution: Solution) -> Tuple[float, float]:
        return (solution.energy.total, solution.xalpha_norm)

    def merge(
        self,
        candidates: Sequence[Solution],
        instance: ProblemInstance,
        basis: BasisSet,
        k: int,
        separation: float,
    ) -> List[Solution]:
        accepted = [
            self.canonical_sign(s, basis, instance)
            for s in candidates
            if s.accepted and s.nontrivial
        ]
        accepted.sort(key=self.sort_key)
        distinct: List[Solution] = []
        for solution in accepted:
            if all(self.pm_distance(solution.u, kept.u, instance) > separation for kept in distinct):
                distinct.append(solution)
            if len(distinct) == k:
                break
        return distinct

    def multi_solution(
        self,
        instance: ProblemInstance,
        k: int,
        options: Optional[SolverOptions] = None,
        basis: Optional[BasisSet] = None,
        negate: bool = False,
    ) -> MultiplicityResult:
        """Up to k distinct nontrivial converged solutions, sorted by energy.

        A descent from delta_1 e_1 gives the ground state. Then rounds of
        deflated Newton runs, one per pending initializer and concurrent
        within a round, deflate every solution found so far. Rounds stop
        at k solutions or when a round finds nothing new.
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        options = options or SolverOptions()
        basis = basis or self.basis.build_basis(instance, max(MIN_BASIS, 2 * k))
        starts = self.initializers(instance, basis, k, options.seed, negate=negate)
        add_breadcrumb(
            f"multi_solution on {instance.name}",
            data={"k": k, "starts": len(starts), "seed": options.seed},
        )

        label, u0 = starts[0]
        ground = self.minimize(instance, u0, options, initializer=label)
        candidates = [ground]
        found: List[GridFunction] = [ground.u] if ground.accepted and ground.nontrivial else []

        def is_new(solution: Solution) -> bool:
            return (
                solution.accepted
                and solution.nontrivial
                and all(
                    self.pm_distance(solution.u, u, instance) > options.deflation_radius
                    for u in found
                )
            )

        pending = list(starts)
        rounds = 0
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            while len(found) < k and pending:
                rounds += 1
                known = tuple(found)
                results = list(
                    pool.map(
                        lambda start: self.deflated_newton(
                            instance, start[1], known, options, initializer=start[0]
                        ),
                        pending,
                    )
                )
                candidates.extend(results)
                retry = []
                for start, solution in zip(pending, results):
                    if is_new(solution):
                        found.append(solution.u)
                    elif solution.accepted and solution.nontrivial:
                        retry.append(start)
                logger.debug("round %d: %d known solutions", rounds, len(found))
                if len(found) == len(known):
                    break
                pending = retry

        solutions = self.merge(candidates, instance, basis, k, options.deflation_radius)
        for index, solution in enumerate(solutions):
            logger.info(
                "solution %d: I=%.10e |r|=%.2e ||u||_X=%.6f (%s)",
                index + 1,
                solution.energy.total,
                solution.residual_norm,
                solution.xalpha_norm,
                solution.provenance.initializer,
            )
        if len(solutions) < k:
            capture_message(
                f"multi_solution found {len(solutions)} of {k} solutions",
                level="warning",
                context={"instance": instance.name, "candidates": len(candidates)},
            )
        return MultiplicityResult(
            solutions=tuple(solutions),
            requested=k,
            candidates=len(candidates),
            details={"converged": sum(c.converged for c in candidates), "rounds": rounds},
        )


class DeflationOperator:
    """M(u) = prod over roots r of (||u - r||_X^-p + shift).

    The roots are 0 and +-u_i for every known solution u_i. Solutions of
    M(u) r(u) = 0 away from the roots are the solutions of r(u) = 0.
    """

    def __init__(
        self,
        energy: EnergyService,
        instance: ProblemInstance,
        known: Sequence[GridFunction] = (),
        power: float = DEFLATION_POWER,
        shift: float = DEFLATION_SHIFT,
    ) -> None:
        self.energy = energy
        self.instance = instance
        self.known = tuple(known)
        self.power = power
        self.shift = shift

    def _offsets(self, u: GridFunction) -> List[Tuple[GridFunction, ...]]:
        # +- pairs stay together so that u -> -u maps the terms onto themselves
        return [(u,)] + [(u - root, u + root) for root in self.known]

    def _norm2(self, offset: GridFunction) -> float:
        return max(self.energy.xalpha_inner(offset, offset, self.instance), np.finfo(float).tiny)

    def factor(self, u: GridFunction) -> float:
        value = 1.0
        for group in self._offsets(u):
            terms = [self._norm2(offset) ** (-self.power / 2.0) + self.shift for offset in group]
            value *= float(np.prod(terms))
        return value

    def log_derivative(self, u: GridFunction, d: GridFunction) -> float:
        """M'(u) d / M(u)."""
        total = 0.0
        for group in self._offsets(u):
            part = 0.0
            for offset in group:
                norm2 = self._norm2(offset)
                inverse = norm2 ** (-self.power / 2.0)
                slope = -self.power * inverse / norm2 * self.energy.xalpha_inner(
                    offset, d, self.instance
                )
                part += slope / (inverse + self.shift)
            total += part
        return total

    def step(self, u: GridFunction, d: GridFunction) -> GridFunction:
        """Newton step of M r from the undeflated step d: d / (1 - M'(u) d / M(u))."""
        tau = 1.0 - self.log_derivative(u, d)
        if abs(tau) < MIN_DEFLATION_DENOMINATOR:
            return d
        return d * (1.0 / tau)
