"""Command pipelines: one RunReport per CLI subcommand.

Each run_* method resolves the instance of an ExperimentConfig, calls the
numerical services, and assembles the report single-threaded so that the
same config and seed give the same report (timings aside).
"""

import logging
import time
from contextlib import contextmanager
from typing import Dict, Iterator, List

import numpy as np

from src.config import ExperimentConfig
from src.models.errors import ConfigError
from src.models.grid import GridFunction
from src.models.problem import ProblemInstance
from src.models.report import (
    BetaRecord,
    MinimaxRecord,
    RunReport,
    SolutionRecord,
)
from src.models.results import BasisSet, Solution
from src.repositories.builtin_instance_repository import with_zero_potential
from src.repositories.instance_repository import InstanceRepository
from src.sentry_config import add_breadcrumb
from src.services.basis_service import BETA_TOLERANCE, BasisService
from src.services.condition_service import ConditionService
from src.services.minimax_service import MinimaxService
from src.services.solver_service import INIT_RADIUS, SolverService, child_seed
from src.services.spectral_service import SpectralService

logger = logging.getLogger(__name__)


@contextmanager
def timed(timings: Dict[str, float], label: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[label] = time.perf_counter() - start


class ExperimentService:
    """Runs check / solve / multiplicity / beta studies from a config."""

    def __init__(
        self,
        instances: InstanceRepository,
        spectral: SpectralService,
        conditions: ConditionService,
        basis: BasisService,
        solver: SolverService,
        minimax: MinimaxService,
    ) -> None:
        self.instances = instances
        self.spectral = spectral
        self.conditions = conditions
        self.basis = basis
        self.solver = solver
        self.minimax = minimax

    # instance ---------------------------------------------------------------

    def resolve_instance(self, config: ExperimentConfig) -> ProblemInstance:
        """Builtin instance by name, or an inline one built from tags.

        A builtin name with ``potential = zero`` and no other tag gives the
        W = 0 variant of that builtin.
        """
        grid = self.spectral.make_grid(config.grid.T, config.grid.N)
        instance_config = config.instance
        if instance_config.inline or instance_config.potential not in (None, "zero"):
            return self.instances.build(instance_config.definition(), grid)
        instance = self.instances.get(instance_config.name, grid, epsilon=instance_config.epsilon)
        if instance_config.potential == "zero":
            instance = with_zero_potential(instance)
        return instance

    def _report(self, config: ExperimentConfig, timings: Dict[str, float], **sections) -> RunReport:
        return RunReport(
            config=config.model_dump(mode="json"),
            timings=timings,
            seed=config.seed,
            **sections,
        )

    # check ------------------------------------------------------------------

    def run_check(self, config: ExperimentConfig) -> RunReport:
        timings: Dict[str, float] = {}
        instance = self.resolve_instance(config)
        study = config.study
        with timed(timings, "check"):
            reports = self.conditions.check_instance(
                instance,
                r0=study.r0,
                M=study.M,
                window_centers=study.centers,
                t_samples=study.t_samples,
            )
        selected = [report for report in reports if report.name in study.checks]
        return self._report(config, timings, conditions=selected)

    # solve ------------------------------------------------------------------

    def initial_guess(
        self, instance: ProblemInstance, basis: BasisSet, label: str, seed: int
    ) -> GridFunction:
        """u0 for a label ``basis_<j>`` or ``random``."""
        if label == "random":
            rng = np.random.default_rng(child_seed(seed, "solve"))
            coefficients = rng.standard_normal(len(basis))
            return basis.combine(INIT_RADIUS * coefficients / np.linalg.norm(coefficients))
        if label.startswith("basis_"):
            try:
                j = int(label.split("_", 1)[1])
            except ValueError:
                j = 0
            if 1 <= j <= len(basis):
                return INIT_RADIUS * basis[j - 1]
        raise ConfigError(
            f"study.initializer must be 'random' or 'basis_<j>' with 1 <= j <= {len(basis)}, "
            f"got '{label}'"
        )

    def run_solve(self, config: ExperimentConfig) -> RunReport:
        timings: Dict[str, float] = {}
        instance = self.resolve_instance(config)
        options = config.solver_options(epsilon=instance.potential.epsilon)
        with timed(timings, "basis"):
            basis = self.basis.build_basis(instance, config.study.J)
        u0 = self.initial_guess(instance, basis, config.study.initializer, config.seed)
        add_breadcrumb("solve started", data={"initializer": config.study.initializer})
        with timed(timings, "solve"):
            solution = self.solver.minimize(
                instance, u0, options, initializer=config.study.initializer
            )
        return self._report(
            config, timings, solutions=[SolutionRecord.from_solution(1, solution)]
        )

    # multiplicity -----------------------------------------------------------

    def run_multiplicity(self, config: ExperimentConfig) -> RunReport:
        timings: Dict[str, float] = {}
        instance = self.resolve_instance(config)
        study = config.study
        options = config.solver_options(epsilon=instance.potential.epsilon)
        with timed(timings, "basis"):
            basis = self.basis.build_basis(instance, study.J)
        with timed(timings, "multi_solution"):
            result = self.solver.multi_solution(instance, study.k, options, basis=basis)
        with timed(timings, "beta"):
            betas = self.basis.beta_table(instance, study.J, j_max=study.j_max)
        with timed(timings, "c_hat"):
            b_norm = self.conditions.b_norm(instance.potential, instance.grid)
            radius = self.minimax.coercivity_radius(
                instance, basis, b_norm=b_norm, seed=config.seed
            )
            levels = [
                self.minimax.estimate_cj(
                    instance,
                    basis,
                    row.j,
                    options,
                    tau=radius.tau,
                    beta_j=row.beta,
                    b_norm=b_norm,
                )
                for row in betas
            ]
        if not radius.verified:
            logger.warning(
                "coercivity radius %.6g failed its sampling check (min I = %.3e)",
                radius.tau,
                radius.min_sampled_energy,
            )
        return self._report(
            config,
            timings,
            solutions=self._records(result.solutions),
            c_hat=[
                MinimaxRecord.from_estimate(level, beta_j=row.beta, tau=radius.tau, b_norm=b_norm)
                for level, row in zip(levels, betas)
            ],
            beta=[BetaRecord.from_estimate(row) for row in betas],
        )

    @staticmethod
    def _records(solutions: List[Solution]) -> List[SolutionRecord]:
        return [SolutionRecord.from_solution(i + 1, s) for i, s in enumerate(solutions)]

    # beta -------------------------------------------------------------------

    def run_beta(self, config: ExperimentConfig) -> RunReport:
        timings: Dict[str, float] = {}
        instance = self.resolve_instance(config)
        with timed(timings, "beta"):
            betas = self.basis.beta_table(instance, config.study.J)
        return self._report(config, timings, beta=[BetaRecord.from_estimate(b) for b in betas])

    # certificates -------------------------------------------------------------

    @staticmethod
    def beta_certified(report: RunReport, j_max: int) -> bool:
        """beta_j nonincreasing, and stable under J -> 2J for j <= j_max."""
        values = [row.beta for row in report.beta]
        monotone = all(b <= a * (1 + 1e-12) for a, b in zip(values, values[1:]))
        stable = all(
            row.relative_change is None or row.relative_change <= BETA_TOLERANCE
            for row in report.beta
            if row.j <= j_max
        )
        return monotone and stable
