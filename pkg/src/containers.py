"""Dependency injection container for fracham.

This module defines the dependency injection container using the
dependency-injector library. It wires together the numerical services and
the repositories used by the CLI.
"""

from dependency_injector import containers, providers

from src.repositories.builtin_instance_repository import BuiltinInstanceRepository
from src.repositories.file_report_repository import FileReportRepository
from src.services.basis_service import BasisService
from src.services.condition_service import ConditionService
from src.services.energy_service import EnergyService
from src.services.experiment_service import ExperimentService
from src.services.fractional_service import FractionalService
from src.services.minimax_service import MinimaxService
from src.services.quadrature_oracle_service import QuadratureOracleService
from src.services.solver_service import SolverService
from src.services.spectral_service import SpectralService


class Container(containers.DeclarativeContainer):
    """Dependency injection container for fracham.

    Services hold no per-run state, so every provider is a Singleton;
    the per-run knobs travel in SolverOptions and ExperimentConfig.
    """

    # Repositories
    instance_repository = providers.Singleton(BuiltinInstanceRepository)

    report_repository = providers.Singleton(FileReportRepository)

    # Numerical core
    spectral_service = providers.Singleton(SpectralService)

    fractional_service = providers.Singleton(
        FractionalService,
        spectral=spectral_service,
    )

    quadrature_oracle_service = providers.Singleton(QuadratureOracleService)

    condition_service = providers.Singleton(ConditionService)

    energy_service = providers.Singleton(
        EnergyService,
        spectral=spectral_service,
        fractional=fractional_service,
    )

    basis_service = providers.Singleton(BasisService, energy=energy_service)

    solver_service = providers.Singleton(
        SolverService,
        spectral=spectral_service,
        energy=energy_service,
        basis=basis_service,
    )

    minimax_service = providers.Singleton(
        MinimaxService,
        energy=energy_service,
        basis=basis_service,
        conditions=condition_service,
    )

    # Pipelines
    experiment_service = providers.Singleton(
        ExperimentService,
        instances=instance_repository,
        spectral=spectral_service,
        conditions=condition_service,
        basis=basis_service,
        solver=solver_service,
        minimax=minimax_service,
    )
