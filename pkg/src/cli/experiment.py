"""Plumbing shared by the experiment commands.

Loading and validating a config, running a pipeline under the Sentry run
context, writing the outputs and printing the result tables.
"""

from pathlib import Path
from typing import Callable, Optional

import typer

from src.cli import console
from src.cli import constants as c
from src.cli.business_validator import ExperimentValidator
from src.config import ExperimentConfig, load_config
from src.containers import Container
from src.models.errors import ConfigError, FrachamError
from src.models.report import RunReport
from src.sentry_config import (
    add_breadcrumb,
    capture_exception,
    clear_run_context,
    set_run_context,
)


def load_experiment(container: Container, config_path: Path, seed: Optional[int]) -> ExperimentConfig:
    """Parse and validate a config; exit with code 2 on any config error.

    The seed flag overrides the config seed.
    """
    try:
        config = load_config(config_path).with_seed(seed)
        try:
            ExperimentValidator.validate(config)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        try:
            instance = container.experiment_service().resolve_instance(config)
            ExperimentValidator.validate_instance(
                instance.alpha.alpha, instance.potential.theta, instance.potential.sigma
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e
    except ConfigError as e:
        console.print_error(c.ERROR_CONFIG.format(e=e))
        raise typer.Exit(code=c.EXIT_CONFIG_ERROR)
    return config


def run_pipeline(
    command: str,
    config: ExperimentConfig,
    pipeline: Callable[[ExperimentConfig], RunReport],
) -> RunReport:
    """Run one pipeline; config errors exit with code 2, numerical errors with 1."""
    set_run_context(command, config.seed, config.instance.name)
    add_breadcrumb(f"{command} started", category="cli")
    try:
        return pipeline(config)
    except ConfigError as e:
        console.print_error(c.ERROR_CONFIG.format(e=e))
        raise typer.Exit(code=c.EXIT_CONFIG_ERROR)
    except FrachamError as e:
        capture_exception(e, context={"command": command})
        console.print_error(str(e))
        raise typer.Exit(code=c.EXIT_CERTIFICATE_FAILED)
    finally:
        clear_run_context()


def write_outputs(container: Container, report: RunReport, out: Path, fmt: str) -> None:
    paths = container.report_repository().export(report, out, fmt)
    console.print_field(c.LABEL_OUTPUT, f"{len(paths)} file(s) in {out}")


def print_config_summary(config: ExperimentConfig) -> None:
    console.print_field(c.LABEL_INSTANCE, config.instance.name)
    console.print_field(c.LABEL_GRID, f"T = {config.grid.T:g}, N = {config.grid.N}")
    console.print_field(c.LABEL_SEED, str(config.seed))
    console.print_separator()


def print_solutions(report: RunReport) -> None:
    console.print_table(
        "Solutions",
        ("#", c.LABEL_ENERGY, c.LABEL_RESIDUAL, c.LABEL_NORM, "tail", "iters", "accepted", "initializer"),
        (
            (
                str(s.index),
                c.FORMAT_VALUE.format(s.energy),
                c.FORMAT_SHORT.format(s.residual_norm),
                c.FORMAT_VALUE.format(s.xalpha_norm),
                c.FORMAT_SHORT.format(s.tail_mass),
                str(s.iterations),
                console.flag(s.accepted and s.nontrivial),
                s.initializer,
            )
            for s in report.solutions
        ),
    )


def print_levels(report: RunReport) -> None:
    console.print_table(
        "Minimax levels",
        ("j", "c_hat", "delta*", "lower bound", "c_hat < 0", "bound holds"),
        (
            (
                str(level.j),
                c.FORMAT_VALUE.format(level.c_hat),
                c.FORMAT_SHORT.format(level.optimal_radius),
                c.FORMAT_VALUE.format(level.lower_bound) if level.lower_bound is not None else "",
                console.flag(level.negative),
                console.flag(level.bound_holds),
            )
            for level in report.c_hat
        ),
    )


def print_betas(report: RunReport) -> None:
    console.print_table(
        "Embedding constants (truncated-tail estimates)",
        ("j", "beta_j", "J", "beta_j (2J)", "rel. change"),
        (
            (
                str(row.j),
                c.FORMAT_VALUE.format(row.beta),
                str(row.basis_size),
                c.FORMAT_VALUE.format(row.refined) if row.refined is not None else "",
                c.FORMAT_SHORT.format(row.relative_change) if row.relative_change is not None else "",
            )
            for row in report.beta
        ),
    )


def print_conditions(report: RunReport) -> None:
    console.print_table(
        "Hypotheses",
        ("check", "passed", "samples", "violations", "worst slack"),
        (
            (
                r.name,
                console.flag(r.passed),
                str(r.samples),
                str(r.violations),
                c.FORMAT_SHORT.format(r.worst_slack),
            )
            for r in report.conditions
        ),
    )
    for r in report.conditions:
        if not r.passed and r.message:
            console.print_failure(f"{r.name}: {r.message}")
