from pathlib import Path
from typing import Optional

import typer

from src.cli import console
from src.cli import constants as c
from src.cli import experiment
from src.cli import validators
from src.containers import Container

app = typer.Typer()


@app.command()
def solve(
    config: Path = typer.Option(
        ..., "--config", callback=validators.validate_config_path_callback
    ),
    out: Path = typer.Option(Path(c.DEFAULT_OUT_DIR), "--out"),
    seed: Optional[int] = typer.Option(
        None, "--seed", callback=validators.validate_seed_callback
    ),
    fmt: str = typer.Option(
        c.DEFAULT_FORMAT, "--format", callback=validators.validate_format_callback
    ),
):
    """Descend to one critical point of the energy.

    Starts from ``study.initializer`` (basis_<j> or random) and writes
    the certified solution with its full profile.

    Raises:
        typer.Exit: 0 converged and nontrivial, 1 not converged,
            2 config error, 3 converged to the trivial solution

    Examples:
        fracham solve --config configs/coercive_A.cfg --format both
    """
    container = Container()
    experiment_config = experiment.load_experiment(container, config, seed)

    console.print_command_header("Single solve")
    experiment.print_config_summary(experiment_config)

    report = experiment.run_pipeline(
        "solve", experiment_config, container.experiment_service().run_solve
    )
    experiment.print_solutions(report)
    experiment.write_outputs(container, report, out, fmt)

    solution = report.solutions[0]
    if not solution.converged:
        console.print_failure(
            f"Not converged: residual {solution.residual_norm:.3e} after "
            f"{solution.iterations} iterations"
        )
        raise typer.Exit(code=c.EXIT_CERTIFICATE_FAILED)
    if not solution.nontrivial:
        console.print_warning("Converged to the trivial solution u = 0")
        raise typer.Exit(code=c.EXIT_TRIVIAL)
    if not solution.accepted:
        console.print_failure(f"Tail mass {solution.tail_mass:.3e} too large: enlarge grid.T")
        raise typer.Exit(code=c.EXIT_CERTIFICATE_FAILED)
    console.print_success(f"Nontrivial solution with I(u) = {solution.energy:.6e}")


@app.command()
def multiplicity(
    config: Path = typer.Option(
        ..., "--config", callback=validators.validate_config_path_callback
    ),
    out: Path = typer.Option(Path(c.DEFAULT_OUT_DIR), "--out"),
    seed: Optional[int] = typer.Option(
        None, "--seed", callback=validators.validate_seed_callback
    ),
    fmt: str = typer.Option(
        c.DEFAULT_FORMAT, "--format", callback=validators.validate_format_callback
    ),
):
    """Search for k distinct solutions and estimate the minimax levels.

    Reports the solutions table, c_hat_j and beta_j for j = 1..j_max, and
    the lower-bound column -(beta_j^theta / theta) ||b|| tau^theta <= c_hat_j.

    Raises:
        typer.Exit: 0 if k solutions were certified, every c_hat_j is
            negative and every lower bound holds; 1 otherwise; 2 on a
            config error

    Examples:
        fracham multiplicity --config configs/coercive_A.cfg --out out/A
    """
    container = Container()
    experiment_config = experiment.load_experiment(container, config, seed)

    console.print_command_header("Multiplicity study")
    experiment.print_config_summary(experiment_config)

    report = experiment.run_pipeline(
        "multiplicity", experiment_config, container.experiment_service().run_multiplicity
    )
    experiment.print_solutions(report)
    experiment.print_levels(report)
    experiment.print_betas(report)
    experiment.write_outputs(container, report, out, fmt)

    k = experiment_config.study.k
    failures = []
    if len(report.solutions) < k:
        failures.append(f"found {len(report.solutions)} of {k} distinct solutions")
    if not all(s.accepted and s.nontrivial for s in report.solutions):
        failures.append("a reported solution is not certified")
    if not all(level.negative for level in report.c_hat):
        failures.append("some c_hat_j is not negative")
    if not all(level.bound_holds is not False for level in report.c_hat):
        failures.append("some c_hat_j is below its lower bound")
    if failures:
        for failure in failures:
            console.print_failure(failure)
        raise typer.Exit(code=c.EXIT_CERTIFICATE_FAILED)
    console.print_success(
        f"{k} distinct solutions and {len(report.c_hat)} negative levels certified"
    )
