from pathlib import Path
from typing import Optional

import typer

from src.cli import console
from src.cli import constants as c
from src.cli import experiment
from src.cli import validators
from src.containers import Container
from src.services.experiment_service import ExperimentService

app = typer.Typer()


@app.command()
def beta(
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
    """Tabulate the embedding constants beta_j of a Hermite basis of size J.

    Each beta_j is re-estimated with a basis of size 2J when the grid
    allows it; the relative change is reported next to it.

    Raises:
        typer.Exit: 0 if beta_j is nonincreasing and stable under J -> 2J
            for j <= j_max, 1 otherwise, 2 on a config error

    Examples:
        fracham beta --config configs/coercive_A.cfg --format csv
    """
    container = Container()
    experiment_config = experiment.load_experiment(container, config, seed)

    console.print_command_header("Embedding constants")
    experiment.print_config_summary(experiment_config)

    report = experiment.run_pipeline(
        "beta", experiment_config, container.experiment_service().run_beta
    )
    experiment.print_betas(report)
    experiment.write_outputs(container, report, out, fmt)

    if not ExperimentService.beta_certified(report, experiment_config.study.j_max):
        console.print_failure("beta_j is not monotone or not converged under J -> 2J")
        raise typer.Exit(code=c.EXIT_CERTIFICATE_FAILED)
    console.print_success("beta_j nonincreasing and stable under J -> 2J")
