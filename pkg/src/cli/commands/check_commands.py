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
def check(
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
    """Check the structural hypotheses of an instance.

    Runs the sampled checks (L_w1), (L_w2), (HS)1, (HS)2 and (HS)3
    selected by ``study.checks`` and writes the condition reports.

    Args:
        config: Experiment config file (key = value)
        out: Output directory
        seed: Seed override
        fmt: json, csv or both

    Raises:
        typer.Exit: code 0 if every check passed, 1 if one failed,
            2 on a config error

    Examples:
        fracham check --config configs/coercive_A.cfg
    """
    container = Container()
    experiment_config = experiment.load_experiment(container, config, seed)

    console.print_command_header("Hypothesis checks")
    experiment.print_config_summary(experiment_config)

    report = experiment.run_pipeline(
        "check", experiment_config, container.experiment_service().run_check
    )
    experiment.print_conditions(report)
    experiment.write_outputs(container, report, out, fmt)

    if not report.conditions_passed:
        failed = ", ".join(r.name for r in report.conditions if not r.passed)
        console.print_failure(f"Failed checks: {failed}")
        raise typer.Exit(code=c.EXIT_CERTIFICATE_FAILED)
    console.print_success("All requested checks passed")
