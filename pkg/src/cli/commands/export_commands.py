from pathlib import Path

import typer

from src.cli import console
from src.cli import constants as c
from src.cli import validators
from src.containers import Container
from src.models.errors import ExportFormatError

app = typer.Typer()


@app.command()
def export(
    report: Path = typer.Option(
        ..., "--report", callback=validators.validate_report_path_callback
    ),
    out: Path = typer.Option(Path(c.DEFAULT_OUT_DIR), "--out"),
    fmt: str = typer.Option("both", "--format"),
):
    """Re-export a saved report.json as JSON and/or CSV tables.

    The solution profiles are always written as solution_<i>.dat.

    Args:
        report: report.json, or a directory containing it
        out: Output directory
        fmt: json, csv or both

    Raises:
        typer.Exit: 2 if the format is unknown

    Examples:
        fracham export --report out/A --out out/A-csv --format csv
    """
    container = Container()
    repository = container.report_repository()

    console.print_command_header("Export")
    loaded = repository.load_json(report)
    try:
        paths = repository.export(loaded, out, fmt.strip().lower())
    except ExportFormatError as e:
        console.print_error(str(e))
        raise typer.Exit(code=c.EXIT_CONFIG_ERROR)
    for path in paths:
        console.print_field(c.LABEL_OUTPUT, str(path))
    console.print_success(f"Exported {len(paths)} file(s)")
