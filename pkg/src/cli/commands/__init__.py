"""CLI commands for fracham."""

import typer

from .check_commands import app as check_app
from .export_commands import app as export_app
from .solve_commands import app as solve_app
from .study_commands import app as study_app

# Main app that aggregates all command modules
app = typer.Typer(no_args_is_help=True)

# Mount sub-applications
# No 'name' parameter = commands are added directly to root level
# This allows: fracham check, fracham solve, ...
app.add_typer(check_app)
app.add_typer(solve_app)
app.add_typer(study_app)
app.add_typer(export_app)
