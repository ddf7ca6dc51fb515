"""Rich console output for the fracham commands.

Formatting only: commands decide what to print, the report repository
decides what to write to disk.
"""

from typing import Iterable, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

console = Console()


def _tagged(style: str, tag: str, message: str) -> None:
    console.print(f"[{style}][{tag}][/{style}] {message}")


def print_success(message: str) -> None:
    """Passed check or certificate."""
    _tagged("bold green", "PASS", message)


def print_error(message: str) -> None:
    """Configuration or input error."""
    _tagged("bold red", "ERROR", message)


def print_info(message: str) -> None:
    _tagged("bold blue", "INFO", message)


def print_warning(message: str) -> None:
    _tagged("bold yellow", "WARNING", message)


def print_failure(message: str) -> None:
    """Failed check or certificate."""
    _tagged("bold red", "FAIL", message)


def print_header(title: str) -> None:
    console.print(
        Panel(Text(title, style="bold cyan", justify="center"), border_style="cyan", padding=(0, 2))
    )


def print_field(label: str, value: str, label_color: str = "cyan") -> None:
    console.print(f"  [{label_color}]{label}:[/{label_color}] {value}")


def print_separator() -> None:
    console.print()


def print_command_header(title: str) -> None:
    """Blank line, header panel, blank line."""
    print_separator()
    print_header(title)
    print_separator()


def print_table(title: str, columns: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    """Right-aligned rich table; cells must already be strings."""
    table = Table(title=title, header_style="bold cyan")
    for column in columns:
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(*row)
    console.print(table)


def flag(value) -> str:
    """Colored yes/no cell (blank for None)."""
    if value is None:
        return ""
    return "[green]yes[/green]" if value else "[red]no[/red]"
