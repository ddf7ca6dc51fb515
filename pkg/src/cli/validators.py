"""CLI input validators for Typer callbacks.

This module contains validators for CLI input (Typer callbacks).
Parameter range rules are in src/cli/business_validator.py (SRP compliance).
"""

from pathlib import Path
from typing import Optional

import typer

from src.config import MAX_SEED
from src.repositories.report_repository import SUPPORTED_FORMATS


# Callback validators for typer.Option
def validate_config_path_callback(value: Path) -> Path:
    """Validate that the config file exists."""
    if not value.is_file():
        raise typer.BadParameter(f"Config file not found: {value}")
    return value


def validate_report_path_callback(value: Path) -> Path:
    """Accept report.json or a directory containing it."""
    candidate = value / "report.json" if value.is_dir() else value
    if not candidate.is_file():
        raise typer.BadParameter(f"No report found at {value}")
    return candidate


def validate_seed_callback(value: Optional[int]) -> Optional[int]:
    """Validate an unsigned 64-bit seed."""
    if value is None:
        return value
    if not 0 <= value <= MAX_SEED:
        raise typer.BadParameter(f"Seed must lie in [0, 2^64 - 1], got {value}")
    return value


def validate_format_callback(value: str) -> str:
    """Validate and normalize the export format."""
    cleaned = value.strip().lower()
    if cleaned not in SUPPORTED_FORMATS:
        raise typer.BadParameter(
            f"Unknown format '{value}' (supported: {', '.join(SUPPORTED_FORMATS)})"
        )
    return cleaned
