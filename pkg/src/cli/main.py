"""
Main entry point for fracham.
This module is referenced in pyproject.toml for the 'fracham' command.
"""

import logging
import os

from src.cli import commands
from src.sentry_config import init_sentry, capture_exception


def main():
    """Main entry point for the application."""
    logging.basicConfig(
        level=os.getenv("FRACHAM_LOG_LEVEL", "WARNING").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    init_sentry()
    try:
        commands.app()
    except Exception as e:
        capture_exception(e, context={"location": "main"})
        raise


if __name__ == "__main__":
    main()
