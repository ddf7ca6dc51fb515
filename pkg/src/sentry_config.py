"""Sentry monitoring for fracham runs.

Reads SENTRY_DSN and ENVIRONMENT from the process environment (or .env).
When no DSN is set the helpers still run but nothing leaves the process;
logging goes through the standard logging module either way.
"""

import logging
import os
from typing import Optional

import sentry_sdk
from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

RUN_TAGS = ("command", "seed", "instance")


def init_sentry() -> bool:
    """Start the Sentry client if SENTRY_DSN is set.

    Every run is traced (traces_sample_rate=1.0): runs are few and long.

    Returns:
        True if the client was started
    """
    dsn = os.getenv("SENTRY_DSN")
    environment = os.getenv("ENVIRONMENT", "development")
    if not dsn:
        logger.info("SENTRY_DSN not set, monitoring disabled")
        return False

    try:
        sentry_sdk.init(
            dsn=dsn,
            traces_sample_rate=1.0,
            environment=environment,
            send_default_pii=False,
            attach_stacktrace=True,
            max_breadcrumbs=100,
        )
    except Exception as exc:
        logger.error("Sentry init failed: %s", exc)
        return False
    logger.info("Sentry started for %s", environment)
    return True


def _attach(context: Optional[dict]) -> None:
    if context:
        sentry_sdk.set_context("run", context)


def capture_exception(exception: Exception, context: Optional[dict] = None) -> None:
    """Report an unexpected exception, e.g. a crash inside a pipeline.

    Example:
        capture_exception(exc, {"instance": instance.name, "seed": 7})
    """
    _attach(context)
    sentry_sdk.capture_exception(exception)


def capture_message(message: str, level: str = "info", context: Optional[dict] = None) -> None:
    """Report a noteworthy numerical event (non-convergence, failed bound)."""
    _attach(context)
    sentry_sdk.capture_message(message, level=level)


def set_run_context(command: str, seed: int, instance: Optional[str] = None) -> None:
    """Tag subsequent events with the command, seed and instance."""
    sentry_sdk.set_tag("command", command)
    sentry_sdk.set_tag("seed", str(seed))
    if instance:
        sentry_sdk.set_tag("instance", instance)


def clear_run_context() -> None:
    for key in RUN_TAGS:
        sentry_sdk.set_tag(key, None)


def add_breadcrumb(
    message: str,
    category: str = "solver",
    level: str = "info",
    data: Optional[dict] = None,
) -> None:
    """Record a pipeline stage (categories: check, solver, minimax, export).

    Example:
        add_breadcrumb("minimize started", data={"initializer": "basis_3"})
    """
    sentry_sdk.add_breadcrumb(message=message, category=category, level=level, data=data or {})
