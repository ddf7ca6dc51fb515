"""Report repository interface for fracham.

This module defines the abstract repository interface for run reports, so
that commands do not depend on the on-disk layout of their results.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import List

from src.models.report import RunReport

SUPPORTED_FORMATS = ("json", "csv", "both")


class ReportRepository(ABC):
    """Abstract repository interface for RunReport persistence."""

    @abstractmethod
    def save_json(self, report: RunReport, directory: Path) -> Path:
        """Write report.json.

        Args:
            report: The report to persist
            directory: Output directory (created if missing)

        Returns:
            Path of the written file
        """

    @abstractmethod
    def load_json(self, path: Path) -> RunReport:
        """Read a report.json back into a RunReport.

        Args:
            path: report.json, or a directory containing it

        Returns:
            RunReport identical to the one saved
        """

    @abstractmethod
    def save_csv(self, report: RunReport, directory: Path) -> List[Path]:
        """Write one CSV table per section (solutions, c_hat, beta, conditions)."""

    @abstractmethod
    def save_profiles(self, report: RunReport, directory: Path) -> List[Path]:
        """Write the two-column ``t u`` file of every solution."""

    @abstractmethod
    def export(self, report: RunReport, directory: Path, fmt: str) -> List[Path]:
        """Write the report in ``fmt`` (json, csv or both) plus the profiles.

        Raises:
            ExportFormatError: if ``fmt`` is not supported
        """
