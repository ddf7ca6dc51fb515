"""File-system implementation of ReportRepository.

Layout of an output directory::

    report.json       full-fidelity report
    solutions.csv     one row per solution (profiles omitted)
    c_hat.csv         one row per minimax level
    beta.csv          one row per beta_j
    conditions.csv    one row per hypothesis check
    solution_<i>.dat  ``t u_1 .. u_n`` rows, 17 significant digits
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from src.models.errors import ExportFormatError
from src.models.report import RunReport
from src.repositories.report_repository import SUPPORTED_FORMATS, ReportRepository

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
SOLUTION_COLUMNS = (
    "index",
    "energy",
    "kinetic",
    "potential_L",
    "potential_W",
    "residual_norm",
    "xalpha_norm",
    "tail_mass",
    "iterations",
    "converged",
    "nontrivial",
    "accepted",
    "initializer",
    "seed",
)
C_HAT_COLUMNS = (
    "j",
    "c_hat",
    "optimal_radius",
    "restarts",
    "negative",
    "lower_bound",
    "bound_holds",
    "beta_j",
    "tau",
    "b_norm",
)
BETA_COLUMNS = ("j", "beta", "basis_size", "refined", "relative_change", "label")
CONDITION_COLUMNS = ("name", "passed", "samples", "violations", "worst_slack", "message")


def format_cell(value) -> str:
    """Exact text for a CSV cell: repr for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class FileReportRepository(ReportRepository):
    """Reports stored as JSON, CSV and plain-text profile files."""

    def _ensure(self, directory: Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        return directory

    def _write_table(
        self, path: Path, columns: Sequence[str], rows: Iterable[Dict[str, object]]
    ) -> Path:
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_cell(row.get(column)) for column in columns])
        return path

    def save_json(self, report: RunReport, directory: Path) -> Path:
        path = self._ensure(directory) / REPORT_FILE
        path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info("wrote %s", path)
        return path

    def load_json(self, path: Path) -> RunReport:
        path = Path(path)
        if path.is_dir():
            path = path / REPORT_FILE
        return RunReport.model_validate_json(path.read_text(encoding="utf-8"))

    def save_csv(self, report: RunReport, directory: Path) -> List[Path]:
        directory = self._ensure(directory)
        paths = [
            self._write_table(
                directory / "solutions.csv",
                SOLUTION_COLUMNS,
                (record.model_dump(exclude={"values"}) for record in report.solutions),
            ),
            self._write_table(
                directory / "c_hat.csv",
                C_HAT_COLUMNS,
                (record.model_dump() for record in report.c_hat),
            ),
            self._write_table(
                directory / "beta.csv",
                BETA_COLUMNS,
                (record.model_dump() for record in report.beta),
            ),
            self._write_table(
                directory / "conditions.csv",
                CONDITION_COLUMNS,
                (record.model_dump() for record in report.conditions),
            ),
        ]
        logger.info("wrote %d CSV tables to %s", len(paths), directory)
        return paths

    def save_profiles(self, report: RunReport, directory: Path) -> List[Path]:
        directory = self._ensure(directory)
        paths = []
        for record in report.solutions:
            path = directory / f"solution_{record.index}.dat"
            lines = [
                " ".join(f"{x:.17g}" for x in (t, *row))
                for t, row in zip(record.nodes(), record.values)
            ]
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            paths.append(path)
        return paths

    def export(self, report: RunReport, directory: Path, fmt: str) -> List[Path]:
        if fmt not in SUPPORTED_FORMATS:
            raise ExportFormatError(
                f"unknown format '{fmt}' (supported: {', '.join(SUPPORTED_FORMATS)})"
            )
        paths: List[Path] = []
        if fmt in ("json", "both"):
            paths.append(self.save_json(report, directory))
        if fmt in ("csv", "both"):
            paths.extend(self.save_csv(report, directory))
        paths.extend(self.save_profiles(report, directory))
        return paths
