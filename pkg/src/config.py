"""Experiment configuration.

An experiment is a flat ``key = value`` text file with ``#`` comments and
dotted section prefixes::

    seed = 7
    instance.name = coercive_A
    grid.T = 20
    grid.N = 2048
    solver.max_iters = 2000
    study.k = 3

The parser maps it onto pydantic models; range rules live in
``src.cli.business_validator``.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.models.errors import ConfigError
from src.models.results import SolverOptions

logger = logging.getLogger(__name__)

CHECK_NAMES = ("Lw1", "Lw2", "HS1", "HS2", "HS3")
INLINE_KEYS = ("alpha", "dim", "theta", "sigma", "l", "l_param", "a", "a_scale")
SECTIONS = ("instance", "grid", "solver", "study")
TOP_LEVEL = ("seed",)
MAX_SEED = 2**64 - 1


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class InstanceConfig(BaseModel):
    """Builtin name, optionally overridden by inline tags."""

    model_config = ConfigDict(extra="forbid")

    name: str = "coercive_A"
    epsilon: Optional[float] = None
    potential: Optional[str] = None
    alpha: Optional[float] = None
    dim: Optional[int] = None
    theta: Optional[float] = None
    sigma: Optional[float] = None
    l: Optional[str] = None  # noqa: E741
    l_param: Optional[float] = None
    a: Optional[str] = None
    a_scale: Optional[float] = None

    @property
    def inline(self) -> bool:
        return any(getattr(self, key) is not None for key in INLINE_KEYS)

    def definition(self) -> Dict[str, object]:
        """Tags handed to the instance repository's build()."""
        return {
            key: value
            for key, value in self.model_dump().items()
            if value is not None
        }


class GridConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    T: float = 20.0
    N: int = 2048


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_iters: int = 20000
    grad_tol: float = 1e-6
    backtracking: float = 0.5
    sufficient_decrease: float = 1e-4
    deflation_radius: float = 1e-3
    precondition: bool = True
    sphere_starts: int = 32
    sphere_iters: int = 40
    radius_points: int = 25


class StudyConfig(BaseModel):
    """Command-specific parameters."""

    model_config = ConfigDict(extra="forbid")

    k: int = 3
    j_max: int = 4
    J: int = 16
    initializer: str = "basis_1"
    checks: List[str] = Field(default_factory=lambda: list(CHECK_NAMES))
    centers: List[float] = Field(
        default_factory=lambda: [3 * math.pi, 10 * math.pi, 30 * math.pi]
    )
    M: float = 2.0
    r0: float = 1.0
    t_samples: int = 256

    @field_validator("checks", "centers", mode="before")
    @classmethod
    def _comma_list(cls, value):
        return _split_list(value)


class ExperimentConfig(BaseModel):
    """Everything a command needs; round-trips through to_text()."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    instance: InstanceConfig = Field(default_factory=InstanceConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    study: StudyConfig = Field(default_factory=StudyConfig)

    def solver_options(self, epsilon: Optional[float] = None) -> SolverOptions:
        values = self.solver.model_dump()
        values["seed"] = self.seed
        if epsilon is not None:
            values["epsilon"] = epsilon
        return SolverOptions(**values)

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        if seed is None:
            return self
        return self.model_copy(update={"seed": seed})

    def to_text(self) -> str:
        """Serialize to the key = value format (None fields omitted)."""
        lines = [f"seed = {self.seed}"]
        for section in SECTIONS:
            for key, value in getattr(self, section).model_dump().items():
                if value is None:
                    continue
                lines.append(f"{section}.{key} = {_format_value(value)}")
        return "\n".join(lines) + "\n"


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(item) for item in value)
    return str(value)


def _tokenize(text: str) -> Tuple[Dict[str, Dict[str, str]], Dict[str, Tuple[int, int]]]:
    """Split text into section dicts, remembering where each key was."""
    sections: Dict[str, Dict[str, str]] = {}
    positions: Dict[str, Tuple[int, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            column = len(raw) - len(raw.lstrip()) + 1
            raise ConfigError("expected 'key = value'", line=number, column=column)
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        value = value_part.strip()
        key_column = len(key_part) - len(key_part.lstrip()) + 1
        if not key:
            raise ConfigError("empty key", line=number, column=key_column)
        if not value:
            raise ConfigError(f"missing value for '{key}'", line=number, column=len(line) + 1)
        if key in positions:
            raise ConfigError(f"duplicate key '{key}'", line=number, column=key_column)
        if "." in key:
            section, field = key.split(".", 1)
            if section not in SECTIONS:
                raise ConfigError(
                    f"unknown section '{section}' (known: {', '.join(SECTIONS)})",
                    line=number,
                    column=key_column,
                )
            sections.setdefault(section, {})[field] = value
        elif key in TOP_LEVEL:
            sections.setdefault("", {})[key] = value
        else:
            raise ConfigError(f"unknown key '{key}'", line=number, column=key_column)
        positions[key] = (number, key_column)
    return sections, positions


def parse_config(text: str) -> ExperimentConfig:
    """Parse key = value text into an ExperimentConfig.

    Raises:
        ConfigError: on syntax errors, unknown keys or ill-typed values,
            with the line and column of the offending key
    """
    sections, positions = _tokenize(text)
    data: Dict[str, object] = dict(sections.pop("", {}))
    data.update(sections)
    try:
        return ExperimentConfig(**data)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = ".".join(str(part) for part in error["loc"] if not isinstance(part, int))
        line, column = positions.get(key, (None, None))
        raise ConfigError(f"{key}: {error['msg']}", line=line, column=column) from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    config = parse_config(text)
    logger.debug("loaded config %s (instance=%s)", path, config.instance.name)
    return config
