"""Result types produced by the numerical services.

Report-like records that end up in report.json are pydantic models;
records carrying sampled signals are frozen dataclasses.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.models.grid import GridFunction

NONTRIVIAL_NORM = 1e-4
TAIL_MASS_LIMIT = 1e-6


class ConditionReport(BaseModel):
    """Outcome of one sampled hypothesis check."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    kind: Literal["condition"] = "condition"
    name: str
    passed: bool
    samples: int = 0
    violations: int = 0
    worst_slack: float = 0.0
    details: Dict[str, float] = Field(default_factory=dict)
    reading: str = ""
    message: str = ""


class MeasureReport(ConditionReport):
    """(L_w2) sublevel-measure check: one measure per window center."""

    kind: Literal["measure"] = "measure"  # type: ignore[assignment]
    centers: List[float] = Field(default_factory=list)
    measures: List[float] = Field(default_factory=list)
    r0: float = 0.0
    level: float = 0.0


class SolverOptions(BaseModel):
    """Knobs of the descent solver and the multiplicity search."""

    model_config = ConfigDict(frozen=True)

    max_iters: int = 20000
    grad_tol: float = 1e-6
    backtracking: float = 0.5
    sufficient_decrease: float = 1e-4
    deflation_radius: float = 1e-3
    epsilon: float = 1e-9
    precondition: bool = True
    seed: int = 0
    sphere_starts: int = 32
    sphere_iters: int = 40
    radius_points: int = 25

    @field_validator("grad_tol", "sufficient_decrease", "deflation_radius")
    @classmethod
    def _positive(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("tolerances must be positive")
        return value

    @field_validator("backtracking")
    @classmethod
    def _ratio(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError("backtracking ratio must lie in (0, 1)")
        return value

    @field_validator("epsilon")
    @classmethod
    def _non_negative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("smoothing epsilon must be >= 0")
        return value

    @field_validator("max_iters", "sphere_starts", "sphere_iters", "radius_points")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError("iteration counts must be >= 1")
        return value


@dataclass(frozen=True)
class EnergyBreakdown:
    """I(u) = kinetic + potential_L - potential_W."""

    kinetic: float
    potential_L: float
    potential_W: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential_L - self.potential_W

    def as_dict(self) -> Dict[str, float]:
        return {
            "kinetic": self.kinetic,
            "potential_L": self.potential_L,
            "potential_W": self.potential_W,
            "total": self.total,
        }


@dataclass(frozen=True)
class BasisSet:
    """X^a-orthonormal functions e_1..e_J (J*n of them for n > 1)."""

    functions: Tuple[GridFunction, ...]
    size_parameter: int
    scale: float

    def __len__(self) -> int:
        return len(self.functions)

    def __getitem__(self, index: int) -> GridFunction:
        return self.functions[index]

    def stacked(self) -> np.ndarray:
        """(J, N, n) array of basis values."""
        return np.stack([e.values for e in self.functions])

    def combine(self, coefficients: np.ndarray) -> GridFunction:
        coefficients = np.asarray(coefficients, dtype=float)
        values = np.tensordot(coefficients, self.stacked()[: coefficients.size], axes=1)
        return GridFunction(self.functions[0].grid, values)


@dataclass(frozen=True)
class Provenance:
    initializer: str
    seed: int
    ancestry: Tuple[str, ...] = ()

    def as_dict(self) -> Dict[str, object]:
        return {
            "initializer": self.initializer,
            "seed": self.seed,
            "ancestry": list(self.ancestry),
        }


@dataclass(frozen=True)
class Solution:
    """A critical-point candidate with its certificate data."""

    u: GridFunction
    energy: EnergyBreakdown
    residual_norm: float
    xalpha_norm: float
    tail_mass: float
    iterations: int
    converged: bool
    provenance: Provenance
    energy_trace: Tuple[float, ...] = ()
    grad_tol: float = 1e-6

    @property
    def nontrivial(self) -> bool:
        return self.xalpha_norm > NONTRIVIAL_NORM

    @property
    def accepted(self) -> bool:
        return (
            self.converged
            and self.residual_norm <= self.grad_tol
            and self.tail_mass <= TAIL_MASS_LIMIT
        )

    def negated(self) -> "Solution":
        return Solution(
            u=-self.u,
            energy=self.energy,
            residual_norm=self.residual_norm,
            xalpha_norm=self.xalpha_norm,
            tail_mass=self.tail_mass,
            iterations=self.iterations,
            converged=self.converged,
            provenance=Provenance(
                self.provenance.initializer,
                self.provenance.seed,
                self.provenance.ancestry + ("negated",),
            ),
            energy_trace=self.energy_trace,
            grad_tol=self.grad_tol,
        )


@dataclass(frozen=True)
class SpherePoint:
    radius: float
    coordinates: Tuple[float, ...]
    energy: float


@dataclass(frozen=True)
class MinimaxEstimate:
    """Upper estimate c_hat_j of the j-th minimax level."""

    j: int
    c_hat: float
    optimal_radius: float
    restarts: int
    certificate: Tuple[SpherePoint, ...] = ()
    radius_profile: Tuple[Tuple[float, float], ...] = ()
    lower_bound: Optional[float] = None

    @property
    def negative(self) -> bool:
        return self.c_hat < 0.0

    @property
    def bound_holds(self) -> Optional[bool]:
        if self.lower_bound is None:
            return None
        return self.lower_bound <= self.c_hat


@dataclass(frozen=True)
class BetaEstimate:
    """Truncated estimate of beta_j inside span{e_j..e_J}."""

    j: int
    beta: float
    basis_size: int
    refined: Optional[float] = None
    label: str = "truncated-tail estimate"

    @property
    def relative_change(self) -> Optional[float]:
        if self.refined is None or self.beta == 0.0:
            return None
        return abs(self.refined - self.beta) / self.beta


@dataclass(frozen=True)
class MultiplicityResult:
    solutions: Tuple[Solution, ...]
    requested: int
    candidates: int = 0
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def shortfall(self) -> bool:
        return len(self.solutions) < self.requested


@dataclass(frozen=True)
class CoercivityRadius:
    """tau solving 1/2 s^2 = (C2^theta/theta) ||b|| s^theta, with its check."""

    tau: float
    c2: float
    b_norm: float
    samples: int
    min_sampled_energy: float

    @property
    def verified(self) -> bool:
        return self.samples == 0 or self.min_sampled_energy > 0.0
