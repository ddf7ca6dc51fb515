"""Serializable run report.

The JSON schema has the top-level keys config, conditions, solutions,
c_hat, beta, timings, seed and version. Solution records keep the raw node
values so that energies and residuals can be recomputed from the file.
"""

from typing import Annotated, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.models.grid import Grid, GridFunction
from src.models.results import (
    BetaEstimate,
    ConditionReport,
    MeasureReport,
    MinimaxEstimate,
    Solution,
)

SCHEMA_VERSION = "1.0"

AnyCondition = Annotated[Union[ConditionReport, MeasureReport], Field(discriminator="kind")]


class SolutionRecord(BaseModel):
    """One Solution with its profile u(t_k), shape N x n."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    index: int
    energy: float
    kinetic: float
    potential_L: float
    potential_W: float
    residual_norm: float
    xalpha_norm: float
    tail_mass: float
    iterations: int
    converged: bool
    nontrivial: bool
    accepted: bool
    initializer: str
    seed: int
    ancestry: List[str] = Field(default_factory=list)
    T: float
    N: int
    values: List[List[float]]

    @classmethod
    def from_solution(cls, index: int, solution: Solution) -> "SolutionRecord":
        breakdown = solution.energy
        grid = solution.u.grid
        return cls(
            index=index,
            energy=breakdown.total,
            kinetic=breakdown.kinetic,
            potential_L=breakdown.potential_L,
            potential_W=breakdown.potential_W,
            residual_norm=solution.residual_norm,
            xalpha_norm=solution.xalpha_norm,
            tail_mass=solution.tail_mass,
            iterations=solution.iterations,
            converged=solution.converged,
            nontrivial=solution.nontrivial,
            accepted=solution.accepted,
            initializer=solution.provenance.initializer,
            seed=solution.provenance.seed,
            ancestry=list(solution.provenance.ancestry),
            T=grid.T,
            N=grid.N,
            values=solution.u.values.tolist(),
        )

    def grid_function(self) -> GridFunction:
        return GridFunction(Grid(self.T, self.N), np.asarray(self.values, dtype=float))

    def nodes(self) -> np.ndarray:
        return Grid(self.T, self.N).nodes


class MinimaxRecord(BaseModel):
    j: int
    c_hat: float
    optimal_radius: float
    restarts: int
    negative: bool
    lower_bound: Optional[float] = None
    bound_holds: Optional[bool] = None
    beta_j: Optional[float] = None
    tau: Optional[float] = None
    b_norm: Optional[float] = None
    coordinates: List[float] = Field(default_factory=list)

    @classmethod
    def from_estimate(
        cls,
        estimate: MinimaxEstimate,
        beta_j: Optional[float] = None,
        tau: Optional[float] = None,
        b_norm: Optional[float] = None,
    ) -> "MinimaxRecord":
        coordinates = list(estimate.certificate[0].coordinates) if estimate.certificate else []
        return cls(
            j=estimate.j,
            c_hat=estimate.c_hat,
            optimal_radius=estimate.optimal_radius,
            restarts=estimate.restarts,
            negative=estimate.negative,
            lower_bound=estimate.lower_bound,
            bound_holds=estimate.bound_holds,
            beta_j=beta_j,
            tau=tau,
            b_norm=b_norm,
            coordinates=coordinates,
        )


class BetaRecord(BaseModel):
    j: int
    beta: float
    basis_size: int
    refined: Optional[float] = None
    relative_change: Optional[float] = None
    label: str = ""

    @classmethod
    def from_estimate(cls, estimate: BetaEstimate) -> "BetaRecord":
        return cls(
            j=estimate.j,
            beta=estimate.beta,
            basis_size=estimate.basis_size,
            refined=estimate.refined,
            relative_change=estimate.relative_change,
            label=estimate.label,
        )


class RunReport(BaseModel):
    """Everything a command produced, in a re-importable form."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    config: Dict[str, object]
    conditions: List[AnyCondition] = Field(default_factory=list)
    solutions: List[SolutionRecord] = Field(default_factory=list)
    c_hat: List[MinimaxRecord] = Field(default_factory=list)
    beta: List[BetaRecord] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    seed: int = 0
    version: str = SCHEMA_VERSION

    @property
    def conditions_passed(self) -> bool:
        return all(report.passed for report in self.conditions)

    def without_timings(self) -> "RunReport":
        return self.model_copy(update={"timings": {}})
