"""Problem definition for the fractional Hamiltonian system.

    tD^a(-inf D^a u) + L(t) u = grad W(t, u),   u(t) in R^n

All evaluators are vectorized: ``ts`` has shape (m,), ``us`` shape (m, n).
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict

import numpy as np

from src.models.errors import HypothesisError, OrderError
from src.models.grid import Grid
from src.models.order import FracOrder

ArrayFn = Callable[[np.ndarray], np.ndarray]
PotentialFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MatrixField:
    """t -> L(t) (m, n, n) symmetric, with pointwise lower bound l(t)."""

    evaluator: ArrayFn
    lower_bound: ArrayFn
    dim: int

    def matrices(self, ts: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(ts, dtype=float)), dtype=float)

    def bound(self, ts: np.ndarray) -> np.ndarray:
        return np.asarray(self.lower_bound(np.asarray(ts, dtype=float)), dtype=float)

    def apply(self, ts: np.ndarray, us: np.ndarray) -> np.ndarray:
        """Row-wise L(t_k) u_k."""
        return np.einsum("kij,kj->ki", self.matrices(ts), us)


@dataclass(frozen=True)
class Potential:
    """W(t, u) with gradient and the exponents/weights of (HS)1-(HS)2."""

    evaluate: PotentialFn
    gradient: PotentialFn
    theta: float
    sigma: float
    a_fn: ArrayFn
    b_fn: ArrayFn
    epsilon: float = 0.0
    tags: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 1.0 < self.theta < 2.0:
            raise HypothesisError(f"theta must lie in (1, 2), got {self.theta}")
        if not 1.0 < self.sigma <= self.theta:
            raise HypothesisError(
                f"sigma must satisfy 1 < sigma <= theta={self.theta}, "
                f"got {self.sigma}"
            )

    def W(self, ts: np.ndarray, us: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluate(np.asarray(ts, float), np.asarray(us, float)))

    def grad(self, ts: np.ndarray, us: np.ndarray) -> np.ndarray:
        return np.asarray(self.gradient(np.asarray(ts, float), np.asarray(us, float)))

    def a(self, ts: np.ndarray) -> np.ndarray:
        return np.asarray(self.a_fn(np.asarray(ts, float)), dtype=float)

    def b(self, ts: np.ndarray) -> np.ndarray:
        return np.asarray(self.b_fn(np.asarray(ts, float)), dtype=float)

    @property
    def is_zero(self) -> bool:
        return self.tags.get("potential") == "zero"


@dataclass(frozen=True)
class ProblemInstance:
    """One fully specified fractional Hamiltonian system on a grid."""

    name: str
    alpha: FracOrder
    dim: int
    matrix_field: MatrixField
    potential: Potential
    grid: Grid
    tags: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.alpha.in_solver_range:
            raise OrderError(
                f"alpha must lie in (1/2, 1) for the Hamiltonian system, "
                f"got {self.alpha.alpha}"
            )
        if self.dim != self.matrix_field.dim:
            raise HypothesisError(
                f"dimension mismatch: n={self.dim}, L is {self.matrix_field.dim}x"
                f"{self.matrix_field.dim}"
            )

    @property
    def inf_l(self) -> float:
        return float(np.min(self.matrix_field.bound(self.grid.nodes)))

    def with_grid(self, grid: Grid) -> "ProblemInstance":
        return replace(self, grid=grid)

    def with_potential(self, potential: Potential) -> "ProblemInstance":
        return replace(self, potential=potential)
