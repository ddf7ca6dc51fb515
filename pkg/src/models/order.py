"""Fractional order type."""

from dataclasses import dataclass

from src.models.errors import OrderError


@dataclass(frozen=True)
class FracOrder:
    """Fractional order alpha, 0 < alpha < 1."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise OrderError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def in_solver_range(self) -> bool:
        return 0.5 < self.alpha < 1.0

    def require_solver_range(self) -> None:
        if not self.in_solver_range:
            raise OrderError(
                f"the Hamiltonian system needs alpha in (1/2, 1), got {self.alpha}"
            )


def as_order(alpha) -> FracOrder:
    return alpha if isinstance(alpha, FracOrder) else FracOrder(float(alpha))
