"""Instance repository interface for fracham.

This module defines the abstract repository interface for problem
instances, following the Repository pattern so that the solver and the CLI
do not depend on where instances come from (built-in library, config file).
"""

from abc import ABC, abstractmethod
from typing import List, Mapping, Optional

from src.models.grid import Grid
from src.models.problem import ProblemInstance


class InstanceRepository(ABC):
    """Abstract repository interface for ProblemInstance lookup."""

    @abstractmethod
    def get(
        self, name: str, grid: Grid, epsilon: Optional[float] = None
    ) -> ProblemInstance:
        """Get an instance by name, discretized on ``grid``.

        Args:
            name: Instance identifier
            grid: Grid to attach
            epsilon: Gradient smoothing override (optional)

        Returns:
            ProblemInstance

        Raises:
            UnknownInstanceError: if the name is not known
        """

    @abstractmethod
    def build(self, definition: Mapping[str, object], grid: Grid) -> ProblemInstance:
        """Build an inline instance from tagged parameters.

        Args:
            definition: alpha, dim, theta, sigma, epsilon and builder tags
            grid: Grid to attach

        Returns:
            ProblemInstance
        """

    @abstractmethod
    def names(self) -> List[str]:
        """List the instance names known to the repository."""

    @abstractmethod
    def exists(self, name: str) -> bool:
        """Check if an instance name is known."""
