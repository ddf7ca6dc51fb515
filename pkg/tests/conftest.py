"""
Pytest configuration and shared fixtures for fracham tests.
"""

import numpy as np
import pytest

from src.containers import Container
from src.models.grid import Grid, GridFunction
from src.repositories.builtin_instance_repository import BuiltinInstanceRepository


@pytest.fixture(autouse=True)
def mock_sentry(mocker):
    """Keep Sentry calls local during tests."""
    mocker.patch("sentry_sdk.capture_message")
    mocker.patch("sentry_sdk.capture_exception")


@pytest.fixture(scope="session")
def container():
    """Container shared by the whole session (services are stateless)."""
    return Container()


@pytest.fixture(scope="session")
def spectral(container):
    return container.spectral_service()


@pytest.fixture(scope="session")
def fractional(container):
    return container.fractional_service()


@pytest.fixture(scope="session")
def oracle(container):
    return container.quadrature_oracle_service()


@pytest.fixture(scope="session")
def conditions(container):
    return container.condition_service()


@pytest.fixture(scope="session")
def energy(container):
    return container.energy_service()


@pytest.fixture(scope="session")
def basis_service(container):
    return container.basis_service()


@pytest.fixture(scope="session")
def solver(container):
    return container.solver_service()


@pytest.fixture(scope="session")
def minimax(container):
    return container.minimax_service()


@pytest.fixture(scope="session")
def instances():
    return BuiltinInstanceRepository()


@pytest.fixture(scope="session")
def grid():
    """T = 20, N = 1024: operator and energy tests."""
    return Grid(20.0, 1024)


@pytest.fixture(scope="session")
def small_grid():
    """T = 20, N = 512: solver tests."""
    return Grid(20.0, 512)


@pytest.fixture(scope="session")
def coercive_a(instances, small_grid):
    return instances.get("coercive_A", small_grid)


@pytest.fixture(scope="session")
def noncoercive_b(instances, small_grid):
    return instances.get("noncoercive_B", small_grid)


@pytest.fixture(scope="session")
def vector_c(instances, small_grid):
    return instances.get("vector_C", small_grid)


@pytest.fixture
def gaussian(grid):
    return GridFunction.from_callable(grid, lambda t: np.exp(-(t**2)))


@pytest.fixture
def gaussian_derivative(grid):
    """-2t exp(-t^2): zero mean."""
    return GridFunction.from_callable(grid, lambda t: -2.0 * t * np.exp(-(t**2)))


def _band_limited(grid: Grid, seed: int, modes: int = 32) -> GridFunction:
    """Zero-mean real trigonometric polynomial on modes 1..modes."""
    rng = np.random.default_rng(seed)
    t = grid.nodes
    values = np.zeros(grid.N)
    for m in range(1, modes + 1):
        w = np.pi * m / grid.T
        values += rng.standard_normal() * np.cos(w * t) + rng.standard_normal() * np.sin(w * t)
    return GridFunction(grid, values)


@pytest.fixture
def band_limited():
    """Factory: band_limited(grid, seed, modes=32)."""
    return _band_limited
