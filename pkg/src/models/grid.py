"""Grid and signal types for fracham.

A Grid is the uniform periodic truncation [-T, T) of the real line. Every
signal in the library is a GridFunction (real, N x n) or its Fourier image,
a SpectralFunction (complex, N x n). Coefficients are stored in numpy FFT
order, i.e. aligned with ``Grid.frequencies``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.models.errors import GridError, GridMismatchError

MIN_POINTS = 8


@dataclass(frozen=True)
class Grid:
    """Uniform grid t_k = -T + k*h, k = 0..N-1, with h = 2T/N."""

    half_width: float
    num_points: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise GridError(f"T must be positive, got {self.half_width}")
        if int(self.num_points) != self.num_points:
            raise GridError(f"N must be an integer, got {self.num_points}")
        if self.num_points < MIN_POINTS:
            raise GridError(
                f"N must be at least {MIN_POINTS}, got {self.num_points}"
            )
        if self.num_points % 2:
            raise GridError(f"N must be even, got {self.num_points}")

    @property
    def T(self) -> float:
        return self.half_width

    @property
    def N(self) -> int:
        return self.num_points

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.num_points

    @property
    def h(self) -> float:
        return self.spacing

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = -self.half_width + self.spacing * np.arange(self.num_points)
        nodes.flags.writeable = False
        return nodes

    @cached_property
    def frequencies(self) -> np.ndarray:
        """w_m = pi*m/T in FFT order (0, 1, .., N/2-1, -N/2, .., -1)."""
        m = np.fft.fftfreq(self.num_points, d=1.0 / self.num_points)
        freqs = np.pi * m / self.half_width
        freqs.flags.writeable = False
        return freqs

    @cached_property
    def nyquist_index(self) -> int:
        return self.num_points // 2

    def check_same(self, other: "Grid") -> None:
        if self != other:
            raise GridMismatchError(
                f"grid mismatch: (T={self.T}, N={self.N}) vs "
                f"(T={other.T}, N={other.N})"
            )


def _as_matrix(values: np.ndarray) -> np.ndarray:
    array = np.asarray(values)
    if array.ndim == 1:
        array = array[:, None]
    return array


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Sampled R^n-valued function; row k holds u(t_k)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(_as_matrix(self.values), dtype=float)
        if values.ndim != 2 or values.shape[0] != self.grid.N:
            raise GridMismatchError(
                f"expected {self.grid.N} rows, got shape {values.shape}"
            )
        if values.shape[1] < 1:
            raise GridError("a grid function needs at least one component")
        if not np.all(np.isfinite(values)):
            raise GridError("grid function values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @classmethod
    def zeros(cls, grid: Grid, dim: int = 1) -> "GridFunction":
        return cls(grid, np.zeros((grid.N, dim)))

    @classmethod
    def from_callable(cls, grid: Grid, func) -> "GridFunction":
        """Sample ``func(t)`` (vectorized over t) on the grid nodes."""
        return cls(grid, func(grid.nodes))

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self.grid.check_same(other.grid)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self.grid.check_same(other.grid)
        return self.with_values(self.values - other.values)

    def __neg__(self) -> "GridFunction":
        return self.with_values(-self.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return self.with_values(float(scalar) * self.values)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return (
            f"<GridFunction(T={self.grid.T}, N={self.grid.N}, "
            f"dim={self.dim})>"
        )


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """Fourier coefficients of a GridFunction, aligned with grid.frequencies."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(_as_matrix(self.coeffs), dtype=complex)
        if coeffs.shape[0] != self.grid.N:
            raise GridMismatchError(
                f"expected {self.grid.N} coefficients, got shape {coeffs.shape}"
            )
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralFunction":
        return SpectralFunction(self.grid, coeffs)

    def conjugate_symmetry_defect(self) -> float:
        """max |c(-w) - conj(c(w))| over non-Nyquist modes."""
        reflected = np.roll(self.coeffs[::-1], 1, axis=0)
        mask = np.ones(self.grid.N, dtype=bool)
        mask[self.grid.nyquist_index] = False
        defect = reflected[mask] - np.conj(self.coeffs[mask])
        return float(np.max(np.abs(defect), initial=0.0))
