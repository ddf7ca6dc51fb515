"""Spectral substrate for fracham.

This module owns the discrete Fourier convention used everywhere else:

    c(w_m) = h * sum_k u(t_k) exp(-i w_m t_k),      w_m = pi*m/T
    u(t_k) = 1/(2T) * sum_m c(w_m) exp(i w_m t_k)

so that c approximates the continuous transform of u restricted to the
truncated line, and the periodic trapezoid rule is the quadrature.
"""

import logging

import numpy as np

from src.models.grid import Grid, GridFunction, SpectralFunction
from src.models.errors import GridError

logger = logging.getLogger(__name__)

TAIL_FRACTION = 0.8


class SpectralService:
    """Grid construction, transforms, quadrature and L2 utilities."""

    def make_grid(self, T: float, N: int) -> Grid:
        """Build a Grid on [-T, T) with N points.

        Raises:
            GridError: if N is odd, smaller than 8, or T is not positive
        """
        return Grid(half_width=float(T), num_points=int(N))

    @staticmethod
    def _phase(grid: Grid) -> np.ndarray:
        # exp(-i w_m t_0) with t_0 = -T gives (-1)^m
        m = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
        return np.where(m.astype(int) % 2 == 0, 1.0, -1.0)[:, None]

    def forward_transform(self, u: GridFunction) -> SpectralFunction:
        """Discrete approximation of the Fourier transform of u."""
        grid = u.grid
        coeffs = grid.h * self._phase(grid) * np.fft.fft(u.values, axis=0)
        return SpectralFunction(grid, coeffs)

    def inverse_transform_complex(self, u_hat: SpectralFunction) -> np.ndarray:
        """Inverse transform without discarding the imaginary part."""
        grid = u_hat.grid
        return np.fft.ifft(self._phase(grid) * u_hat.coeffs, axis=0) / grid.h

    def inverse_transform(self, u_hat: SpectralFunction) -> GridFunction:
        """Inverse of forward_transform, returning the real part."""
        values = self.inverse_transform_complex(u_hat)
        return GridFunction(u_hat.grid, values.real)

    def quadrature(self, f: GridFunction) -> float:
        """Periodic trapezoid rule h * sum_k f(t_k) for scalar f."""
        if f.dim != 1:
            raise GridError(f"quadrature expects a scalar function, got n={f.dim}")
        return float(f.grid.h * np.sum(f.values))

    def integrate(self, grid: Grid, samples: np.ndarray) -> float:
        """Trapezoid rule on raw node samples (any trailing shape summed)."""
        return float(grid.h * np.sum(samples))

    def parseval_sum(self, u_hat: SpectralFunction) -> float:
        """(1/2T) * sum |c_m|^2, equal to the L2 norm squared of u."""
        return float(np.sum(np.abs(u_hat.coeffs) ** 2) / (2.0 * u_hat.grid.T))

    def l2_inner(self, u: GridFunction, v: GridFunction) -> float:
        u.grid.check_same(v.grid)
        return float(u.grid.h * np.sum(u.values * v.values))

    def l2_norm(self, u: GridFunction) -> float:
        return float(np.sqrt(self.l2_inner(u, u)))

    def sup_norm(self, u: GridFunction) -> float:
        return float(np.max(np.linalg.norm(u.values, axis=1)))

    def tail_mass(self, u: GridFunction, fraction: float = TAIL_FRACTION) -> float:
        """Share of ||u||^2 carried by |t| > fraction * T (0 for u = 0)."""
        density = np.sum(u.values**2, axis=1)
        total = float(np.sum(density))
        if total == 0.0:
            return 0.0
        outside = np.abs(u.grid.nodes) > fraction * u.grid.T
        return float(np.sum(density[outside]) / total)

    def spectral_derivative(self, u: GridFunction) -> GridFunction:
        """Classical first derivative through the symbol i*w."""
        u_hat = self.forward_transform(u)
        symbol = 1j * u.grid.frequencies.copy()
        symbol[u.grid.nyquist_index] = 0.0
        return self.inverse_transform(u_hat.with_coeffs(symbol[:, None] * u_hat.coeffs))

    def reflect(self, u: GridFunction) -> GridFunction:
        """(u o reflect)(t_k) = u(-t_k) on the periodic grid."""
        index = (-np.arange(u.grid.N)) % u.grid.N
        return u.with_values(u.values[index])

    def zero_pad(self, u: GridFunction, factor: int) -> GridFunction:
        """Embed u in a grid ``factor`` times wider, zero outside [-T, T)."""
        if factor == 1:
            return u
        grid = self.make_grid(factor * u.grid.T, factor * u.grid.N)
        offset = (factor - 1) * u.grid.N // 2
        values = np.zeros((grid.N, u.dim))
        values[offset:offset + u.grid.N] = u.values
        return GridFunction(grid, values)

    def unpad(self, padded: np.ndarray, grid: Grid, factor: int) -> np.ndarray:
        """Restrict node values of a padded grid back to ``grid``."""
        if factor == 1:
            return padded
        offset = (factor - 1) * grid.N // 2
        return padded[offset:offset + grid.N]
