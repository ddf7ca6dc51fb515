"""Direct singular-integral quadrature of the Liouville-Weyl operators.

These routines never touch the Fourier transform; they are the independent
cross-check of FractionalService. u is taken piecewise linear between
nodes and zero beyond the grid, the kernel is integrated exactly on every
cell (product integration) and the leading h^(2-a) error term is removed
by Richardson extrapolation between spacings h and 2h.

Marchaud form of the left derivative:

    -inf D^a u(x) = a/Gamma(1-a) * int_0^inf (u(x) - u(x-xi)) / xi^(a+1) dxi

and its mirror with u(x+xi) for the right derivative.
"""

import logging

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gamma

from src.models.errors import BoundaryError
from src.models.grid import GridFunction
from src.models.order import as_order

logger = logging.getLogger(__name__)

INTERIOR_FRACTION = 0.1


def _sweep(values: np.ndarray, a_weights: np.ndarray, b_weights: np.ndarray) -> np.ndarray:
    """S_i = sum_{k=0}^{i-1} (A_k v_{i-k} + B_k v_{i-k-1}) for every i."""
    size = values.shape[0]
    shifted_b = np.zeros(size)
    shifted_b[1:] = b_weights[:-1]
    weights = a_weights + shifted_b
    full = fftconvolve(weights[:, None], values, axes=0)[:size]
    # the k = i term only reaches v_0 through B, drop its A part
    return full - a_weights[:, None] * values[0][None, :]


def _marchaud_raw(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    size = values.shape[0]
    k = np.arange(size, dtype=float)
    k_safe = np.where(k == 0, 1.0, k)
    m0 = np.where(k == 0, 0.0, (k_safe ** -alpha - (k + 1.0) ** -alpha) / alpha)
    m1 = ((k + 1.0) ** (1.0 - alpha) - k ** (1.0 - alpha)) / (1.0 - alpha)
    a_weights = h ** -alpha * ((k + 1.0) * m0 - m1)
    b_weights = h ** -alpha * (m1 - k * m0)
    # cell 0 is handled analytically below
    a_weights[0] = 0.0
    b_weights[0] = 0.0
    previous = np.vstack([np.zeros((1, values.shape[1])), values[:-1]])
    first_cell = (values - previous) * h ** -alpha / (1.0 - alpha)
    tail = values * h ** -alpha / alpha
    total = first_cell + tail - _sweep(values, a_weights, b_weights)
    return alpha / gamma(1.0 - alpha) * total


def _weyl_integral_raw(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    size = values.shape[0]
    k = np.arange(size, dtype=float)
    m0 = ((k + 1.0) ** alpha - k ** alpha) / alpha
    m1 = ((k + 1.0) ** (alpha + 1.0) - k ** (alpha + 1.0)) / (alpha + 1.0)
    a_weights = h ** alpha * ((k + 1.0) * m0 - m1)
    b_weights = h ** alpha * (m1 - k * m0)
    return _sweep(values, a_weights, b_weights) / gamma(alpha)


def _richardson(raw, values: np.ndarray, h: float, alpha: float, order: float) -> np.ndarray:
    fine = raw(values, h, alpha)
    coarse = np.empty_like(fine)
    coarse[0::2] = raw(values[0::2], 2.0 * h, alpha)
    coarse[1::2] = raw(values[1::2], 2.0 * h, alpha)
    ratio = 2.0 ** order
    return (ratio * fine - coarse) / (ratio - 1.0)


class QuadratureOracleService:
    """Singular-integral evaluation of fractional operators on a grid."""

    def __init__(self, extrapolate: bool = True) -> None:
        self.extrapolate = extrapolate

    def _left(self, raw, u: GridFunction, alpha: float, order: float) -> GridFunction:
        if self.extrapolate:
            values = _richardson(raw, u.values, u.grid.h, alpha, order)
        else:
            values = raw(u.values, u.grid.h, alpha)
        return u.with_values(values)

    def _right(self, raw, u: GridFunction, alpha: float, order: float) -> GridFunction:
        reversed_u = u.with_values(u.values[::-1])
        return u.with_values(self._left(raw, reversed_u, alpha, order).values[::-1])

    def left_frac_derivative_quadrature(self, u: GridFunction, alpha) -> GridFunction:
        """Marchaud quadrature of the left derivative at every node.

        Only nodes deeper than 0.1*T from the left edge are reliable, see
        ``interior_mask``.
        """
        a = as_order(alpha).alpha
        return self._left(_marchaud_raw, u, a, 2.0 - a)

    def right_frac_derivative_quadrature(self, u: GridFunction, alpha) -> GridFunction:
        a = as_order(alpha).alpha
        return self._right(_marchaud_raw, u, a, 2.0 - a)

    def left_frac_integral_quadrature(self, u: GridFunction, alpha) -> GridFunction:
        a = as_order(alpha).alpha
        return self._left(_weyl_integral_raw, u, a, 2.0)

    def right_frac_integral_quadrature(self, u: GridFunction, alpha) -> GridFunction:
        a = as_order(alpha).alpha
        return self._right(_weyl_integral_raw, u, a, 2.0)

    @staticmethod
    def interior_mask(grid, side: str = "left") -> np.ndarray:
        """Nodes deeper than 0.1*T from the edge the integral starts at."""
        margin = INTERIOR_FRACTION * grid.T
        if side == "left":
            return grid.nodes + grid.T > margin
        return grid.T - grid.nodes > margin

    def left_frac_derivative_at(self, u: GridFunction, alpha, t: float) -> np.ndarray:
        """Left Marchaud derivative at the node nearest to t.

        Raises:
            BoundaryError: if t is within 0.1*T of the left edge
        """
        grid = u.grid
        if t + grid.T <= INTERIOR_FRACTION * grid.T or t >= grid.T:
            raise BoundaryError(
                f"t={t} is too close to the left edge of [-{grid.T}, {grid.T})"
            )
        index = int(round((t + grid.T) / grid.h))
        return self.left_frac_derivative_quadrature(u, alpha).values[index]
