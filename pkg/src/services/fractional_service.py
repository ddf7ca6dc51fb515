"""Liouville-Weyl fractional operators by Fourier symbol calculus.

Symbols (principal branch, matching the exp(-itw) transform convention):

    left derivative   (iw)^a   = |w|^a exp( i sign(w) a pi/2)
    right derivative  (-iw)^a  = |w|^a exp(-i sign(w) a pi/2)
    left integral     (iw)^-a
    right integral    (-iw)^-a

The zero mode of the integral symbols is set to 0 and the Nyquist mode of
every symbol is set to 0, so real input always gives real output.
"""

import logging
from typing import Optional

import numpy as np

from src.models.grid import GridFunction
from src.models.order import as_order
from src.services.spectral_service import SpectralService

logger = logging.getLogger(__name__)

SYMBOL_KINDS = (
    "left_derivative",
    "right_derivative",
    "left_integral",
    "right_integral",
)
PADDED_ENERGY_LIMIT = 1e-8


class FractionalService:
    """Fractional integrals and derivatives of GridFunctions.

    Args:
        spectral: transform backend
        pad_factor: default zero-padding factor; 1 keeps the periodic
            operator the energy functional is built from, larger values
            approximate the real-line operator for decaying input
    """

    def __init__(self, spectral: SpectralService, pad_factor: int = 1) -> None:
        if pad_factor < 1:
            raise ValueError(f"pad_factor must be >= 1, got {pad_factor}")
        self.spectral = spectral
        self.pad_factor = pad_factor

    @staticmethod
    def symbol(kind: str, alpha, frequencies: np.ndarray) -> np.ndarray:
        """Fourier symbol of one of the four operators on given frequencies."""
        if kind not in SYMBOL_KINDS:
            raise ValueError(f"unknown symbol kind '{kind}'")
        order = as_order(alpha).alpha
        w = np.asarray(frequencies, dtype=float)
        sign = np.sign(w)
        side = 1.0 if kind.startswith("left") else -1.0
        result = np.zeros(w.shape, dtype=complex)
        nonzero = w != 0.0
        if kind.endswith("derivative"):
            magnitude = np.abs(w[nonzero]) ** order
            phase = side * sign[nonzero] * order * np.pi / 2.0
        else:
            magnitude = np.abs(w[nonzero]) ** (-order)
            phase = -side * sign[nonzero] * order * np.pi / 2.0
        result[nonzero] = magnitude * np.exp(1j * phase)
        if w.ndim == 1 and w.size and w.min() < 0 and -w.min() not in w:
            # unpaired most negative mode = Nyquist
            result[w == w.min()] = 0.0
        return result

    def kinetic_symbol(self, alpha, frequencies: np.ndarray) -> np.ndarray:
        """|w|^(2a), the symbol of tD^a(-inf D^a); Nyquist mode zeroed."""
        left = self.symbol("left_derivative", alpha, frequencies)
        return np.abs(left) ** 2

    def _apply_complex(
        self, u: GridFunction, kind: str, alpha, pad_factor: Optional[int]
    ) -> np.ndarray:
        factor = self.pad_factor if pad_factor is None else pad_factor
        if factor > 1:
            edge = self.spectral.tail_mass(u, fraction=0.95)
            if edge > PADDED_ENERGY_LIMIT:
                logger.debug(
                    "padding a signal with edge mass %.3e > %.0e",
                    edge,
                    PADDED_ENERGY_LIMIT,
                )
        padded = self.spectral.zero_pad(u, factor)
        u_hat = self.spectral.forward_transform(padded)
        sym = self.symbol(kind, alpha, padded.grid.frequencies)
        values = self.spectral.inverse_transform_complex(
            u_hat.with_coeffs(sym[:, None] * u_hat.coeffs)
        )
        return self.spectral.unpad(values, u.grid, factor)

    def apply(
        self,
        u: GridFunction,
        kind: str,
        alpha,
        pad_factor: Optional[int] = None,
    ) -> GridFunction:
        return u.with_values(self._apply_complex(u, kind, alpha, pad_factor).real)

    def imaginary_residue(self, u: GridFunction, kind: str, alpha) -> float:
        """max |Im| / max |Re| of the operator output before taking Re."""
        values = self._apply_complex(u, kind, alpha, None)
        scale = float(np.max(np.abs(values.real), initial=0.0))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(values.imag)) / scale)

    def left_frac_integral(self, u, alpha, pad_factor=None) -> GridFunction:
        """-inf I_t^a u; the mean mode of u is discarded."""
        return self.apply(u, "left_integral", alpha, pad_factor)

    def right_frac_integral(self, u, alpha, pad_factor=None) -> GridFunction:
        """t I_inf^a u; the mean mode of u is discarded."""
        return self.apply(u, "right_integral", alpha, pad_factor)

    def left_frac_derivative(self, u, alpha, pad_factor=None) -> GridFunction:
        """-inf D_t^a u."""
        return self.apply(u, "left_derivative", alpha, pad_factor)

    def right_frac_derivative(self, u, alpha, pad_factor=None) -> GridFunction:
        """t D_inf^a u."""
        return self.apply(u, "right_derivative", alpha, pad_factor)

    def kinetic_operator(self, u: GridFunction, alpha) -> GridFunction:
        """tD^a(-inf D^a u) assembled as inverse(|w|^(2a) u_hat)."""
        u_hat = self.spectral.forward_transform(u)
        sym = self.kinetic_symbol(alpha, u.grid.frequencies)
        return self.spectral.inverse_transform(
            u_hat.with_coeffs(sym[:, None] * u_hat.coeffs)
        )

    def fractional_seminorm(self, u: GridFunction, alpha) -> float:
        """|u|_a = ||-inf D^a u||_L2 evaluated in physical space."""
        derivative = self.left_frac_derivative(u, alpha, pad_factor=1)
        return float(np.sqrt(self.spectral.l2_inner(derivative, derivative)))

    def fractional_seminorm_spectral(self, u: GridFunction, alpha) -> float:
        """|| |w|^a u_hat ||, normalized like parseval_sum."""
        u_hat = self.spectral.forward_transform(u)
        weight = self.kinetic_symbol(alpha, u.grid.frequencies)
        total = np.sum(weight[:, None] * np.abs(u_hat.coeffs) ** 2)
        return float(np.sqrt(total / (2.0 * u.grid.T)))
