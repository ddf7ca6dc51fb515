"""Energy functional of the fractional Hamiltonian system.

    I(u)     = 1/2 ||u||_X^2 - int W(t, u) dt
    ||u||_X^2 = int |-inf D^a u|^2 + (L(t) u, u) dt

Everything is discretized with the periodic operators on the instance grid
so that the strong residual is the exact L2 representative of I'(u).
"""

import logging
from typing import Optional

import numpy as np

from src.models.grid import GridFunction
from src.models.problem import ProblemInstance
from src.models.results import EnergyBreakdown
from src.services.fractional_service import FractionalService
from src.services.spectral_service import SpectralService

logger = logging.getLogger(__name__)


class EnergyService:
    """X^a geometry, I(u), I'(u)v and the strong-form residual."""

    def __init__(self, spectral: SpectralService, fractional: FractionalService) -> None:
        self.spectral = spectral
        self.fractional = fractional

    def derivative(self, u: GridFunction, instance: ProblemInstance) -> GridFunction:
        instance.grid.check_same(u.grid)
        return self.fractional.left_frac_derivative(u, instance.alpha, pad_factor=1)

    def _L_pairing(self, u: GridFunction, v: GridFunction, instance: ProblemInstance) -> float:
        Lu = instance.matrix_field.apply(instance.grid.nodes, u.values)
        return self.spectral.integrate(instance.grid, Lu * v.values)

    def xalpha_inner(self, u: GridFunction, v: GridFunction, instance: ProblemInstance) -> float:
        """<u, v>_X = int (D^a u, D^a v) + (L u, v) dt."""
        instance.grid.check_same(u.grid)
        instance.grid.check_same(v.grid)
        Du = self.derivative(u, instance)
        Dv = self.derivative(v, instance)
        kinetic = self.spectral.integrate(instance.grid, Du.values * Dv.values)
        return kinetic + self._L_pairing(u, v, instance)

    def xalpha_norm(self, u: GridFunction, instance: ProblemInstance) -> float:
        return float(np.sqrt(max(self.xalpha_inner(u, u, instance), 0.0)))

    def energy(self, u: GridFunction, instance: ProblemInstance) -> EnergyBreakdown:
        instance.grid.check_same(u.grid)
        Du = self.derivative(u, instance)
        grid = instance.grid
        kinetic = 0.5 * self.spectral.integrate(grid, Du.values**2)
        potential_L = 0.5 * self._L_pairing(u, u, instance)
        potential_W = self.spectral.integrate(grid, instance.potential.W(grid.nodes, u.values))
        return EnergyBreakdown(kinetic, potential_L, potential_W)

    def value(self, u: GridFunction, instance: ProblemInstance) -> float:
        return self.energy(u, instance).total

    def directional_derivative(
        self, u: GridFunction, v: GridFunction, instance: ProblemInstance
    ) -> float:
        """I'(u) v = <u, v>_X - int (grad W(t, u), v) dt."""
        grid = instance.grid
        grad = instance.potential.grad(grid.nodes, u.values)
        return self.xalpha_inner(u, v, instance) - self.spectral.integrate(grid, grad * v.values)

    def residual(self, u: GridFunction, instance: ProblemInstance) -> GridFunction:
        """tD^a(-inf D^a u) + L u - grad W(t, u) on the grid."""
        instance.grid.check_same(u.grid)
        grid = instance.grid
        kinetic = self.fractional.kinetic_operator(u, instance.alpha)
        Lu = instance.matrix_field.apply(grid.nodes, u.values)
        grad = instance.potential.grad(grid.nodes, u.values)
        return u.with_values(kinetic.values + Lu - grad)

    def residual_norm(self, u: GridFunction, instance: ProblemInstance) -> float:
        return self.spectral.l2_norm(self.residual(u, instance))

    def precondition(
        self, r: GridFunction, instance: ProblemInstance, shift: Optional[float] = None
    ) -> GridFunction:
        """Apply (|w|^(2a) + inf_l)^(-1), exact for L = inf_l Id and W = 0."""
        shift = instance.inf_l if shift is None else shift
        r_hat = self.spectral.forward_transform(r)
        symbol = self.fractional.kinetic_symbol(instance.alpha, r.grid.frequencies) + shift
        return self.spectral.inverse_transform(r_hat.with_coeffs(r_hat.coeffs / symbol[:, None]))

    def xalpha_gram(self, stack: np.ndarray, instance: ProblemInstance) -> np.ndarray:
        """X^a Gram matrix of a (J, N, n) stack of grid functions."""
        grid = instance.grid
        derivatives = np.stack(
            [self.derivative(GridFunction(grid, f), instance).values for f in stack]
        )
        Lf = np.stack([instance.matrix_field.apply(grid.nodes, f) for f in stack])
        flat_d = derivatives.reshape(len(stack), -1)
        flat = stack.reshape(len(stack), -1)
        flat_l = Lf.reshape(len(stack), -1)
        gram = grid.h * (flat_d @ flat_d.T + 0.5 * (flat_l @ flat.T + flat @ flat_l.T))
        return 0.5 * (gram + gram.T)

    def l2_gram(self, stack: np.ndarray, grid) -> np.ndarray:
        flat = stack.reshape(len(stack), -1)
        return grid.h * (flat @ flat.T)

    def embedding_ratio_l2(self, u: GridFunction, instance: ProblemInstance) -> float:
        """||u||_L2 / ||u||_X (0 for u = 0)."""
        norm = self.xalpha_norm(u, instance)
        return 0.0 if norm == 0.0 else self.spectral.l2_norm(u) / norm

    def embedding_ratio_sup(self, u: GridFunction, instance: ProblemInstance) -> float:
        """||u||_inf / ||u||_X (0 for u = 0)."""
        norm = self.xalpha_norm(u, instance)
        return 0.0 if norm == 0.0 else self.spectral.sup_norm(u) / norm

    def energy_lower_bound(
        self, norm: float, instance: ProblemInstance, c2: float, b_norm: float
    ) -> float:
        """1/2 s^2 - (C2^theta / theta) ||b|| s^theta at s = ||u||_X."""
        theta = instance.potential.theta
        return 0.5 * norm**2 - (c2**theta / theta) * b_norm * norm**theta
