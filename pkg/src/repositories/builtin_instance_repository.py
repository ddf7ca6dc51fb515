"""Built-in instance library for fracham.

This module provides the concrete InstanceRepository: the named fixtures
coercive_A, noncoercive_B and vector_C, plus the tagged builders used for
inline instance definitions in experiment configs.
"""

import logging
from typing import Callable, Dict, List, Mapping, Optional

import numpy as np

from src.models.errors import UnknownInstanceError
from src.models.grid import Grid
from src.models.order import FracOrder
from src.models.problem import MatrixField, Potential, ProblemInstance
from src.repositories.instance_repository import InstanceRepository

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-9


# l(t) builders -----------------------------------------------------------

def quadratic_l(shift: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """l(t) = shift + t^2 (coercive)."""
    return lambda t: shift + np.asarray(t, float) ** 2


def oscillating_l(shift: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """l(t) = shift + t^2 sin^2 t; l(k pi) = shift for every k."""
    return lambda t: shift + (np.asarray(t, float) * np.sin(t)) ** 2


def constant_l(value: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    return lambda t: np.full(np.shape(t), float(value))


L_BUILDERS = {
    "quadratic": quadratic_l,
    "oscillating": oscillating_l,
    "constant": constant_l,
}


def scalar_field(l_fn, dim: int = 1) -> MatrixField:
    """L(t) = l(t) Id_n."""
    eye = np.eye(dim)
    return MatrixField(
        evaluator=lambda t: np.asarray(l_fn(t))[:, None, None] * eye[None],
        lower_bound=l_fn,
        dim=dim,
    )


def diagonal_field(shifts) -> MatrixField:
    """L(t) = diag(shift_i + t^2), l(t) = min(shift) + t^2."""
    shifts = np.asarray(shifts, dtype=float)

    def evaluator(t):
        t = np.asarray(t, dtype=float)
        diagonal = shifts[None, :] + (t**2)[:, None]
        return diagonal[:, :, None] * np.eye(shifts.size)[None]

    return MatrixField(
        evaluator=evaluator,
        lower_bound=quadratic_l(float(shifts.min())),
        dim=int(shifts.size),
    )


# a(t) builders ------------------------------------------------------------

def decaying_weight(scale: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """a(t) = scale / (1 + t^2)."""
    return lambda t: scale / (1.0 + np.asarray(t, float) ** 2)


def constant_weight(scale: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    return lambda t: np.full(np.shape(t), float(scale))


A_BUILDERS = {"decay": decaying_weight, "constant": constant_weight}


# potentials ---------------------------------------------------------------

def _smoothed_power(us: np.ndarray, exponent: float, epsilon: float):
    """(|u|^2 + eps^2)^(p/2) - eps^p and the factor p (|u|^2+eps^2)^(p/2-1)."""
    r2 = np.sum(us**2, axis=1) + epsilon**2
    value = r2 ** (exponent / 2.0) - epsilon**exponent
    safe = np.where(r2 > 0, r2, 1.0)
    factor = np.where(r2 > 0, exponent * safe ** (exponent / 2.0 - 1.0), 0.0)
    return value, factor


def power_potential(a_fn, theta: float, epsilon: float = DEFAULT_EPSILON) -> Potential:
    """W = a(t) |u|_eps^theta, grad W = theta a(t) |u|_eps^(theta-2) u."""

    def evaluate(ts, us):
        return a_fn(ts) * _smoothed_power(us, theta, epsilon)[0]

    def gradient(ts, us):
        return (a_fn(ts) * _smoothed_power(us, theta, epsilon)[1])[:, None] * us

    return Potential(
        evaluate=evaluate,
        gradient=gradient,
        theta=theta,
        sigma=theta,
        a_fn=a_fn,
        b_fn=lambda t: theta * a_fn(t),
        epsilon=epsilon,
        tags={"potential": "power"},
    )


def double_power_potential(
    a_fn, theta: float, sigma: float, epsilon: float = DEFAULT_EPSILON
) -> Potential:
    """W = a(t) (|u|^theta + |u|^sigma); (grad W, u) <= theta W."""

    def evaluate(ts, us):
        return a_fn(ts) * (
            _smoothed_power(us, theta, epsilon)[0] + _smoothed_power(us, sigma, epsilon)[0]
        )

    def gradient(ts, us):
        factor = _smoothed_power(us, theta, epsilon)[1] + _smoothed_power(us, sigma, epsilon)[1]
        return (a_fn(ts) * factor)[:, None] * us

    return Potential(
        evaluate=evaluate,
        gradient=gradient,
        theta=theta,
        sigma=theta,
        a_fn=a_fn,
        b_fn=lambda t: (theta + sigma) * a_fn(t),
        epsilon=epsilon,
        tags={"potential": "double_power", "inner_exponent": sigma},
    )


def cubic_potential(a_fn, theta: float = 1.5, scale: float = 1.0) -> Potential:
    """W = scale |u|^3, checked against the exponent theta (breaks (HS)1)."""
    return Potential(
        evaluate=lambda ts, us: scale * np.linalg.norm(us, axis=1) ** 3,
        gradient=lambda ts, us: 3.0 * scale * np.linalg.norm(us, axis=1)[:, None] * us,
        theta=theta,
        sigma=theta,
        a_fn=a_fn,
        b_fn=lambda t: theta * a_fn(t),
        tags={"potential": "cubic"},
    )


def odd_cubic_potential(a_fn, theta: float = 1.5) -> Potential:
    """W = u_1^3 (odd in u, breaks (HS)3)."""

    def gradient(ts, us):
        grad = np.zeros_like(us)
        grad[:, 0] = 3.0 * us[:, 0] ** 2
        return grad

    return Potential(
        evaluate=lambda ts, us: us[:, 0] ** 3,
        gradient=gradient,
        theta=theta,
        sigma=theta,
        a_fn=a_fn,
        b_fn=lambda t: theta * a_fn(t),
        tags={"potential": "odd_cubic"},
    )


def zero_potential(theta: float = 1.5, a_fn=None) -> Potential:
    """W = 0; a defaults to 0 (the pure quadratic energy)."""
    a_fn = a_fn or constant_weight(0.0)
    return Potential(
        evaluate=lambda ts, us: np.zeros(us.shape[0]),
        gradient=lambda ts, us: np.zeros_like(us),
        theta=theta,
        sigma=theta,
        a_fn=a_fn,
        b_fn=constant_weight(0.0),
        tags={"potential": "zero"},
    )


def with_zero_potential(instance: ProblemInstance) -> ProblemInstance:
    """The W = 0 variant of an instance (same L, alpha, grid)."""
    return instance.with_potential(zero_potential(instance.potential.theta))


class BuiltinInstanceRepository(InstanceRepository):
    """Named fixtures realizing the hypothesis classes of the theorem."""

    ALPHA = 0.6
    THETA = 1.5

    def __init__(self) -> None:
        self._builders: Dict[str, Callable[[Grid, float], ProblemInstance]] = {
            "coercive_A": self._coercive_a,
            "noncoercive_B": self._noncoercive_b,
            "vector_C": self._vector_c,
        }

    def _coercive_a(self, grid: Grid, epsilon: float) -> ProblemInstance:
        return ProblemInstance(
            name="coercive_A",
            alpha=FracOrder(self.ALPHA),
            dim=1,
            matrix_field=scalar_field(quadratic_l(1.0)),
            potential=power_potential(decaying_weight(), self.THETA, epsilon),
            grid=grid,
            tags={"l": "quadratic", "a": "decay", "potential": "power"},
        )

    def _noncoercive_b(self, grid: Grid, epsilon: float) -> ProblemInstance:
        return ProblemInstance(
            name="noncoercive_B",
            alpha=FracOrder(self.ALPHA),
            dim=1,
            matrix_field=scalar_field(oscillating_l(1.0)),
            potential=power_potential(decaying_weight(), self.THETA, epsilon),
            grid=grid,
            tags={"l": "oscillating", "a": "decay", "potential": "power"},
        )

    def _vector_c(self, grid: Grid, epsilon: float) -> ProblemInstance:
        return ProblemInstance(
            name="vector_C",
            alpha=FracOrder(self.ALPHA),
            dim=2,
            matrix_field=diagonal_field([1.0, 2.0]),
            potential=power_potential(decaying_weight(), self.THETA, epsilon),
            grid=grid,
            tags={"l": "diagonal", "a": "decay", "potential": "power"},
        )

    def get(
        self, name: str, grid: Grid, epsilon: Optional[float] = None
    ) -> ProblemInstance:
        if name not in self._builders:
            raise UnknownInstanceError(
                f"unknown instance '{name}' (known: {', '.join(self.names())})"
            )
        eps = DEFAULT_EPSILON if epsilon is None else float(epsilon)
        logger.debug("building instance %s (eps=%g)", name, eps)
        return self._builders[name](grid, eps)

    def build(self, definition: Mapping[str, object], grid: Grid) -> ProblemInstance:
        """Inline instance from tags.

        Recognized keys: name, alpha, dim, theta, sigma, epsilon,
        l (quadratic|oscillating|constant), l_param, a (decay|constant),
        a_scale, potential (power|double_power|cubic|zero).
        """
        dim = int(definition.get("dim", 1))
        theta = float(definition.get("theta", self.THETA))
        epsilon = float(definition.get("epsilon", DEFAULT_EPSILON))
        l_tag = str(definition.get("l", "quadratic"))
        a_tag = str(definition.get("a", "decay"))
        potential_tag = str(definition.get("potential", "power"))
        if l_tag not in L_BUILDERS:
            raise UnknownInstanceError(f"unknown l builder '{l_tag}'")
        if a_tag not in A_BUILDERS:
            raise UnknownInstanceError(f"unknown a builder '{a_tag}'")
        l_fn = L_BUILDERS[l_tag](float(definition.get("l_param", 1.0)))
        a_fn = A_BUILDERS[a_tag](float(definition.get("a_scale", 1.0)))
        if potential_tag == "power":
            potential = power_potential(a_fn, theta, epsilon)
        elif potential_tag == "double_power":
            potential = double_power_potential(
                a_fn, theta, float(definition.get("sigma", theta)), epsilon
            )
        elif potential_tag == "cubic":
            potential = cubic_potential(a_fn, theta)
        elif potential_tag == "zero":
            potential = zero_potential(theta)
        else:
            raise UnknownInstanceError(f"unknown potential '{potential_tag}'")
        sigma = definition.get("sigma")
        if sigma is not None and potential_tag != "double_power":
            potential = Potential(
                evaluate=potential.evaluate,
                gradient=potential.gradient,
                theta=potential.theta,
                sigma=float(sigma),
                a_fn=potential.a_fn,
                b_fn=potential.b_fn,
                epsilon=potential.epsilon,
                tags=potential.tags,
            )
        return ProblemInstance(
            name=str(definition.get("name", "inline")),
            alpha=FracOrder(float(definition.get("alpha", self.ALPHA))),
            dim=dim,
            matrix_field=scalar_field(l_fn, dim),
            potential=potential,
            grid=grid,
            tags={"l": l_tag, "a": a_tag, "potential": potential_tag},
        )

    def names(self) -> List[str]:
        return list(self._builders)

    def exists(self, name: str) -> bool:
        return name in self._builders
