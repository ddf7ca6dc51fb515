"""Sampled checks of the structural hypotheses (L_w) and (HS)1-(HS)3.

Hypotheses are asymptotic in |u| and global in t, so every check runs on a
product of t-samples (grid nodes) and u-samples (log-spaced radii times a
fixed set of directions). A check never proves a hypothesis; a failed
check always exhibits a counterexample.
"""

import logging
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from src.models.errors import HypothesisError
from src.models.grid import Grid
from src.models.problem import MatrixField, Potential, ProblemInstance
from src.models.results import ConditionReport, MeasureReport
from src.sentry_config import add_breadcrumb

logger = logging.getLogger(__name__)

SLACK = 1e-10
EVEN_SLACK = 1e-12
MIN_SUBGRID = 1000
DEFAULT_SUBGRID = 100_000
DEFAULT_RADII = np.logspace(-3, 3, 25)
GRADIENT_READING = (
    "the printed 'delta W' in (HS)1 and '(W(t,u), u)' in (HS)2 are read "
    "as grad W"
)


def sample_directions(dim: int, count: int = 16) -> np.ndarray:
    """Deterministic unit directions in R^n (``count`` of them)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    rng = np.random.default_rng(0)
    directions = rng.standard_normal((count, dim))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def sample_points(
    ts: Sequence[float],
    dim: int,
    radii: Optional[Iterable[float]] = None,
    directions: int = 16,
) -> Tuple[np.ndarray, np.ndarray]:
    """Product samples (t, u): every t against every radius * direction."""
    radii = DEFAULT_RADII if radii is None else np.asarray(list(radii), float)
    vectors = (radii[:, None, None] * sample_directions(dim, directions)[None]).reshape(-1, dim)
    ts = np.asarray(ts, dtype=float)
    t_all = np.repeat(ts, vectors.shape[0])
    u_all = np.tile(vectors, (ts.size, 1))
    return t_all, u_all


def _violations(lhs: np.ndarray, rhs: np.ndarray, scale: np.ndarray, tol: float):
    slack = lhs - rhs
    bad = slack > tol * (1.0 + scale)
    worst = float(np.max(slack, initial=-np.inf))
    return int(np.count_nonzero(bad)), worst


class ConditionService:
    """Executable validators for the hypotheses of the existence theorem."""

    def b_norm(self, potential: Potential, grid: Grid) -> float:
        """||b||_{L^{2/(2-theta)}} by trapezoid quadrature on the grid."""
        exponent = 2.0 / (2.0 - potential.theta)
        values = np.abs(potential.b(grid.nodes)) ** exponent
        return float((grid.h * np.sum(values)) ** (1.0 / exponent))

    # (L_w) ---------------------------------------------------------------

    def check_Lw1(self, field: MatrixField, ts: Sequence[float]) -> ConditionReport:
        """Symmetry of L, (L u, u) >= l |u|^2 and inf l > 0 on samples."""
        ts = np.asarray(ts, dtype=float)
        matrices = field.matrices(ts)
        bounds = field.bound(ts)
        asymmetry = np.max(np.abs(matrices - np.swapaxes(matrices, 1, 2)), axis=(1, 2))
        min_eig = np.linalg.eigvalsh(0.5 * (matrices + np.swapaxes(matrices, 1, 2)))[:, 0]
        bad_sym = int(np.count_nonzero(asymmetry > 1e-12))
        bad_eig = int(np.count_nonzero(min_eig < bounds - 1e-10))
        inf_l = float(np.min(bounds))
        passed = bad_sym == 0 and bad_eig == 0 and inf_l > 0
        return ConditionReport(
            name="Lw1",
            passed=passed,
            samples=int(ts.size),
            violations=bad_sym + bad_eig + (0 if inf_l > 0 else 1),
            worst_slack=float(np.max(bounds - min_eig)),
            details={"inf_l": inf_l, "max_asymmetry": float(np.max(asymmetry))},
            message="" if passed else "L(t) not symmetric, l not a lower bound, or inf l <= 0",
        )

    def check_Lw2(
        self,
        l_fn,
        r0: float,
        M: float,
        window_centers: Sequence[float],
        subgrid_points: int = DEFAULT_SUBGRID,
    ) -> MeasureReport:
        """Sublevel measure m({t in (y-r0, y+r0): l(t) <= M}) per center y.

        Passes when all measures vanish or the measure at the largest |y|
        is at most half the measure at the smallest |y|.
        """
        if r0 <= 0 or M <= 0:
            raise HypothesisError(f"r0 and M must be positive, got r0={r0}, M={M}")
        if subgrid_points < MIN_SUBGRID:
            raise HypothesisError(
                f"subgrid_points must be >= {MIN_SUBGRID}, got {subgrid_points}"
            )
        centers = [float(y) for y in window_centers]
        if not centers:
            raise HypothesisError("at least one window center is required")
        offsets = -r0 + (np.arange(subgrid_points) + 0.5) * (2.0 * r0 / subgrid_points)
        measures = []
        for y in centers:
            values = np.asarray(l_fn(y + offsets), dtype=float)
            count = int(np.count_nonzero(values <= M))
            measures.append(count * 2.0 * r0 / subgrid_points)
        order = np.argsort(np.abs(centers), kind="stable")
        nearest, farthest = measures[order[0]], measures[order[-1]]
        all_zero = all(m == 0.0 for m in measures)
        passed = all_zero or farthest <= 0.5 * nearest
        ordered = [measures[i] for i in order]
        decreasing = all(b < a for a, b in zip(ordered, ordered[1:]))
        return MeasureReport(
            name="Lw2",
            passed=bool(passed),
            samples=len(centers) * subgrid_points,
            violations=0 if passed else 1,
            worst_slack=float(farthest - 0.5 * nearest),
            details={"strictly_decreasing": float(decreasing)},
            centers=centers,
            measures=measures,
            r0=r0,
            level=M,
            message="" if passed else "sublevel measure does not decay with |y|",
        )

    def check_coercive_L(
        self, l_fn, radii: Sequence[float], window: float = 10.0, points: int = 20_000
    ) -> ConditionReport:
        """Witness l(t) -> infinity: inf of l on R <= |t| <= R+window grows.

        This is the classical coercivity (L) that (L_w) weakens; it is
        reported, never required.
        """
        lows = []
        for radius in radii:
            s = np.linspace(radius, radius + window, points)
            values = np.concatenate([l_fn(s), l_fn(-s)])
            lows.append(float(np.min(values)))
        growing = all(b > a for a, b in zip(lows, lows[1:]))
        passed = growing and lows[-1] > 10.0 * lows[0]
        return ConditionReport(
            name="L_coercive",
            passed=bool(passed),
            samples=len(lows) * 2 * points,
            violations=0 if passed else 1,
            worst_slack=float(lows[-1]),
            details={f"inf_l_beyond_{r:g}": v for r, v in zip(radii, lows)},
            message="" if passed else "inf of l over |t| >= R does not grow with R",
        )

    # (HS) ----------------------------------------------------------------

    def check_HS1(
        self,
        potential: Potential,
        sample_ts: Sequence[float],
        sample_us: np.ndarray,
        grid: Optional[Grid] = None,
    ) -> ConditionReport:
        """|grad W| <= b |u|^(theta-1), W >= a |u|^theta, a > 0, b in L^{2/(2-theta)}."""
        theta = potential.theta
        if not 1.0 < theta < 2.0:
            raise HypothesisError(f"theta must lie in (1, 2), got {theta}")
        ts = np.asarray(sample_ts, dtype=float)
        us = np.asarray(sample_us, dtype=float)
        norms = np.linalg.norm(us, axis=1)
        W = potential.W(ts, us)
        grad_norm = np.linalg.norm(potential.grad(ts, us), axis=1)
        a = potential.a(ts)
        b = potential.b(ts)
        upper = b * norms ** (theta - 1.0)
        lower = a * norms**theta
        bad_grad, worst_grad = _violations(grad_norm, upper, np.abs(upper), SLACK)
        bad_low, worst_low = _violations(lower, W, np.abs(W), SLACK)
        a_ok = bool(np.all(a > 0) and np.all(np.isfinite(a)))
        details = {"worst_gradient_slack": worst_grad, "worst_lower_slack": worst_low}
        b_ok = True
        if grid is not None:
            exponent = 2.0 / (2.0 - theta)
            density = np.abs(potential.b(grid.nodes)) ** exponent
            total = float(np.sum(density))
            tail = float(np.sum(density[np.abs(grid.nodes) > 0.8 * grid.T]))
            b_ok = bool(np.isfinite(total) and (total == 0 or tail <= 1e-2 * total))
            details["b_norm"] = self.b_norm(potential, grid)
            details["b_norm_exponent"] = exponent
        violations = bad_grad + bad_low + (0 if a_ok else 1) + (0 if b_ok else 1)
        messages = []
        if bad_grad:
            messages.append(f"{bad_grad} samples violate |grad W| <= b|u|^(theta-1)")
        if bad_low:
            messages.append(f"{bad_low} samples violate W >= a|u|^theta")
        if not a_ok:
            messages.append("a(t) not positive and bounded on samples")
        if not b_ok:
            messages.append("b does not look integrable in L^{2/(2-theta)}")
        return ConditionReport(
            name="HS1",
            passed=violations == 0,
            samples=int(ts.size),
            violations=violations,
            worst_slack=max(worst_grad, worst_low),
            details=details,
            reading=GRADIENT_READING,
            message="; ".join(messages),
        )

    def check_HS2(
        self, potential: Potential, sample_ts: Sequence[float], sample_us: np.ndarray
    ) -> ConditionReport:
        """(grad W(t,u), u) <= sigma W(t,u) for u != 0."""
        sigma = potential.sigma
        if not 1.0 < sigma <= potential.theta:
            raise HypothesisError(
                f"sigma must satisfy 1 < sigma <= theta, got {sigma}"
            )
        ts = np.asarray(sample_ts, dtype=float)
        us = np.asarray(sample_us, dtype=float)
        keep = np.linalg.norm(us, axis=1) > 0
        ts, us = ts[keep], us[keep]
        W = potential.W(ts, us)
        pairing = np.sum(potential.grad(ts, us) * us, axis=1)
        bad, worst = _violations(pairing, sigma * W, np.abs(sigma * W), SLACK)
        return ConditionReport(
            name="HS2",
            passed=bad == 0,
            samples=int(ts.size),
            violations=bad,
            worst_slack=worst,
            details={"sigma": sigma},
            reading=GRADIENT_READING,
            message="" if bad == 0 else f"{bad} samples violate (grad W, u) <= sigma W",
        )

    def check_HS3(
        self, potential: Potential, sample_ts: Sequence[float], sample_us: np.ndarray
    ) -> ConditionReport:
        """W(t, -u) = W(t, u) and grad W(t, -u) = -grad W(t, u)."""
        ts = np.asarray(sample_ts, dtype=float)
        us = np.asarray(sample_us, dtype=float)
        W_plus = potential.W(ts, us)
        W_minus = potential.W(ts, -us)
        g_plus = potential.grad(ts, us)
        g_minus = potential.grad(ts, -us)
        even_defect = np.abs(W_plus - W_minus) - EVEN_SLACK * (1.0 + np.abs(W_plus))
        odd_defect = np.linalg.norm(g_plus + g_minus, axis=1) - EVEN_SLACK * (
            1.0 + np.linalg.norm(g_plus, axis=1)
        )
        bad = int(np.count_nonzero(even_defect > 0) + np.count_nonzero(odd_defect > 0))
        worst = float(max(np.max(even_defect, initial=-np.inf), np.max(odd_defect, initial=-np.inf)))
        return ConditionReport(
            name="HS3",
            passed=bad == 0,
            samples=int(ts.size),
            violations=bad,
            worst_slack=worst,
            message="" if bad == 0 else f"{bad} samples break the evenness of W",
        )

    def check_subquadratic(
        self, potential: Potential, sample_ts: Sequence[float], sample_us: np.ndarray
    ) -> ConditionReport:
        """W(t, u) <= b(t)/theta |u|^theta."""
        ts = np.asarray(sample_ts, dtype=float)
        us = np.asarray(sample_us, dtype=float)
        bound = potential.b(ts) / potential.theta * np.linalg.norm(us, axis=1) ** potential.theta
        W = potential.W(ts, us)
        bad, worst = _violations(W, bound, np.abs(bound), SLACK)
        return ConditionReport(
            name="subquadratic",
            passed=bad == 0,
            samples=int(ts.size),
            violations=bad,
            worst_slack=worst,
            message="" if bad == 0 else f"{bad} samples violate W <= b|u|^theta/theta",
        )

    def check_gradient_consistency(
        self,
        potential: Potential,
        sample_ts: Sequence[float],
        sample_us: np.ndarray,
        tol: float = 1e-6,
    ) -> ConditionReport:
        """Central differences of W in u against grad W, for |u| >= 1e-2."""
        ts = np.asarray(sample_ts, dtype=float)
        us = np.asarray(sample_us, dtype=float)
        norms = np.linalg.norm(us, axis=1)
        keep = norms >= 1e-2
        ts, us, norms = ts[keep], us[keep], norms[keep]
        steps = 1e-5 * (1.0 + norms)
        numeric = np.empty_like(us)
        for i in range(us.shape[1]):
            shift = np.zeros_like(us)
            shift[:, i] = steps
            numeric[:, i] = (potential.W(ts, us + shift) - potential.W(ts, us - shift)) / (2.0 * steps)
        exact = potential.grad(ts, us)
        scale = np.maximum(np.linalg.norm(exact, axis=1), 1e-300)
        errors = np.linalg.norm(numeric - exact, axis=1) / scale
        bad = int(np.count_nonzero(errors > tol))
        return ConditionReport(
            name="gradient",
            passed=bad == 0,
            samples=int(ts.size),
            violations=bad,
            worst_slack=float(np.max(errors, initial=0.0)),
            message="" if bad == 0 else f"{bad} samples with finite-difference mismatch",
        )

    # whole instance --------------------------------------------------------

    def check_instance(
        self,
        instance: ProblemInstance,
        r0: float = 1.0,
        M: float = 2.0,
        window_centers: Sequence[float] = (3 * np.pi, 10 * np.pi, 30 * np.pi),
        t_samples: int = 256,
        subgrid_points: int = DEFAULT_SUBGRID,
    ) -> Tuple[ConditionReport, ...]:
        """Run (L_w1), (L_w2), (HS)1-(HS)3 on the default sample sets."""
        add_breadcrumb(
            f"checking hypotheses of {instance.name}", category="check"
        )
        nodes = instance.grid.nodes
        stride = max(1, nodes.size // t_samples)
        ts, us = sample_points(nodes[::stride], instance.dim)
        reports = (
            self.check_Lw1(instance.matrix_field, nodes),
            self.check_Lw2(
                instance.matrix_field.lower_bound, r0, M, window_centers, subgrid_points
            ),
            self.check_HS1(instance.potential, ts, us, grid=instance.grid),
            self.check_HS2(instance.potential, ts, us),
            self.check_HS3(instance.potential, ts, us),
        )
        for report in reports:
            logger.info(
                "%s on %s: %s (%d violations)",
                report.name,
                instance.name,
                "pass" if report.passed else "FAIL",
                report.violations,
            )
        return reports
