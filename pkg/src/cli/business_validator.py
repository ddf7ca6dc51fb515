"""Range rules for experiment configs.

This module contains the validations that are independent of the CLI
layer, so the same rules apply to configs built in tests or notebooks.

Validators in this module raise ValueError for invalid parameters; the
CLI converts them to ConfigError.
"""

from typing import Iterable

from src.config import CHECK_NAMES, ExperimentConfig


class ExperimentValidator:
    """Parameter rules of the problem class and of the studies."""

    # Problem parameters

    @staticmethod
    def validate_order(alpha: float) -> None:
        """Validate that the fractional order suits the energy setting.

        Raises:
            ValueError: unless 1/2 < alpha < 1
        """
        if not 0.5 < alpha < 1.0:
            raise ValueError(f"alpha must satisfy 1/2 < alpha < 1, got {alpha}")

    @staticmethod
    def validate_exponents(theta: float, sigma: float) -> None:
        """Validate the subquadratic exponents.

        Args:
            theta: Growth exponent of W
            sigma: Homogeneity exponent in (grad W, u) <= sigma W

        Raises:
            ValueError: unless 1 < sigma <= theta < 2
        """
        if not 1.0 < theta < 2.0:
            raise ValueError(f"theta must satisfy 1 < theta < 2, got {theta}")
        if not 1.0 < sigma:
            raise ValueError(f"sigma must be > 1, got {sigma}")
        if sigma > theta:
            raise ValueError(
                f"sigma ({sigma}) cannot exceed theta ({theta}): sigma <= theta < 2 is required"
            )

    @staticmethod
    def validate_grid(T: float, N: int) -> None:
        if T <= 0:
            raise ValueError(f"grid.T must be positive, got {T}")
        if N < 8 or N % 2:
            raise ValueError(f"grid.N must be even and >= 8, got {N}")

    @staticmethod
    def validate_dim(dim: int) -> None:
        if dim < 1:
            raise ValueError(f"instance.dim must be >= 1, got {dim}")

    # Study parameters

    @staticmethod
    def validate_study(k: int, j_max: int, J: int, N: int) -> None:
        """Validate the multiplicity and basis sizes.

        Raises:
            ValueError: if k < 1, j_max < 1, J < j_max or J > N/4
        """
        if k < 1:
            raise ValueError(f"study.k must be >= 1, got {k}")
        if j_max < 1:
            raise ValueError(f"study.j_max must be >= 1, got {j_max}")
        if J < j_max:
            raise ValueError(f"study.J ({J}) must be >= study.j_max ({j_max})")
        if J > N // 4:
            raise ValueError(f"study.J ({J}) must be <= grid.N/4 = {N // 4}")

    @staticmethod
    def validate_checks(checks: Iterable[str]) -> None:
        checks = list(checks)
        if not checks:
            raise ValueError("study.checks must name at least one check")
        unknown = [name for name in checks if name not in CHECK_NAMES]
        if unknown:
            raise ValueError(
                f"unknown checks {', '.join(unknown)} (known: {', '.join(CHECK_NAMES)})"
            )

    @staticmethod
    def validate_measure(M: float, r0: float) -> None:
        if M <= 0 or r0 <= 0:
            raise ValueError("study.M and study.r0 must be positive")

    @classmethod
    def validate_instance(cls, alpha: float, theta: float, sigma: float) -> None:
        """Validate the parameters of a resolved instance."""
        cls.validate_order(alpha)
        cls.validate_exponents(theta, sigma)

    @classmethod
    def validate(cls, config: ExperimentConfig) -> None:
        """Validate the values a config sets explicitly, before any build."""
        cls.validate_grid(config.grid.T, config.grid.N)
        instance = config.instance
        if instance.alpha is not None:
            cls.validate_order(instance.alpha)
        if instance.dim is not None:
            cls.validate_dim(instance.dim)
        if instance.sigma is not None and not 1.0 < instance.sigma < 2.0:
            raise ValueError(
                f"sigma must satisfy 1 < sigma <= theta < 2, got {instance.sigma}"
            )
        if instance.theta is not None:
            sigma = instance.theta if instance.sigma is None else instance.sigma
            cls.validate_exponents(instance.theta, sigma)
        study = config.study
        cls.validate_study(study.k, study.j_max, study.J, config.grid.N)
        cls.validate_checks(study.checks)
        cls.validate_measure(study.M, study.r0)
