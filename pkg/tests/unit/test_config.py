"""Unit tests for the experiment config parser.

Tests covered:
- parse_config(): defaults, sections, comments, comma lists
- ConfigError positions: syntax, unknown keys, duplicates, bad values
- to_text(): parse(to_text(c)) == c
- with_seed() / solver_options()
- load_config(): shipped configs, missing file
"""

from pathlib import Path

import pytest

from src.config import ExperimentConfig, load_config, parse_config
from src.models.errors import ConfigError

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


class TestParseConfig:
    """Test parse_config."""

    def test_empty_text_gives_defaults(self):
        config = parse_config("")
        assert config == ExperimentConfig()
        assert config.instance.name == "coercive_A"
        assert config.grid.N == 2048

    def test_sections_and_comments(self):
        """GIVEN dotted keys and comments / WHEN parsed / THEN typed values"""
        text = (
            "# experiment\n"
            "seed = 7\n"
            "instance.name = noncoercive_B   # oscillating l\n"
            "grid.T = 25.5\n"
            "solver.precondition = false\n"
            "study.checks = Lw1, HS3\n"
            "study.centers = 10, 20\n"
        )
        config = parse_config(text)
        assert config.seed == 7
        assert config.instance.name == "noncoercive_B"
        assert config.grid.T == 25.5
        assert config.solver.precondition is False
        assert config.study.checks == ["Lw1", "HS3"]
        assert config.study.centers == [10.0, 20.0]

    def test_inline_instance(self):
        config = parse_config("instance.theta = 1.6\ninstance.potential = double_power\n")
        assert config.instance.inline
        assert config.instance.definition() == {
            "name": "coercive_A",
            "theta": 1.6,
            "potential": "double_power",
        }

    def test_builtin_instance_is_not_inline(self):
        assert not parse_config("instance.name = vector_C\n").instance.inline


class TestConfigErrors:
    """Test error positions."""

    @pytest.mark.parametrize(
        "text,line,column",
        [
            ("seed = 1\ngrid.N\n", 2, 1),
            ("seed = 1\n   = 4\n", 2, 4),
            ("grid.N = 512\ngrid.N = 1024\n", 2, 1),
            ("seed = 1\n\nmesh.N = 4\n", 3, 1),
            ("colour = red\n", 1, 1),
            ("grid.N = 512\n  grid.size = 3\n", 2, 3),
        ],
        ids=["missing_equals", "empty_key", "duplicate", "unknown_section", "unknown_key", "unknown_field"],
    )
    def test_position_reported(self, text, line, column):
        """GIVEN malformed text / WHEN parsed / THEN ConfigError at line, column"""
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert exc.value.line == line
        assert exc.value.column == column
        assert f"line {line}" in str(exc.value)

    def test_missing_value(self):
        with pytest.raises(ConfigError, match="missing value"):
            parse_config("grid.N =\n")

    def test_ill_typed_value(self):
        """GIVEN grid.N = many / WHEN parsed / THEN ConfigError naming grid.N at its line"""
        with pytest.raises(ConfigError) as exc:
            parse_config("seed = 3\ngrid.N = many\n")
        assert exc.value.line == 2
        assert "grid.N" in str(exc.value)

    @pytest.mark.parametrize("seed", ["-1", str(2**64)], ids=["negative", "too_large"])
    def test_seed_range(self, seed):
        with pytest.raises(ConfigError):
            parse_config(f"seed = {seed}\n")


class TestRoundTrip:
    """Test to_text and parse_config together."""

    def test_round_trip(self):
        """GIVEN a non-default config / WHEN to_text then parse / THEN equal"""
        config = parse_config(
            "seed = 18446744073709551615\n"
            "instance.name = inline\n"
            "instance.alpha = 0.7\n"
            "instance.sigma = 1.3\n"
            "grid.T = 0.1\n"
            "solver.grad_tol = 3.3e-07\n"
            "solver.precondition = false\n"
            "study.checks = Lw2\n"
        )
        assert parse_config(config.to_text()) == config

    def test_defaults_round_trip(self):
        config = ExperimentConfig()
        assert parse_config(config.to_text()) == config


class TestHelpers:
    """Test with_seed and solver_options."""

    def test_with_seed_override(self):
        config = parse_config("seed = 4\n")
        assert config.with_seed(None) is config
        assert config.with_seed(9).seed == 9
        assert config.seed == 4

    def test_solver_options_carry_seed(self):
        options = parse_config("seed = 5\nsolver.max_iters = 30\n").solver_options(epsilon=1e-6)
        assert options.seed == 5
        assert options.max_iters == 30
        assert options.epsilon == 1e-6


class TestLoadConfig:
    """Test load_config on files."""

    @pytest.mark.parametrize(
        "name", ["coercive_A.cfg", "noncoercive_B.cfg", "vector_C.cfg", "inline_double_power.cfg"]
    )
    def test_shipped_configs_parse(self, name):
        config = load_config(CONFIG_DIR / name)
        assert config.grid.N >= 1024

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(tmp_path / "absent.cfg")
