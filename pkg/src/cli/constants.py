"""Shared constants for CLI commands.

This module centralizes the labels, number formats and exit codes used
across the command modules.
"""

# Exit codes
EXIT_OK = 0
EXIT_CERTIFICATE_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_TRIVIAL = 3

# Defaults
DEFAULT_OUT_DIR = "out"
DEFAULT_FORMAT = "json"

# Common field labels
LABEL_INSTANCE = "Instance"
LABEL_GRID = "Grid"
LABEL_SEED = "Seed"
LABEL_OUTPUT = "Output"
LABEL_ENERGY = "I(u)"
LABEL_RESIDUAL = "Residual"
LABEL_NORM = "||u||_X"

# Number formats
FORMAT_VALUE = "{:.6e}"
FORMAT_SHORT = "{:.3e}"

# Common error messages
ERROR_UNEXPECTED = "Unexpected error: {e}"
ERROR_CONFIG = "Invalid config: {e}"
