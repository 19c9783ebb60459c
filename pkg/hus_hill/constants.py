"""
Constants for stability analysis, tracking and the command-line interface
"""

# Tolerances
UNIT_MODULUS_TOL = 1e-9  # ||e(nh)| - 1| at or below this is treated as unit modulus
ZERO_FACTOR_TOL = 1e-12  # |1 + h*lambda_k| at or below this is a zero factor
OVERFLOW_LIMIT = 1e300  # simulations abort past this magnitude
TRACKING_SLACK = 1e-6  # relative slack allowed on certified bounds
REMAINDER_FRACTION = 1e-3  # expanding-case tail must stay below this share of K*eps
TERNARY_WIDTH = 1e-12  # bracket width at which the oracle's ternary search stops
RESIDUAL_TOL = 1e-10  # relative residual accepted for an exact trajectory

# Default values
DEFAULT_WINDOW_PERIODS = 64  # window length M = 64 * n steps
DEFAULT_EPSILON = 1e-3
DEFAULT_SEED = 0
DEFAULT_PROFILE = "random_uniform"
DEFAULT_FAMILY = "Hill"
DEFAULT_ORACLE_BUDGET = 2**16
DEFAULT_ORACLE_PERIODS = 4  # oracle horizon = 4 * n when not given
DEFAULT_MAX_WORKERS = 8

# Environment
THREADS_ENV = "HUS_HILL_THREADS"

# Output
SIG_DIGITS = 17
OUTPUT_JSON = "json"
OUTPUT_CSV = "csv"

# Exit codes (stable contract for scripting)
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NOT_STABLE = 3
EXIT_DEGENERATE = 4
EXIT_INCONCLUSIVE = 5
EXIT_INTERRUPTED = 130
