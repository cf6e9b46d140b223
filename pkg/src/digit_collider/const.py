"""Constants"""

import math
from typing import Final

DEFAULT_SEED: Final = 20210517
"""Seed used when none is given (fixed so that runs are reproducible)."""

DEFAULT_THREADS: Final = 1
THREADS_ENV_VAR: Final = "COLLIDER_THREADS"

CHUNK_SIZE: Final = 1 << 20
"""Numbers per enumeration chunk."""

CHECKPOINT_INTERVAL: Final = 1 << 16
"""Steps between re-syncs of incremental digit counters in verify mode."""

DEFAULT_EPSILON: Final = 0.1
DEFAULT_CONCENTRATION_THRESHOLD: Final = 0.99

BRUTEFORCE_MAX_L: Final = 40
M2_SWEEP_MAX_NU: Final = 16
HOEFFDING_MAX_T: Final = 40
ORTHOGONALITY_MAX_LENGTH: Final = 10**6
GELFOND_MAX_N: Final = 10**9

FLOAT_TOLERANCE: Final = 1e-12

SAMPLE_STREAMS: Final = 8
"""Independent random streams a sampling run is split into."""

LOG3_OVER_LOG4: Final = math.log(3) / math.log(4)
"""Lower-bound exponent for the number of collisions below N (0.792...)."""

DRIFT_CONSTANT: Final = 1 / math.log(3) - 1 / math.log(4)
"""Expected s3(n) - s2(n) is about DRIFT_CONSTANT * log(n) (0.18889...)."""

# Ternary addition patterns for 4-digit blocks (most significant digit first).
# Adding 1111 changes the block's digit sum by the given amount, no carry out.
BLOCK_PLUS: Final = "0200"  # 0200 + 1111 = 2011
BLOCK_ZERO: Final = "0202"  # 0202 + 1111 = 2020
BLOCK_MINUS: Final = "0112"  # 0112 + 1111 = 2000
BLOCK_LENGTH: Final = 4

DEFAULT_ANCHOR_BUDGET: Final = 100_000
DEFAULT_FORGE_BUDGET: Final = 100_000
DEFAULT_DIFFERENCE_SAMPLES: Final = 1000

SELF_CHECK_SAMPLES: Final = 16
"""Random progression members checked before a family is returned."""

RANDOM_K_BITS: Final = 64
"""Bit size of the multipliers k drawn by the difference-property check."""

SAMPLING_EXTRA_BITS: Final = 64
"""Extra random bits when reducing into a huge interval (bias below 2^-64)."""

BINOMIAL_ORACLE_MAX_N: Final = 100_000
"""Largest n for which binom(2n, n) is computed exactly."""
