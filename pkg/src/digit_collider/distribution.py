"""Distribution of truncated binary digit-sum differences."""

import cmath
import logging
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, NamedTuple, Optional, TypeVar

import numpy as np

from .const import BRUTEFORCE_MAX_L, CHUNK_SIZE, FLOAT_TOLERANCE, M2_SWEEP_MAX_NU
from .digits import count_blocks
from .errors import (
    ConstructionError,
    InvalidInputError,
    PreconditionError,
    ResourceLimitError,
)

_LOGGER = logging.getLogger(__name__)

_T = TypeVar("_T")

RECURRENCE = "recurrence"
BRUTEFORCE = "bruteforce"
DIRECT = "direct"


@dataclass(frozen=True)
class DistTable:
    """Counts of s2^(L)(n + t) - s2^(L)(n) over 0 <= n < 2^L."""

    t: int
    L: int
    counts: dict[int, int] = field(default_factory=dict)
    """j -> number of n with difference j (zero counts omitted)."""

    def __post_init__(self) -> None:
        total = sum(self.counts.values())
        if total != (1 << self.L):
            raise ConstructionError(f"Total mass {total} != 2^{self.L}")

        first_moment = sum(j * c for j, c in self.counts.items())
        if first_moment != 0:
            raise ConstructionError(f"First moment {first_moment} != 0")

    def phi(self, j: int) -> Fraction:
        """Probability of difference j."""
        return Fraction(self.counts.get(j, 0), 1 << self.L)

    def second_moment(self) -> Fraction:
        return Fraction(sum(j * j * c for j, c in self.counts.items()), 1 << self.L)

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": str(self.t),
            "L": self.L,
            "counts": {str(j): str(c) for j, c in sorted(self.counts.items())},
        }


class MomentPair(NamedTuple):
    m1: Fraction
    m2: Fraction


class OmegaBoundCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


@dataclass
class M2BoundReport:
    """Exhaustive check of m2(t, nu) <= 2 nu over 1 <= t < 2^nu."""

    nu: int
    max_m2: Fraction
    witness: int
    holds: bool

    max_block_ratio: float = 0.0
    """Largest m2(t, nu) / one_blocks(t)."""

    block_ratio_witness: int = 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "nu": self.nu,
            "max_m2": str(self.max_m2),
            "witness": self.witness,
            "holds": self.holds,
            "max_block_ratio": self.max_block_ratio,
            "block_ratio_witness": self.block_ratio_witness,
        }


# -----------------------------------------------------------------------------


def _reduce(t: int, L: int) -> tuple[int, int]:
    t = operator.index(t)
    L = operator.index(L)
    if (t < 0) or (L < 0):
        raise InvalidInputError(f"t and L must be nonnegative (got t={t}, L={L})")

    # phi and its relatives only see t mod 2^L
    return (t & ((1 << L) - 1), L)


def _ladder(
    t: int,
    L: int,
    zero: Callable[[int], _T],
    even: Callable[[_T, int], _T],
    odd: Callable[[_T, _T, int], _T],
    one: Optional[Callable[[int], _T]] = None,
) -> _T:
    """
    Evaluate a digit recurrence for t < 2^L from level 0 upward.

    Level l only needs the values at (t >> (L - l)) and its successor, so each
    level holds two entries keyed by residue mod 2^l.

    :param zero: Value at t = 0 for a level.
    :param even: Value at 2u from the value at u (one level down).
    :param odd: Value at 2u + 1 from the values at u and u + 1.
    :param one: Closed form at t = 1, if known.
    """
    values: dict[int, _T] = {0: zero(0)}
    for level in range(1, L + 1):
        mask = (1 << level) - 1
        below = (1 << (level - 1)) - 1
        x = t >> (L - level)

        level_values: dict[int, _T] = {}
        for u in (x, x + 1):
            r = u & mask
            if r in level_values:
                continue

            if r == 0:
                level_values[r] = zero(level)
            elif (r == 1) and (one is not None):
                level_values[r] = one(level)
            elif (r % 2) == 0:
                level_values[r] = even(values[(r >> 1) & below], level)
            else:
                level_values[r] = odd(
                    values[(r >> 1) & below], values[((r >> 1) + 1) & below], level
                )

        values = level_values

    return values[t]


def _closed_form_one(level: int) -> dict[int, int]:
    """Counts for t = 1: 2^(L+j-2) for -L+2 <= j <= 1, one at j = -L."""
    counts = {j: 1 << (level + j - 2) for j in range(2 - level, 2)}
    counts[-level] = counts.get(-level, 0) + 1
    return counts


def _phi_recurrence(t: int, L: int) -> dict[int, int]:
    def zero(level: int) -> dict[int, int]:
        return {0: 1 << level}

    def even(half: dict[int, int], _level: int) -> dict[int, int]:
        return {j: 2 * c for j, c in half.items()}

    def odd(lo: dict[int, int], hi: dict[int, int], _level: int) -> dict[int, int]:
        counts: dict[int, int] = {}
        for j, c in lo.items():
            counts[j + 1] = counts.get(j + 1, 0) + c

        for j, c in hi.items():
            counts[j - 1] = counts.get(j - 1, 0) + c

        return counts

    return _ladder(t, L, zero, even, odd, one=_closed_form_one)


def _phi_bruteforce(t: int, L: int) -> dict[int, int]:
    if L > BRUTEFORCE_MAX_L:
        raise ResourceLimitError(
            f"Brute force needs 2^{L} evaluations (limit L <= {BRUTEFORCE_MAX_L})"
        )

    size = 1 << L
    mask = np.uint64(size - 1)
    shift = np.uint64(t)
    histogram = np.zeros(2 * L + 1, dtype=np.int64)
    for start in range(0, size, CHUNK_SIZE):
        n = np.arange(start, min(size, start + CHUNK_SIZE), dtype=np.uint64)
        shifted = np.bitwise_count((n + shift) & mask).astype(np.int64)
        diff = shifted - np.bitwise_count(n).astype(np.int64)
        histogram += np.bincount(diff + L, minlength=2 * L + 1)

    return {j - L: int(c) for j, c in enumerate(histogram) if c > 0}


def phi_table(t: int, L: int, mode: str = RECURRENCE) -> DistTable:
    """
    Distribution of s2^(L)(n + t) - s2^(L)(n) over n < 2^L as exact counts.

    :param t: Shift (only t mod 2^L matters).
    :param L: Truncation length.
    :param mode: "recurrence" or "bruteforce".
    :return: Table with counts[j] / 2^L = phi(j, t, L).
    """
    t, L = _reduce(t, L)
    if mode == RECURRENCE:
        counts = _phi_recurrence(t, L)
    elif mode == BRUTEFORCE:
        counts = _phi_bruteforce(t, L)
    else:
        raise InvalidInputError(f"Unknown mode: {mode}")

    return DistTable(t=t, L=L, counts={j: c for j, c in counts.items() if c})


# -----------------------------------------------------------------------------


def _e(x: float) -> complex:
    return cmath.exp(2j * cmath.pi * x)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta < 1.0:
        raise PreconditionError(f"theta must be in [0, 1) (got {theta})")

    return theta


def omega(t: int, theta: float, L: int, mode: str = RECURRENCE) -> complex:
    """Characteristic function sum_j phi(j, t, L) e(j theta)."""
    theta = _check_theta(theta)
    t, L = _reduce(t, L)

    if mode == DIRECT:
        table = phi_table(t, L)
        return sum(
            ((c / (1 << L)) * _e(j * theta) for j, c in table.counts.items()),
            complex(0.0),
        )

    if mode != RECURRENCE:
        raise InvalidInputError(f"Unknown mode: {mode}")

    up = _e(theta) / 2
    down = _e(-theta) / 2

    return _ladder(
        t,
        L,
        zero=lambda _level: complex(1.0),
        even=lambda half, _level: half,
        odd=lambda lo, hi, _level: (up * lo) + (down * hi),
    )


def moments(t: int, L: int) -> MomentPair:
    """First and second moments of phi(., t, L) as exact rationals."""
    t, L = _reduce(t, L)

    m2 = _ladder(
        t,
        L,
        zero=lambda _level: Fraction(0),
        even=lambda half, _level: half,
        odd=lambda lo, hi, _level: ((lo + hi) / 2) + 1,
        one=lambda level: 2 - Fraction(2, 1 << level),
    )

    return MomentPair(m1=Fraction(0), m2=m2)


def _m2_sweep(nu: int) -> np.ndarray:
    """2^nu * m2(t, nu) for 0 <= t <= 2^nu (the last entry is t = 0 again)."""
    scaled = np.zeros(2, dtype=np.int64)
    for level in range(nu):
        size = 1 << level
        next_scaled = np.zeros(2 * size + 1, dtype=np.int64)
        next_scaled[0::2] = 2 * scaled
        next_scaled[1::2] = scaled[:-1] + scaled[1:] + (1 << (level + 1))
        scaled = next_scaled

    return scaled


def check_m2_bound(nu: int) -> M2BoundReport:
    """Check m2(t, nu) <= 2 nu for every 1 <= t < 2^nu."""
    nu = operator.index(nu)
    if nu < 1:
        raise InvalidInputError(f"nu must be at least 1 (got {nu})")

    if nu > M2_SWEEP_MAX_NU:
        raise ResourceLimitError(
            f"Sweep over 2^{nu} shifts exceeds limit nu <= {M2_SWEEP_MAX_NU}"
        )

    size = 1 << nu
    scaled = _m2_sweep(nu)[1:size]
    t_values = np.arange(1, size, dtype=np.uint64)

    best = int(np.argmax(scaled))
    holds = bool(np.all(scaled <= 2 * nu * size))

    blocks = np.bitwise_count(t_values & ~(t_values << np.uint64(1))).astype(np.int64)
    ratios = scaled / (blocks * size)
    best_ratio = int(np.argmax(ratios))

    report = M2BoundReport(
        nu=nu,
        max_m2=Fraction(int(scaled[best]), size),
        witness=best + 1,
        holds=holds,
        max_block_ratio=float(ratios[best_ratio]),
        block_ratio_witness=best_ratio + 1,
    )
    _LOGGER.debug(report)

    return report


def distance_to_nearest_integer(theta: float) -> float:
    frac = theta % 1.0
    return min(frac, 1.0 - frac)


def check_omega_block_bound(t: int, theta: float, L: int) -> OmegaBoundCheck:
    """
    Check |omega_t(theta, L)| <= (1 - ||theta||^2 / 2)^B.

    B is the largest integer with 2B + 1 <= number of blocks of ones in t.
    """
    theta = _check_theta(theta)
    if t >= (1 << L):
        raise PreconditionError(f"t must be below 2^L (got t={t}, L={L})")

    lhs = abs(omega(t, theta, L))
    one_blocks, _base4_ones = count_blocks(t)
    B = max(0, (one_blocks - 1) // 2)
    norm = distance_to_nearest_integer(theta)
    rhs = (1.0 - (norm * norm) / 2) ** B

    return OmegaBoundCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs + FLOAT_TOLERANCE)
