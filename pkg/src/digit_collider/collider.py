"""Enumeration and construction of binary/ternary digit-sum collisions."""

import logging
import math
import random
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, NamedTuple, Optional, TextIO, Union

import numpy as np

from .config import Params
from .const import (
    CHECKPOINT_INTERVAL,
    CHUNK_SIZE,
    DEFAULT_FORGE_BUDGET,
    DEFAULT_SEED,
    DRIFT_CONSTANT,
)
from .constructor import ShiftFamily, build_family, make_progression
from .digits import digit_sum, digit_sum_array, digits_of, f_value, from_digits
from .errors import (
    BFileError,
    ConstructionError,
    InvalidBaseError,
    InvalidInputError,
    SearchFailureError,
)
from .parallel import chunk_ranges, ordered_map

_LOGGER = logging.getLogger(__name__)

DEFAULT_BASES = (2, 3)

# Largest value the vectorized counter handles in uint64 arithmetic
_VECTOR_LIMIT = 1 << 62


class CollisionKind(str, Enum):
    EXACT = "exact"
    """Equal digit sums."""

    ALMOST = "almost"
    """First digit sum minus second in {0, 1}."""


@dataclass(frozen=True)
class CollisionRecord:
    """A number together with its digit sums in the two bases."""

    n: int
    s2: int
    """Digit sum in the first base (binary by default)."""

    s3: int
    """Digit sum in the second base (ternary by default)."""

    kind: CollisionKind = CollisionKind.EXACT

    def to_dict(self) -> dict[str, Any]:
        return {"n": str(self.n), "s2": self.s2, "s3": self.s3, "kind": self.kind.value}


@dataclass(frozen=True)
class Certificate:
    """A forged collision with the arithmetic that produced it."""

    record: CollisionRecord
    family: ShiftFamily
    k: int
    j: int
    used_plus_one: bool
    modulus: int
    """2^nu 3^(beta + zeta) of the progression k was drawn from."""

    draws: int = 0

    def replay(self) -> int:
        """L + modulus * k + d_j (+ 1)."""
        n = self.family.L + (self.modulus * self.k) + self.family.d[self.j]
        return n + 1 if self.used_plus_one else n

    def verify(self) -> bool:
        n = self.record.n
        if self.replay() != n:
            return False

        if self.used_plus_one and ((n - 1) % 12 != 9):
            return False

        return digit_sum(n, 2) == digit_sum(n, 3) == self.record.s2 == self.record.s3

    def to_dict(self) -> dict[str, Any]:
        return {
            "record": self.record.to_dict(),
            "bits": self.record.n.bit_length(),
            "k": str(self.k),
            "j": self.j,
            "used_plus_one": self.used_plus_one,
            "L": str(self.family.L),
            "modulus": str(self.modulus),
            "d_j": str(self.family.d[self.j]),
            "params": self.family.params.to_dict(),
            "draws": self.draws,
        }


# -----------------------------------------------------------------------------


class DigitCounter:
    """Little-endian digits of a running counter with their sum."""

    def __init__(self, base: int, start: int = 0) -> None:
        self.base = base
        self.digits = list(digits_of(start, base).digits)
        self.total = sum(self.digits)

    @property
    def value(self) -> int:
        return from_digits(self.digits, self.base)

    def increment(self) -> None:
        digits = self.digits
        top = self.base - 1
        i = 0
        while i < len(digits):
            if digits[i] < top:
                digits[i] += 1
                self.total += 1
                return

            # Carry
            digits[i] = 0
            self.total -= top
            i += 1

        digits.append(1)
        self.total += 1


class _ScanTask(NamedTuple):
    start: int
    stop: int
    kind: CollisionKind
    bases: tuple[int, int]
    verify: bool


def _matches(kind: CollisionKind, difference: int) -> bool:
    if kind == CollisionKind.EXACT:
        return difference == 0

    return 0 <= difference <= 1


def _scan_chunk(task: _ScanTask) -> list[tuple[int, int, int]]:
    """(n, first sum, second sum) for matching n in [start, stop)."""
    first = DigitCounter(task.bases[0], task.start)
    second = DigitCounter(task.bases[1], task.start)
    found: list[tuple[int, int, int]] = []

    for n in range(task.start, task.stop):
        if task.verify and ((n - task.start) % CHECKPOINT_INTERVAL == 0):
            if (first.total != digit_sum(n, first.base)) or (
                second.total != digit_sum(n, second.base)
            ):
                raise ConstructionError(f"Digit counters out of sync at n={n}")

        if _matches(task.kind, first.total - second.total):
            found.append((n, first.total, second.total))

        first.increment()
        second.increment()

    return found


def _count_chunk(task: _ScanTask) -> int:
    """Number of matching n in [start, stop)."""
    if task.stop > _VECTOR_LIMIT:
        return len(_scan_chunk(task))

    values = np.arange(task.start, task.stop, dtype=np.uint64)
    difference = digit_sum_array(values, task.bases[0]) - digit_sum_array(
        values, task.bases[1]
    )
    if task.kind == CollisionKind.EXACT:
        return int(np.count_nonzero(difference == 0))

    return int(np.count_nonzero((difference == 0) | (difference == 1)))


def _check_bases(bases: Sequence[int]) -> tuple[int, int]:
    if len(bases) != 2:
        raise InvalidInputError(f"Expected two bases (got {list(bases)})")

    first, second = (int(b) for b in bases)
    if min(first, second) < 2:
        raise InvalidBaseError(f"Bases must be at least 2 (got {first}, {second})")

    if first == second:
        raise InvalidInputError("Bases must differ")

    return (first, second)


def enumerate_collisions(
    N: int,
    kind: Union[str, CollisionKind] = CollisionKind.EXACT,
    threads: int = 1,
    bases: Sequence[int] = DEFAULT_BASES,
    verify: bool = False,
    chunk_size: int = CHUNK_SIZE,
) -> Iterator[CollisionRecord]:
    """
    All n < N whose digit sums collide, in increasing order.

    :param N: Exclusive upper limit (at least 1).
    :param kind: exact or almost.
    :param threads: Worker processes (output does not depend on it).
    :param bases: The two bases to compare.
    :param verify: Re-check the incremental counters periodically.
    :param chunk_size: Numbers per chunk.
    :return: Iterator of records.
    """
    if N < 1:
        raise InvalidInputError(f"N must be at least 1 (got {N})")

    kind = CollisionKind(kind)
    pair = _check_bases(bases)
    tasks = [
        _ScanTask(lo, hi, kind, pair, verify)
        for lo, hi in chunk_ranges(0, N, chunk_size)
    ]

    def records() -> Iterator[CollisionRecord]:
        for found in ordered_map(_scan_chunk, tasks, threads):
            for n, first_sum, second_sum in found:
                yield CollisionRecord(n, first_sum, second_sum, kind)

    return records()


def find_patterns(
    N: int, window: int, offsets: Iterable[int], threads: int = 1
) -> list[int]:
    """All n < N where {v < window : f(n + v) = 0} is exactly offsets."""
    offsets = set(offsets)
    if window < 1:
        raise InvalidInputError(f"window must be at least 1 (got {window})")

    if not all(0 <= v < window for v in offsets):
        raise InvalidInputError(f"offsets must lie in [0, {window})")

    if N < 1:
        return []

    target = sum(1 << v for v in offsets)
    full = (1 << window) - 1

    collisions = {
        record.n for record in enumerate_collisions(N + window - 1, threads=threads)
    }

    # Bit v of mask is set when n + v is a collision
    mask = sum(1 << v for v in range(window) if v in collisions)
    found: list[int] = []
    for n in range(N):
        if mask == target:
            found.append(n)

        mask >>= 1
        if (n + window) in collisions:
            mask |= 1 << (window - 1)

        mask &= full

    return found


def count_collisions(
    N: int,
    checkpoints: Sequence[int],
    threads: int = 1,
    bases: Sequence[int] = DEFAULT_BASES,
) -> list[tuple[int, int]]:
    """Exact counts #{n < N_i : collision} for each checkpoint, in one pass."""
    checkpoints = [int(c) for c in checkpoints]
    if any(b < a for a, b in zip(checkpoints, checkpoints[1:])):
        raise InvalidInputError("Checkpoints must be increasing")

    if checkpoints and ((checkpoints[0] < 0) or (checkpoints[-1] > N)):
        raise InvalidInputError(f"Checkpoints must lie in [0, {N}]")

    if not checkpoints:
        return []

    pair = _check_bases(bases)
    ranges = chunk_ranges(0, checkpoints[-1], CHUNK_SIZE, boundaries=checkpoints)
    tasks = [_ScanTask(lo, hi, CollisionKind.EXACT, pair, False) for lo, hi in ranges]

    counts: list[tuple[int, int]] = []
    total = 0
    pending = iter(checkpoints)
    checkpoint = next(pending, None)
    for (_lo, hi), chunk_count in zip(
        [(0, 0)] + ranges, [0] + list(ordered_map(_count_chunk, tasks, threads))
    ):
        total += chunk_count
        while (checkpoint is not None) and (checkpoint <= hi):
            counts.append((checkpoint, total))
            checkpoint = next(pending, None)

    _LOGGER.debug("Counted collisions: %s", counts)

    return counts


def collision_levels(
    N: int, threads: int = 1, bases: Sequence[int] = DEFAULT_BASES
) -> dict[int, int]:
    """Number of collisions below N at each common digit sum."""
    levels = Counter(
        record.s2 for record in enumerate_collisions(N, threads=threads, bases=bases)
    )
    return dict(sorted(levels.items()))


# -----------------------------------------------------------------------------


def estimated_hit_rate(mean: float, std: float, m: int, J: int) -> float:
    """Gaussian estimate of P(f(n) = -j m for some |j| <= J)."""
    if std <= 0:
        return float(any(abs(mean + (j * m)) < 0.5 for j in range(-J, J + 1)))

    scale = 1 / (std * math.sqrt(2 * math.pi))
    return sum(
        scale * math.exp(-(((-j * m) - mean) ** 2) / (2 * std * std))
        for j in range(-J, J + 1)
    )


def forge_collision(
    family_or_params: Union[ShiftFamily, Params],
    N: int,
    budget: int = DEFAULT_FORGE_BUDGET,
    seed: int = DEFAULT_SEED,
    zeta: Optional[int] = None,
) -> Certificate:
    """
    Find a collision in [N, 2N + d_J + 1] by sampling the family's progression.

    A sampled member n with f(n) = -j m becomes n + d_j with f = xi_j, and
    n + d_j + 1 when xi_j = 1 (n + d_j is 9 mod 12, so only s3 grows).

    :param family_or_params: Constructed family, or parameters to build one.
    :param N: Interval start.
    :param budget: Number of draws.
    :param seed: Seed for construction and sampling.
    :param zeta: Rarefaction exponent (chosen automatically if None).
    :return: Verified certificate.
    """
    if isinstance(family_or_params, Params):
        family = build_family(family_or_params, seed=seed)
    else:
        family = family_or_params

    params = family.params
    spec = make_progression(family, N, zeta=zeta)
    rng = random.Random(seed)

    inside = 0
    total = 0.0
    total_squares = 0.0
    closest: Optional[int] = None
    for draw in range(1, budget + 1):
        k = spec.sample_k(rng)
        n = spec.member(k)
        value = f_value(n)

        total += value
        total_squares += value * value
        if abs(value) <= params.J * params.m:
            inside += 1

        if (closest is None) or (abs(value) < abs(closest)):
            closest = value

        if (value % params.m != 0) or (abs(value) > params.J * params.m):
            continue

        j = -value // params.m
        shifted = n + family.d[j]
        if f_value(shifted) != family.xi[j]:
            raise ConstructionError(f"Shift d_{j} did not correct f at k={k}")

        used_plus_one = family.xi[j] == 1
        collision = shifted + 1 if used_plus_one else shifted
        s2 = digit_sum(collision, 2)
        s3 = digit_sum(collision, 3)

        certificate = Certificate(
            record=CollisionRecord(collision, s2, s3, CollisionKind.EXACT),
            family=family,
            k=k,
            j=j,
            used_plus_one=used_plus_one,
            modulus=spec.modulus,
            draws=draw,
        )
        if not certificate.verify():
            raise ConstructionError(f"Forged number fails verification at k={k}")

        _LOGGER.info(
            "Forged a %s-bit collision after %s draw(s)", collision.bit_length(), draw
        )
        return certificate

    mean = total / budget if budget else 0.0
    variance = max(0.0, (total_squares / budget) - (mean * mean)) if budget else 0.0
    raise SearchFailureError(
        f"No collision within {budget} draw(s)",
        best_candidate=closest,
        statistics={
            "draws": budget,
            "inside": inside,
            "mean_f": mean,
            "std_f": math.sqrt(variance),
            "estimated_hit_rate": estimated_hit_rate(
                mean, math.sqrt(variance), params.m, params.J
            ),
            "drift_heuristic": DRIFT_CONSTANT * math.log(N),
        },
    )


# -----------------------------------------------------------------------------


class BFileComparison(NamedTuple):
    checked: int
    matches: bool
    first_mismatch: Optional[tuple[int, int, Optional[int]]]
    """(index, expected, observed) of the first differing term."""


def read_bfile(source: Union[str, Path, TextIO]) -> list[tuple[int, int]]:
    """(index, value) pairs of a b-file, skipping blank and comment lines."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as bfile:
            return read_bfile(bfile)

    entries: list[tuple[int, int]] = []
    for line_number, line in enumerate(source, start=1):
        line = line.strip()
        if (not line) or line.startswith("#"):
            continue

        parts = line.split()
        if len(parts) != 2:
            raise BFileError(f"Line {line_number}: expected 'index value': {line!r}")

        try:
            index, value = int(parts[0]), int(parts[1])
        except ValueError as err:
            raise BFileError(f"Line {line_number}: not integers: {line!r}") from err

        if entries and (index != entries[-1][0] + 1):
            raise BFileError(f"Line {line_number}: index {index} out of sequence")

        entries.append((index, value))

    return entries


def write_bfile(values: Iterable[int], target: TextIO, offset: int = 1) -> int:
    """Write values as 'index value' lines; returns the number of lines."""
    count = 0
    for index, value in enumerate(values, start=offset):
        print(index, value, file=target)
        count += 1

    return count


def compare_bfile(
    source: Union[str, Path, TextIO], threads: int = 1
) -> BFileComparison:
    """Compare a b-file of exact collisions with a fresh enumeration."""
    entries = read_bfile(source)
    if not entries:
        return BFileComparison(checked=0, matches=True, first_mismatch=None)

    limit = max(value for _index, value in entries) + 1
    observed = enumerate_collisions(limit, threads=threads)

    checked = 0
    for index, expected in entries:
        record = next(observed, None)
        actual = None if record is None else record.n
        if actual != expected:
            return BFileComparison(
                checked=checked, matches=False, first_mismatch=(index, expected, actual)
            )

        checked += 1

    return BFileComparison(checked=checked, matches=True, first_mismatch=None)
