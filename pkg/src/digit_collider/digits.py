"""Digit-sum kernels in arbitrary bases."""

import logging
import math
import operator
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import gmpy2
import numpy as np
import sympy

from .errors import InvalidBaseError, InvalidInputError, RangeError

_LOGGER = logging.getLogger(__name__)

_ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"

# Largest base gmpy2 converts with the alphabet above
_MAX_TEXT_BASE = len(_ALPHABET)


def _check_base(base: int) -> int:
    base = operator.index(base)
    if base < 2:
        raise InvalidBaseError(f"Base must be at least 2 (got {base})")

    return base


def _check_nat(n: int) -> int:
    n = operator.index(n)
    if n < 0:
        raise InvalidInputError(f"Expected a nonnegative integer (got {n})")

    return n


def _split_digits(n: int, base: int) -> list[int]:
    """Little-endian digits by divide-and-conquer splitting on base^(2^i)."""
    if n < base:
        return [n] if n else []

    powers = [gmpy2.mpz(base)]
    while powers[-1] * powers[-1] <= n:
        powers.append(powers[-1] * powers[-1])

    def inner(x: gmpy2.mpz, level: int, pad: bool) -> list[int]:
        if level < 0:
            return [int(x)]

        hi, lo = gmpy2.f_divmod(x, powers[level])
        digits = inner(lo, level - 1, True)
        if pad or hi:
            digits.extend(inner(hi, level - 1, pad))

        return digits

    digits = inner(gmpy2.mpz(n), len(powers) - 1, False)
    while digits and (digits[-1] == 0):
        digits.pop()

    return digits


# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class DigitString:
    """Digits of a natural number, least significant first."""

    base: int
    digits: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        _check_base(self.base)
        if self.digits and (self.digits[-1] == 0):
            raise InvalidInputError("Most significant digit must not be zero")

        for digit in self.digits:
            if not 0 <= digit < self.base:
                raise InvalidInputError(
                    f"Digit {digit} out of range for base {self.base}"
                )

    @property
    def value(self) -> int:
        return from_digits(self.digits, self.base)

    @property
    def digit_sum(self) -> int:
        return sum(self.digits)

    def text(self) -> str:
        """Digits written most significant first, without separators."""
        if self.base > _MAX_TEXT_BASE:
            raise RangeError(f"No text form for base {self.base}")

        if not self.digits:
            return "0"

        return "".join(_ALPHABET[d] for d in reversed(self.digits))

    @staticmethod
    def from_text(text: str, base: int) -> "DigitString":
        base = _check_base(base)
        if base > _MAX_TEXT_BASE:
            raise RangeError(f"No text form for base {base}")

        try:
            value = int(gmpy2.mpz(text.strip(), base))
        except ValueError as err:
            raise InvalidInputError(
                f"Not a base-{base} numeral: {text!r}"
            ) from err

        return digits_of(value, base)


def digits_of(n: int, base: int) -> DigitString:
    """Little-endian digit string of n."""
    n = _check_nat(n)
    base = _check_base(base)

    if base <= _MAX_TEXT_BASE:
        if n == 0:
            return DigitString(base)

        text = gmpy2.mpz(n).digits(base)
        return DigitString(base, tuple(_ALPHABET.index(c) for c in reversed(text)))

    return DigitString(base, tuple(_split_digits(n, base)))


def from_digits(digits: Sequence[int], base: int) -> int:
    """Value of little-endian digits (trailing zeros allowed)."""
    base = _check_base(base)
    for digit in digits:
        if not 0 <= digit < base:
            raise InvalidInputError(f"Digit {digit} out of range for base {base}")

    if base <= _MAX_TEXT_BASE:
        text = "".join(_ALPHABET[d] for d in reversed(digits)).lstrip("0")
        return int(gmpy2.mpz(text, base)) if text else 0

    value = 0
    for digit in reversed(digits):
        value = (value * base) + digit

    return value


# -----------------------------------------------------------------------------


def digit_sum(n: int, base: int) -> int:
    """
    Sum of the base-b digits of n.

    Base 2 is a population count. Bases up to 36 count characters of the GMP
    numeral, larger bases split by repeated squaring of the base.

    :param n: Nonnegative integer.
    :param base: Base >= 2.
    :return: Digit sum.
    """
    base = _check_base(base)
    n = _check_nat(n)

    if base == 2:
        return int(gmpy2.popcount(n))

    if n < base:
        return n

    if base <= _MAX_TEXT_BASE:
        text = gmpy2.mpz(n).digits(base)
        return sum(
            value * text.count(char)
            for value, char in enumerate(_ALPHABET[1:base], start=1)
        )

    return sum(_split_digits(n, base))


def digit_sum_trunc(n: int, base: int, L: int) -> int:
    """Digit sum of n mod base^L."""
    base = _check_base(base)
    n = _check_nat(n)
    L = _check_nat(L)

    if base == 2:
        return int(gmpy2.popcount(n & ((1 << L) - 1)))

    return digit_sum(n % (base**L), base)


def f_value(n: int) -> int:
    """s2(n) - s3(n), zero exactly on collisions."""
    return digit_sum(n, 2) - digit_sum(n, 3)


def digit_sum_array(values: np.ndarray, base: int) -> np.ndarray:
    """Vectorized digit sums of a nonnegative integer array."""
    base = _check_base(base)
    values = np.asarray(values, dtype=np.uint64)

    if base == 2:
        return np.bitwise_count(values).astype(np.int64)

    sums = np.zeros(values.shape, dtype=np.int64)
    remaining = values.copy()
    while remaining.any():
        remaining, digits = np.divmod(remaining, np.uint64(base))
        sums += digits.astype(np.int64)

    return sums


def count_blocks(n: int) -> tuple[int, int]:
    """
    Count maximal runs of ones in binary and ones in base 4.

    :param n: Nonnegative integer.
    :return: (one_blocks, base4_ones)
    """
    n = _check_nat(n)
    if n == 0:
        return (0, 0)

    # Bits that are 1 with a 0 (or nothing) below them start a block
    one_blocks = int(gmpy2.popcount(n & ~(n << 1)))
    base4_ones = gmpy2.mpz(n).digits(4).count("1")

    return (one_blocks, base4_ones)


# -----------------------------------------------------------------------------


class BinomialValuations(NamedTuple):
    v2: int
    """Carries when adding n + n in base 2."""

    v3_twice: int
    """Twice the carries when adding n + n in base 3."""

    identities_hold: bool


def addition_carries(x: int, y: int, base: int) -> int:
    """Number of carries when adding x + y in the given base."""
    base = _check_base(base)
    x_digits = digits_of(x, base).digits
    y_digits = digits_of(y, base).digits

    carries = 0
    carry = 0
    for i in range(max(len(x_digits), len(y_digits))):
        column = carry
        if i < len(x_digits):
            column += x_digits[i]

        if i < len(y_digits):
            column += y_digits[i]

        carry = 1 if column >= base else 0
        carries += carry

    return carries


def binomial_valuation_check(n: int) -> BinomialValuations:
    """
    Carry counts of n + n in bases 2 and 3, checked against digit sums.

    By Kummer the carry counts are the 2- and 3-adic valuations of
    binom(2n, n).
    """
    n = _check_nat(n)
    if n < 1:
        raise InvalidInputError("n must be at least 1")

    v2 = addition_carries(n, n, 2)
    v3_twice = 2 * addition_carries(n, n, 3)
    identities_hold = (v2 == digit_sum(n, 2)) and (
        v3_twice == (2 * digit_sum(n, 3)) - digit_sum(2 * n, 3)
    )

    return BinomialValuations(v2, v3_twice, identities_hold)


def central_binomial_valuations(n: int) -> tuple[int, int]:
    """2- and 3-adic valuations of binom(2n, n) from the coefficient itself."""
    n = _check_nat(n)
    coefficient = math.comb(2 * n, n)

    return (
        int(sympy.multiplicity(2, coefficient)),
        int(sympy.multiplicity(3, coefficient)),
    )


@dataclass
class CarryCheckReport:
    """Checks 9 | binom(2^(k+1), 2^k) for k in [k_lo, k_hi)."""

    k_lo: int
    k_hi: int
    violations: list[int] = field(default_factory=list)
    """Exponents k with fewer than two ternary carries."""

    @property
    def holds(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "k_lo": self.k_lo,
            "k_hi": self.k_hi,
            "violations": self.violations,
            "holds": self.holds,
        }


def power_of_two_carry_check(k_lo: int, k_hi: int) -> CarryCheckReport:
    """Find k where s3(2^k) - s3(2^(k+1))/2 < 2."""
    k_lo = _check_nat(k_lo)
    k_hi = _check_nat(k_hi)

    report = CarryCheckReport(k_lo=k_lo, k_hi=k_hi)
    previous = digit_sum(1 << k_lo, 3)
    for k in range(k_lo, k_hi):
        current = digit_sum(1 << (k + 1), 3)

        # Twice the number of ternary carries in 2^k + 2^k
        if (2 * previous) - current < 4:
            report.violations.append(k)

        previous = current

    if report.violations:
        _LOGGER.debug("Carry check violations: %s", report.violations)

    return report
