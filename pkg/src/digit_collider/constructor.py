"""Residue classes along which shifts change f by prescribed amounts."""

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional

from sympy.ntheory.modular import crt

from .config import Params, make_params
from .const import (
    BLOCK_LENGTH,
    BLOCK_MINUS,
    BLOCK_PLUS,
    BLOCK_ZERO,
    DEFAULT_ANCHOR_BUDGET,
    DEFAULT_DIFFERENCE_SAMPLES,
    DEFAULT_SEED,
    RANDOM_K_BITS,
    SAMPLING_EXTRA_BITS,
    SELF_CHECK_SAMPLES,
)
from .digits import digit_sum, digit_sum_trunc, f_value
from .errors import (
    ConstructionError,
    EmptyIntervalError,
    InvalidInputError,
    ParametersTooSmallError,
    RangeError,
    SearchFailureError,
)

_LOGGER = logging.getLogger(__name__)

__all__ = [
    "AnchorResult",
    "DifferenceReport",
    "Params",
    "ProgressionSpec",
    "ShiftFamily",
    "assemble_blocks",
    "build_family",
    "build_shifts",
    "build_ternary_key",
    "choose_zeta",
    "default_deviation_bound",
    "find_anchor",
    "intersect_classes",
    "make_params",
    "make_progression",
    "rarefaction_constant",
    "verify_difference_property",
]


class AnchorResult(NamedTuple):
    a: int
    delta: dict[int, int]


@dataclass(frozen=True)
class ShiftFamily:
    """Shifts d_j and the class L + 2^nu 3^beta N they act on."""

    params: Params

    d: dict[int, int]
    """j -> shift d_j, ternary 1...10 with (j + 1 + J) * eta ones."""

    a: int
    """Binary anchor (1 mod 4, below 2^(nu - 1))."""

    delta: dict[int, int]
    """j -> s2(a + d_j) - s2(a)."""

    xi: dict[int, int]
    """j -> parity correction in {0, 1}."""

    K: int
    """Ternary key (0 mod 3, below 3^beta)."""

    L: int
    """Class representative modulo 2^nu 3^beta."""

    @property
    def indices(self) -> range:
        return range(-self.params.J, self.params.J + 1)

    @property
    def modulus(self) -> int:
        return self.params.modulus

    def expected_difference(self, j: int) -> int:
        """f(n + d_j) - f(n) for every n in the class."""
        return (j * self.params.m) + self.xi[j]

    def validate(self) -> None:
        """Raise ConstructionError unless every stored invariant holds."""
        params = self.params
        half = 1 << (params.nu - 1)
        problems: list[str] = []

        for j in self.indices:
            d_j = self.d[j]
            if d_j != _shift(j, params):
                problems.append(f"d_{j} is not the ternary repunit shift")

            if d_j % 12 != 0:
                problems.append(f"d_{j} is not divisible by 12")

            if d_j >= half:
                problems.append(f"d_{j} >= 2^(nu - 1)")

            expected_delta = digit_sum_trunc(self.a + d_j, 2, params.nu) - (
                digit_sum_trunc(self.a, 2, params.nu)
            )
            if self.delta[j] != expected_delta:
                problems.append(f"delta_{j} does not match the anchor")

            if self.xi[j] not in (0, 1):
                problems.append(f"xi_{j} is not a bit")

            ternary = digit_sum(self.K + d_j, 3) - digit_sum(self.K, 3)
            if ternary != (-j * params.m) + self.delta[j] - self.xi[j]:
                problems.append(f"ternary difference for j={j} is wrong")

        if (self.a % 4 != 1) or not (0 <= self.a < half):
            problems.append("anchor is not 1 mod 4 below 2^(nu - 1)")

        if (self.K % 3 != 0) or not (0 <= self.K < 3**params.beta):
            problems.append("key is not 0 mod 3 below 3^beta")

        if not 0 <= self.L < self.modulus:
            problems.append("L is not reduced")

        if (self.L % (1 << params.nu) != self.a) or (
            self.L % 3**params.beta != self.K
        ):
            problems.append("L does not lie in both classes")

        if self.L % 12 != 9:
            problems.append("L is not 9 mod 12")

        if problems:
            raise ConstructionError("; ".join(problems))

    @staticmethod
    def from_dict(family_dict: dict[str, Any]) -> "ShiftFamily":
        """Load a family from a dictionary (as written by to_dict)."""

        def by_index(values: dict[str, Any]) -> dict[int, int]:
            return {int(j): int(v) for j, v in values.items()}

        return ShiftFamily(
            params=Params.from_dict(family_dict["params"]),
            d=by_index(family_dict["d"]),
            a=int(family_dict["a"]),
            delta=by_index(family_dict["delta"]),
            xi=by_index(family_dict["xi"]),
            K=int(family_dict["K"]),
            L=int(family_dict["L"]),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "d": {str(j): str(d_j) for j, d_j in self.d.items()},
            "a": str(self.a),
            "delta": {str(j): v for j, v in self.delta.items()},
            "xi": {str(j): v for j, v in self.xi.items()},
            "K": str(self.K),
            "L": str(self.L),
        }


@dataclass(frozen=True)
class ProgressionSpec:
    """Members of L + 2^nu 3^(beta + zeta) N inside [N, 2N)."""

    family: ShiftFamily
    N: int
    zeta: int
    modulus: int
    k_lo: int
    k_hi: int
    """Members are L + modulus * k for k_lo <= k < k_hi."""

    r2: int
    b2: int
    zeta_clamped: bool = False

    @property
    def width(self) -> int:
        return self.k_hi - self.k_lo

    def member(self, k: int) -> int:
        return self.family.L + (self.modulus * k)

    def sample_k(self, rng: random.Random) -> int:
        """Uniform k in [k_lo, k_hi) from raw random bits."""
        width = self.width
        bits = rng.getrandbits(width.bit_length() + SAMPLING_EXTRA_BITS)
        return self.k_lo + (bits % width)

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.to_dict(),
            "N": str(self.N),
            "zeta": self.zeta,
            "zeta_clamped": self.zeta_clamped,
            "modulus": str(self.modulus),
            "k_lo": str(self.k_lo),
            "k_hi": str(self.k_hi),
            "r2": str(self.r2),
            "b2": str(self.b2),
        }

    @staticmethod
    def from_dict(spec_dict: dict[str, Any]) -> "ProgressionSpec":
        return ProgressionSpec(
            family=ShiftFamily.from_dict(spec_dict["family"]),
            N=int(spec_dict["N"]),
            zeta=int(spec_dict["zeta"]),
            modulus=int(spec_dict["modulus"]),
            k_lo=int(spec_dict["k_lo"]),
            k_hi=int(spec_dict["k_hi"]),
            r2=int(spec_dict["r2"]),
            b2=int(spec_dict["b2"]),
            zeta_clamped=bool(spec_dict.get("zeta_clamped", False)),
        )


@dataclass
class DifferenceReport:
    samples: int
    passed: bool
    counterexample: Optional[dict[str, Any]] = None
    """First failure: n, j, expected and observed differences."""

    checked: int = 0
    """Members checked (stops at the first failure)."""

    def to_dict(self) -> dict[str, Any]:
        return {
            "samples": self.samples,
            "checked": self.checked,
            "passed": self.passed,
            "counterexample": self.counterexample,
        }


# -----------------------------------------------------------------------------


def _shift(j: int, params: Params) -> int:
    ones = (j + 1 + params.J) * params.eta
    return 3 * (3**ones - 1) // 2


def build_shifts(params: Params) -> dict[int, int]:
    """j -> d_j = 3 (3^((j + 1 + J) eta) - 1) / 2 for -J <= j <= J."""
    shifts = {j: _shift(j, params) for j in range(-params.J, params.J + 1)}

    # nu is chosen so that the largest shift fits below 2^(nu - 1)
    assert shifts[params.J] < (1 << (params.nu - 1))

    return shifts


def default_deviation_bound(nu: int) -> int:
    """Binary deviation bound max(4, 2 ceil(sqrt(2 nu)))."""
    return max(4, 2 * math.isqrt(2 * nu - 1) + 2)


def _targets(
    params: Params, delta: dict[int, int]
) -> list[tuple[int, int, int]]:
    """(j, target, xi) for every block of the ternary key, lowest first."""
    result: list[tuple[int, int, int]] = []
    previous_delta = 0
    previous_xi = 0
    for j in range(-params.J, params.J + 1):
        if j == -params.J:
            target = (params.J * params.m) + delta[j]
        else:
            target = -params.m - previous_delta + previous_xi + delta[j]

        xi = target % 2
        result.append((j, target, xi))
        previous_delta, previous_xi = delta[j], xi

    return result


def _assemblable(params: Params, delta: dict[int, int]) -> bool:
    limit = params.eta // 2
    return all(abs(target) <= limit for _j, target, _xi in _targets(params, delta))


def find_anchor(
    params: Params,
    shifts: dict[int, int],
    bound: Optional[int] = None,
    budget: int = DEFAULT_ANCHOR_BUDGET,
    seed: int = DEFAULT_SEED,
    require_assemblable: bool = True,
) -> AnchorResult:
    """
    Sample a = 1 mod 4 below 2^(nu - 1) until every |delta_j| <= bound.

    With require_assemblable, a candidate is also rejected when one of the
    ternary targets it induces lies outside [-eta/2, eta/2].

    :param bound: Deviation bound (default_deviation_bound(nu) if None).
    :param budget: Number of draws.
    :param seed: Seed for the draws.
    :return: Anchor and its deviations.
    """
    if bound is None:
        bound = default_deviation_bound(params.nu)

    if bound < 1:
        raise InvalidInputError(f"bound must be at least 1 (got {bound})")

    rng = random.Random(seed)
    quarter = 1 << (params.nu - 3)
    best: Optional[AnchorResult] = None
    best_excess: Optional[int] = None
    bounded = 0

    for draw in range(budget):
        a = (4 * rng.randrange(quarter)) + 1
        base = digit_sum(a, 2)
        delta = {j: digit_sum(a + d_j, 2) - base for j, d_j in shifts.items()}

        excess = max(abs(v) for v in delta.values()) - bound
        if excess <= 0:
            bounded += 1
            if (not require_assemblable) or _assemblable(params, delta):
                _LOGGER.debug("Found anchor after %s draw(s)", draw + 1)
                return AnchorResult(a, delta)

        if (best_excess is None) or (excess < best_excess):
            best, best_excess = AnchorResult(a, delta), excess

    raise SearchFailureError(
        f"No anchor within {budget} draw(s) (bound={bound}); "
        "a larger eta widens the range the ternary key can absorb",
        best_candidate=best,
        statistics={"draws": budget, "within_bound": bounded},
    )


def assemble_blocks(target: int, eta: int) -> tuple[int, int]:
    """
    Ternary a_frak with s3(a_frak + (3^eta - 1)/2) - s3(a_frak) = target - xi.

    a_frak is made of eta/4 four-digit blocks. Signed blocks (+2 or -2 each)
    sit at the most significant end, neutral blocks fill the rest.

    :param target: Requested difference.
    :param eta: Number of ternary digits (multiple of 4).
    :return: (a_frak, xi) with xi = target mod 2.
    """
    if (eta < BLOCK_LENGTH) or (eta % BLOCK_LENGTH != 0):
        raise InvalidInputError(f"eta must be a positive multiple of 4 (got {eta})")

    if abs(target) > eta // 2:
        raise RangeError(f"|target| = {abs(target)} exceeds eta/2 = {eta // 2}")

    xi = target % 2
    num_blocks = eta // BLOCK_LENGTH
    num_signed = abs(target - xi) // 2
    signed_block = BLOCK_PLUS if target - xi > 0 else BLOCK_MINUS

    # Most significant block first
    numeral = (signed_block * num_signed) + (BLOCK_ZERO * (num_blocks - num_signed))
    return (int(numeral, 3), xi)


def build_ternary_key(
    params: Params, shifts: dict[int, int], delta: dict[int, int]
) -> tuple[int, dict[int, int]]:
    """
    Ternary key K with s3(K + d_j) - s3(K) = -j m + delta_j - xi_j for all j.

    Block j + J of K (digits (j + J) eta + 1 through (j + J + 1) eta) corrects
    the difference between consecutive shifts.
    """
    K = 0
    xi: dict[int, int] = {}
    for j, target, _xi in _targets(params, delta):
        try:
            a_frak, xi[j] = assemble_blocks(target, params.eta)
        except RangeError as err:
            raise ParametersTooSmallError(
                f"Ternary target {target} for j={j} is outside [-eta/2, eta/2] "
                f"(eta={params.eta}); increase eta"
            ) from err

        K += (3 ** (((j + params.J) * params.eta) + 1)) * a_frak

    base = digit_sum(K, 3)
    for j, d_j in shifts.items():
        ternary = digit_sum(K + d_j, 3) - base
        if ternary != (-j * params.m) + delta[j] - xi[j]:
            raise ConstructionError(f"Ternary key fails for j={j}")

    return (K, xi)


def intersect_classes(a: int, nu: int, K: int, beta: int) -> int:
    """Unique L < 2^nu 3^beta with L = a mod 2^nu and L = K mod 3^beta."""
    modulus2 = 1 << nu
    modulus3 = 3**beta
    solution = crt([modulus2, modulus3], [a, K])
    if solution is None:
        raise ConstructionError("No common residue")

    L = int(solution[0]) % (modulus2 * modulus3)
    if (L % modulus2 != a % modulus2) or (L % modulus3 != K % modulus3):
        raise ConstructionError("Residue does not satisfy both congruences")

    return L


def difference_failure(family: ShiftFamily, n: int) -> Optional[dict[str, Any]]:
    """First j where f(n + d_j) - f(n) is off, or None."""
    f_n = f_value(n)
    for j in family.indices:
        observed = f_value(n + family.d[j]) - f_n
        expected = family.expected_difference(j)
        if observed != expected:
            return {
                "n": str(n),
                "j": j,
                "expected": expected,
                "observed": observed,
            }

    return None


def verify_difference_property(
    family: ShiftFamily,
    samples: int = DEFAULT_DIFFERENCE_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> DifferenceReport:
    """Check f(n + d_j) - f(n) = j m + xi_j on random class members."""
    if samples < 1:
        raise InvalidInputError(f"samples must be at least 1 (got {samples})")

    rng = random.Random(seed)
    report = DifferenceReport(samples=samples, passed=True)
    for _ in range(samples):
        k = rng.getrandbits(RANDOM_K_BITS)
        report.checked += 1
        failure = difference_failure(family, family.L + (family.modulus * k))
        if failure is not None:
            report.passed = False
            report.counterexample = failure
            break

    return report


def build_family(
    params: Params,
    bound: Optional[int] = None,
    budget: int = DEFAULT_ANCHOR_BUDGET,
    seed: int = DEFAULT_SEED,
) -> ShiftFamily:
    """Shifts, anchor, ternary key and class representative, self-checked."""
    shifts = build_shifts(params)
    a, delta = find_anchor(params, shifts, bound=bound, budget=budget, seed=seed)
    K, xi = build_ternary_key(params, shifts, delta)
    L = intersect_classes(a, params.nu, K, params.beta)

    family = ShiftFamily(params=params, d=shifts, a=a, delta=delta, xi=xi, K=K, L=L)
    family.validate()

    report = verify_difference_property(family, samples=SELF_CHECK_SAMPLES, seed=seed)
    if not report.passed:
        raise ConstructionError(f"Difference property fails: {report.counterexample}")

    _LOGGER.debug(
        "Built family: eta=%s, m=%s, J=%s, L has %s bit(s)",
        params.eta,
        params.m,
        params.J,
        L.bit_length(),
    )

    return family


# -----------------------------------------------------------------------------


def rarefaction_constant(q1: int = 2, q2: int = 3) -> float:
    """1 - (q1 - 1) log q2 / ((q2 - 1) log q1)."""
    return 1 - ((q1 - 1) * math.log(q2)) / ((q2 - 1) * math.log(q1))


def zeta_offset(N: int, L: int, nu: int, beta: int, r2: int) -> float:
    """log3(N) (1 - log 3 / log 4) + s3(L) - s2(r2) + nu/2 - beta."""
    if N < 1:
        raise InvalidInputError(f"N must be positive (got {N})")

    log3_n = math.log(N) / math.log(3)
    return (
        (log3_n * rarefaction_constant(2, 3))
        + digit_sum(L, 3)
        - digit_sum(r2, 2)
        + (nu / 2)
        - beta
    )


def choose_zeta(N: int, L: int, nu: int, beta: int, r2: int) -> int:
    """Rarefaction exponent floor(zeta_0), clamped at 0 with a warning."""
    zeta_0 = zeta_offset(N, L, nu, beta, r2)
    zeta = math.floor(zeta_0)
    if zeta < 0:
        _LOGGER.warning("zeta_0 = %.3f is negative, clamping zeta to 0", zeta_0)
        return 0

    return zeta


def make_progression(
    family: ShiftFamily, N: int, zeta: Optional[int] = None
) -> ProgressionSpec:
    """
    Restrict the family's class to [N, 2N) with rarefaction exponent zeta.

    :param family: Constructed shift family.
    :param N: Interval start.
    :param zeta: Exponent (chosen by choose_zeta if None).
    :return: Progression with a nonempty interval of multipliers.
    """
    params = family.params
    r2 = family.L % (1 << params.nu)
    b2 = family.L >> params.nu

    zeta_clamped = False
    if zeta is None:
        zeta = choose_zeta(N, family.L, params.nu, params.beta, r2)
        zeta_clamped = zeta_offset(N, family.L, params.nu, params.beta, r2) < 0
    elif zeta < 0:
        raise InvalidInputError(f"zeta must be nonnegative (got {zeta})")

    modulus = (1 << params.nu) * 3 ** (params.beta + zeta)

    # Smallest k with L + modulus * k >= bound
    def first_k(bound: int) -> int:
        return max(0, -((family.L - bound) // modulus))

    k_lo = first_k(N)
    k_hi = first_k(2 * N)
    if k_hi <= k_lo:
        raise EmptyIntervalError(
            f"No member of L + {modulus.bit_length()}-bit modulus * k in [N, 2N)"
        )

    return ProgressionSpec(
        family=family,
        N=N,
        zeta=zeta,
        modulus=modulus,
        k_lo=k_lo,
        k_hi=k_hi,
        r2=r2,
        b2=b2,
        zeta_clamped=zeta_clamped,
    )
