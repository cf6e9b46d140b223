"""Empirical checks of concentration, equidistribution and growth claims."""

import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, NamedTuple, Sequence

import numpy as np

from .const import (
    CHUNK_SIZE,
    DEFAULT_CONCENTRATION_THRESHOLD,
    DEFAULT_SEED,
    GELFOND_MAX_N,
    HOEFFDING_MAX_T,
    ORTHOGONALITY_MAX_LENGTH,
    SAMPLE_STREAMS,
)
from .constructor import ProgressionSpec
from .digits import digit_sum, digit_sum_array, f_value
from .errors import (
    DegenerateFitError,
    EmptyIntervalError,
    InvalidInputError,
    ResourceLimitError,
)
from .parallel import chunk_ranges, ordered_map, spawn_seeds, split_count

_LOGGER = logging.getLogger(__name__)

# Values below this fit the vectorized uint64 digit sums
_VECTOR_LIMIT = 1 << 62


@dataclass
class ConcentrationReport:
    """Distribution of f along a rarefied progression."""

    spec: ProgressionSpec
    samples: int
    histogram: dict[int, int]
    """Observed f value -> count."""

    inside_fraction: float
    """Fraction of samples with |f| <= J m."""

    centers: tuple[float, float]
    """(E2, E3): predicted binary and ternary digit sums of the varying parts."""

    mean: float = 0.0
    std: float = 0.0

    predicted_center: float = 0.0
    """E2 + s2(r2) - E3 - s3(L)."""

    kappa2: int = 0
    """Smallest m with 2^m >= 3^(beta + zeta)."""

    sigma: float = 0.0
    """b2 / 2^kappa2."""

    rho: float = 0.0
    """3^(beta + zeta) / 2^kappa2."""

    T: int = 0
    """Smallest T with 2^T >= 2 rho k_lo + 1."""

    threshold: float = DEFAULT_CONCENTRATION_THRESHOLD

    @property
    def accepted(self) -> bool:
        return self.inside_fraction >= self.threshold

    def to_dict(self) -> dict[str, Any]:
        return {
            "samples": self.samples,
            "histogram": {str(v): c for v, c in sorted(self.histogram.items())},
            "inside_fraction": self.inside_fraction,
            "window": self.spec.family.params.J * self.spec.family.params.m,
            "E2": self.centers[0],
            "E3": self.centers[1],
            "mean": self.mean,
            "std": self.std,
            "predicted_center": self.predicted_center,
            "kappa2": self.kappa2,
            "sigma": self.sigma,
            "rho": self.rho,
            "T": self.T,
            "threshold": self.threshold,
            "accepted": self.accepted,
            "zeta": self.spec.zeta,
        }


class FairShare(NamedTuple):
    ratio: float
    expected: float


class OrthogonalityCheck(NamedTuple):
    P_direct: int
    P_reconstructed: float


class HoeffdingCheck(NamedTuple):
    empirical: Fraction
    bound: float
    holds: bool


@dataclass
class GelfondReport:
    """Counts of n < N by (s2(n) mod m1, s3(n) mod m2)."""

    N: int
    m1: int
    m2: int
    counts: list[list[int]] = field(default_factory=list)
    condition_holds: bool = True
    """gcd(m2, 2) = 1."""

    @property
    def main_term(self) -> float:
        return self.N / (self.m1 * self.m2)

    @property
    def max_relative_deviation(self) -> float:
        main_term = self.main_term
        return max(abs(c - main_term) / main_term for row in self.counts for c in row)

    def to_dict(self) -> dict[str, Any]:
        return {
            "N": self.N,
            "m1": self.m1,
            "m2": self.m2,
            "counts": self.counts,
            "main_term": self.main_term,
            "max_relative_deviation": self.max_relative_deviation,
            "condition_holds": self.condition_holds,
        }


@dataclass
class FitResult:
    """Least-squares line through (log N, log count)."""

    points: list[tuple[float, float]]
    slope: float
    intercept: float
    r_squared: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "points": [list(p) for p in self.points],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


# -----------------------------------------------------------------------------


class _SampleTask(NamedTuple):
    spec: ProgressionSpec
    samples: int
    seed: int


def _sample_f(task: _SampleTask) -> Counter:
    rng = random.Random(task.seed)
    histogram: Counter = Counter()
    for _ in range(task.samples):
        histogram[f_value(task.spec.member(task.spec.sample_k(rng)))] += 1

    return histogram


def sample_f_histogram(
    spec: ProgressionSpec, samples: int, seed: int = DEFAULT_SEED, threads: int = 1
) -> Counter:
    """
    Histogram of f over uniformly sampled progression members.

    The samples are split over a fixed number of seeded streams, so the
    result does not depend on threads.
    """
    if spec.width <= 0:
        raise EmptyIntervalError("Progression has no members in [N, 2N)")

    if samples < 1:
        raise InvalidInputError(f"samples must be at least 1 (got {samples})")

    tasks = [
        _SampleTask(spec, count, stream_seed)
        for count, stream_seed in zip(
            split_count(samples, SAMPLE_STREAMS), spawn_seeds(seed, SAMPLE_STREAMS)
        )
        if count > 0
    ]

    histogram: Counter = Counter()
    for partial in ordered_map(_sample_f, tasks, threads):
        histogram.update(partial)

    return histogram


def sample_concentration(
    spec: ProgressionSpec,
    samples: int,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    threshold: float = DEFAULT_CONCENTRATION_THRESHOLD,
) -> ConcentrationReport:
    """
    Sample f along the progression and compare with the predicted centers.

    :param spec: Progression to sample.
    :param samples: Number of members.
    :param seed: Master seed.
    :param threads: Worker processes.
    :param threshold: Inside fraction needed for acceptance.
    :return: Report with histogram and derived quantities.
    """
    histogram = sample_f_histogram(spec, samples, seed=seed, threads=threads)
    params = spec.family.params
    window = params.J * params.m

    inside = sum(c for v, c in histogram.items() if abs(v) <= window)
    mean = sum(v * c for v, c in histogram.items()) / samples
    variance = sum(((v - mean) ** 2) * c for v, c in histogram.items()) / samples

    log_n = math.log(spec.N)
    E2 = (log_n / math.log(2) / 2) - (params.nu / 2)
    E3 = (log_n / math.log(3)) - params.beta - spec.zeta

    alpha = params.beta + spec.zeta
    power3 = 3**alpha
    kappa2 = (power3 - 1).bit_length()
    scaled_start = (spec.k_lo * power3) >> kappa2

    report = ConcentrationReport(
        spec=spec,
        samples=samples,
        histogram=dict(sorted(histogram.items())),
        inside_fraction=inside / samples,
        centers=(E2, E3),
        mean=mean,
        std=math.sqrt(variance),
        predicted_center=E2
        + digit_sum(spec.r2, 2)
        - E3
        - digit_sum(spec.family.L, 3),
        kappa2=kappa2,
        sigma=spec.b2 / (1 << kappa2),
        rho=power3 / (1 << kappa2),
        T=(2 * scaled_start).bit_length(),
        threshold=threshold,
    )

    if not report.accepted:
        _LOGGER.warning(
            "Only %.4f of samples within |f| <= %s (threshold %s)",
            report.inside_fraction,
            window,
            threshold,
        )

    return report


def fair_share(
    spec: ProgressionSpec,
    m: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> FairShare:
    """Fraction of sampled members with f = 0 mod m, and 1/m."""
    if m < 1:
        raise InvalidInputError(f"m must be at least 1 (got {m})")

    histogram = sample_f_histogram(spec, samples, seed=seed, threads=threads)
    hits = sum(c for v, c in histogram.items() if v % m == 0)

    return FairShare(ratio=hits / samples, expected=1 / m)


# -----------------------------------------------------------------------------


def _split_values(b2: int, modulus2: int, modulus3: int, k: np.ndarray) -> np.ndarray:
    """s2(b2 + modulus3 k) - s3(modulus2 k) for each k."""
    k_max = int(k[-1]) if len(k) else 0
    largest = max(b2 + (modulus3 * k_max), modulus2 * k_max, modulus2, modulus3)
    if largest < _VECTOR_LIMIT:
        values = k.astype(np.uint64)
        binary = digit_sum_array(np.uint64(b2) + (np.uint64(modulus3) * values), 2)
        ternary = digit_sum_array(np.uint64(modulus2) * values, 3)
        return binary - ternary

    return np.array(
        [
            digit_sum(b2 + (modulus3 * int(x)), 2) - digit_sum(modulus2 * int(x), 3)
            for x in k
        ],
        dtype=np.int64,
    )


def exp_sum_orthogonality(
    L: int, modulus2: int, modulus3: int, I_lo: int, I_hi: int, m: int, t: int
) -> OrthogonalityCheck:
    """
    Count k in [I_lo, I_hi) with g(k) = t mod m directly and through S0.

    g(k) = s2(b2 + modulus3 k) - s3(modulus2 k) with b2 = L // modulus2, and
    S0(x) = sum_k e(x g(k)).
    """
    if m < 1:
        raise InvalidInputError(f"m must be at least 1 (got {m})")

    if (I_lo < 0) or (I_hi < I_lo):
        raise InvalidInputError(f"Invalid interval [{I_lo}, {I_hi})")

    if I_hi - I_lo > ORTHOGONALITY_MAX_LENGTH:
        raise ResourceLimitError(
            f"Interval length {I_hi - I_lo} exceeds {ORTHOGONALITY_MAX_LENGTH}"
        )

    k = np.arange(I_lo, I_hi, dtype=np.int64)
    g = _split_values(L // modulus2, modulus2, modulus3, k)
    P_direct = int(np.count_nonzero((g - t) % m == 0))

    total = complex(len(k))
    for b in range(1, m):
        S0 = np.exp(2j * np.pi * (b / m) * g).sum()
        total += np.exp(-2j * np.pi * b * t / m) * S0

    return OrthogonalityCheck(P_direct=P_direct, P_reconstructed=float(total.real / m))


def hoeffding_tail(T: int, t: float) -> HoeffdingCheck:
    """
    Exact 2^-T #{n < 2^T : |s2(n) - T/2| >= t} against 2 exp(-2 t^2 / T).

    :param T: Number of binary digits (1 to 40).
    :param t: Nonnegative deviation.
    """
    if T < 1:
        raise InvalidInputError(f"T must be at least 1 (got {T})")

    if T > HOEFFDING_MAX_T:
        raise ResourceLimitError(f"T must be at most {HOEFFDING_MAX_T} (got {T})")

    if t < 0:
        raise InvalidInputError(f"t must be nonnegative (got {t})")

    tail = sum(math.comb(T, k) for k in range(T + 1) if abs((2 * k) - T) >= 2 * t)
    empirical = Fraction(tail, 1 << T)
    bound = 2 * math.exp(-2 * t * t / T)

    return HoeffdingCheck(empirical=empirical, bound=bound, holds=empirical <= bound)


class _GelfondTask(NamedTuple):
    start: int
    stop: int
    m1: int
    m2: int


def _gelfond_chunk(task: _GelfondTask) -> np.ndarray:
    values = np.arange(task.start, task.stop, dtype=np.uint64)
    classes = ((digit_sum_array(values, 2) % task.m1) * task.m2) + (
        digit_sum_array(values, 3) % task.m2
    )
    return np.bincount(classes, minlength=task.m1 * task.m2)


def gelfond_counts(N: int, m1: int, m2: int, threads: int = 1) -> GelfondReport:
    """Counts of n < N in each class (s2(n) mod m1, s3(n) mod m2)."""
    if (m1 < 1) or (m2 < 1):
        raise InvalidInputError(f"Moduli must be positive (got {m1}, {m2})")

    if N < 1:
        raise InvalidInputError(f"N must be at least 1 (got {N})")

    if N > GELFOND_MAX_N:
        raise ResourceLimitError(f"N must be at most {GELFOND_MAX_N} (got {N})")

    condition_holds = math.gcd(m2, 2) == 1
    if not condition_holds:
        _LOGGER.warning("gcd(m2, 2) != 1: classes are not expected to equidistribute")

    tasks = [_GelfondTask(lo, hi, m1, m2) for lo, hi in chunk_ranges(0, N, CHUNK_SIZE)]
    totals = np.zeros(m1 * m2, dtype=np.int64)
    for partial in ordered_map(_gelfond_chunk, tasks, threads):
        totals += partial

    return GelfondReport(
        N=N,
        m1=m1,
        m2=m2,
        counts=totals.reshape(m1, m2).tolist(),
        condition_holds=condition_holds,
    )


def fit_exponent(checkpoints: Sequence[tuple[int, int]]) -> FitResult:
    """Fit log count = slope * log N + intercept by least squares."""
    points = sorted(
        {
            (math.log(n), math.log(count))
            for n, count in checkpoints
            if (n > 0) and (count > 0)
        }
    )
    if len({x for x, _y in points}) < 2:
        raise DegenerateFitError(
            "Need at least two distinct points with positive counts"
        )

    x = np.array([p[0] for p in points])
    y = np.array([p[1] for p in points])
    slope, intercept = np.polyfit(x, y, 1)

    residuals = y - ((slope * x) + intercept)
    total = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 if total == 0 else 1.0 - float((residuals**2).sum()) / total

    return FitResult(
        points=points,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=min(1.0, max(0.0, r_squared)),
    )
