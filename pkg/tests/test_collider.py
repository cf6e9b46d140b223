"""Tests for collision enumeration and the collision factory."""

import io
import random
from pathlib import Path

import numpy as np
import pytest

from digit_collider.collider import (
    Certificate,
    CollisionKind,
    DigitCounter,
    collision_levels,
    compare_bfile,
    count_collisions,
    enumerate_collisions,
    estimated_hit_rate,
    find_patterns,
    forge_collision,
    read_bfile,
    write_bfile,
)
from digit_collider.config import Params
from digit_collider.constructor import build_family
from digit_collider.digits import digit_sum, digit_sum_array, f_value
from digit_collider.errors import (
    BFileError,
    EmptyIntervalError,
    InvalidBaseError,
    InvalidInputError,
    SearchFailureError,
)

FIRST_COLLISIONS = [0, 1, 6, 7, 10, 11, 12, 13, 18, 19, 21, 36]


@pytest.fixture(name="certificate", scope="session")
def certificate_fixture() -> Certificate:
    return forge_collision(Params.manual(64, 9, 1), 2**2000, seed=7)


def test_digit_counter() -> None:
    """Test incremental digit sums against direct computation."""
    for base in (2, 3, 10):
        counter = DigitCounter(base, 12345)
        for n in range(12345, 20000):
            assert counter.total == digit_sum(n, base)
            counter.increment()

        assert counter.value == 20000


def test_first_collisions() -> None:
    """Test the collisions below 37."""
    assert [r.n for r in enumerate_collisions(37)] == FIRST_COLLISIONS
    assert [r.n for r in enumerate_collisions(1)] == [0]

    record = list(enumerate_collisions(37))[-1]
    assert (record.s2, record.s3) == (2, 2)
    assert record.kind == CollisionKind.EXACT


@pytest.mark.slow
def test_enumeration_oracle() -> None:
    """Test enumeration below 10^6 against vectorized digit sums."""
    values = np.arange(0, 10**6, dtype=np.uint64)
    expected = np.flatnonzero(
        digit_sum_array(values, 2) == digit_sum_array(values, 3)
    ).tolist()
    assert [r.n for r in enumerate_collisions(10**6, verify=True)] == expected


def test_almost_collisions() -> None:
    """Test that almost-collisions have s2 - s3 in {0, 1}."""
    records = list(enumerate_collisions(5000, kind="almost"))
    exact = {r.n for r in enumerate_collisions(5000)}
    assert exact <= {r.n for r in records}
    for record in records:
        assert record.kind == CollisionKind.ALMOST
        assert record.s2 - record.s3 in (0, 1)
        assert f_value(record.n) in (0, 1)


def test_thread_independence() -> None:
    """Test that output does not depend on threads or chunking."""
    single = [r.n for r in enumerate_collisions(50_000, chunk_size=50_000)]
    multi = [r.n for r in enumerate_collisions(50_000, threads=3, chunk_size=997)]
    assert single == multi


def test_other_bases() -> None:
    """Test collisions between bases 2 and 10."""
    records = enumerate_collisions(1000, bases=(2, 10))
    expected = [n for n in range(1000) if digit_sum(n, 2) == digit_sum(n, 10)]
    assert [r.n for r in records] == expected


def test_enumeration_invalid() -> None:
    """Test eager validation of enumeration arguments."""
    with pytest.raises(InvalidInputError):
        enumerate_collisions(0)

    with pytest.raises(InvalidBaseError):
        enumerate_collisions(10, bases=(1, 3))

    with pytest.raises(InvalidInputError):
        enumerate_collisions(10, bases=(3, 3))


@pytest.mark.parametrize(
    ("window", "offsets", "member"), [(24, {0, 5, 6, 8, 23}, 13), (4, {0, 1, 2, 3}, 10)]
)
def test_find_patterns(window: int, offsets: set[int], member: int) -> None:
    """Test pattern searches from the first collisions."""
    assert member in find_patterns(100, window, offsets)


def test_find_patterns_brute_force() -> None:
    """Test the sliding window against a direct check."""
    collisions = {n for n in range(600) if f_value(n) == 0}
    for window, offsets in ((1, set()), (2, {1}), (3, {0, 2})):
        expected = [
            n
            for n in range(500)
            if {v for v in range(window) if (n + v) in collisions} == offsets
        ]
        assert find_patterns(500, window, offsets) == expected


@pytest.mark.slow
def test_no_runs_of_five() -> None:
    """Test that no five consecutive numbers below 10^6 collide."""
    assert find_patterns(10**6, 5, {0, 1, 2, 3, 4}) == []


def test_find_patterns_invalid() -> None:
    with pytest.raises(InvalidInputError):
        find_patterns(100, 0, set())

    with pytest.raises(InvalidInputError):
        find_patterns(100, 3, {3})


def test_count_collisions() -> None:
    """Test counts at several checkpoints in one pass."""
    assert count_collisions(37, [37]) == [(37, 12)]
    counts = count_collisions(37, [0, 10, 20, 37])
    assert counts == [(0, 0), (10, 4), (20, 10), (37, 12)]
    assert count_collisions(100, []) == []

    with pytest.raises(InvalidInputError):
        count_collisions(100, [50, 10])

    with pytest.raises(InvalidInputError):
        count_collisions(100, [200])


def test_count_collisions_monotone() -> None:
    """Test counts against enumeration (and threads)."""
    checkpoints = [1000 * i for i in range(1, 31)]
    counts = count_collisions(30_000, checkpoints, threads=2)
    collisions = [r.n for r in enumerate_collisions(30_000)]
    for checkpoint, count in counts:
        assert count == sum(1 for n in collisions if n < checkpoint)

    values = [count for _checkpoint, count in counts]
    assert values == sorted(values)


def test_collision_levels() -> None:
    """Test collisions below 37 grouped by digit sum."""
    assert collision_levels(37) == {0: 1, 1: 1, 2: 5, 3: 5}


def test_estimated_hit_rate() -> None:
    """Test the Gaussian hit-rate estimate."""
    assert estimated_hit_rate(0.0, 0.0, 9, 1) == 1.0
    assert estimated_hit_rate(100.0, 0.0, 9, 1) == 0.0

    rate = estimated_hit_rate(0.0, 24.0, 9, 1)
    assert 0.04 < rate < 0.05


def test_forge_collision(certificate: Certificate) -> None:
    """Test a forged collision of about 2000 bits."""
    n = certificate.record.n
    assert digit_sum(n, 2) == digit_sum(n, 3)
    assert certificate.record.s2 == certificate.record.s3
    assert n.bit_length() >= 2000
    assert certificate.verify()
    assert certificate.replay() == n
    assert abs(certificate.j) <= 1

    if certificate.used_plus_one:
        assert (n - 1) % 12 == 9
        assert f_value(n - 1) == 1


def test_certificate_dict(certificate: Certificate) -> None:
    """Test the certificate's dictionary form."""
    certificate_dict = certificate.to_dict()
    assert int(certificate_dict["record"]["n"]) == certificate.record.n
    assert certificate_dict["j"] == certificate.j
    assert certificate_dict["params"]["eta"] == 64


def test_forge_deterministic() -> None:
    """Test that the same seed gives the same collision."""
    family = build_family(Params.manual(64, 9, 1), seed=3)
    first = forge_collision(family, 2**2000, seed=11)
    second = forge_collision(family, 2**2000, seed=11)
    assert first.record == second.record
    assert first.draws == second.draws


def test_forge_failure() -> None:
    """Test that an exhausted budget reports sampling statistics."""
    with pytest.raises(SearchFailureError) as exc_info:
        forge_collision(Params.manual(64, 9, 1), 2**2000, budget=0)

    assert exc_info.value.statistics["draws"] == 0


def test_forge_empty_interval() -> None:
    """Test that a progression outside [N, 2N) is rejected."""
    with pytest.raises(EmptyIntervalError):
        forge_collision(Params.manual(16, 2, 2), 10, zeta=0)


def test_bfile() -> None:
    """Test writing, reading, and comparing b-files."""
    target = io.StringIO()
    assert write_bfile(FIRST_COLLISIONS, target) == 12
    assert target.getvalue().splitlines()[0] == "1 0"

    source = io.StringIO("# collisions\n\n" + target.getvalue())
    assert read_bfile(source)[-1] == (12, 36)

    comparison = compare_bfile(io.StringIO(target.getvalue()))
    assert comparison.matches
    assert comparison.checked == 12

    wrong = io.StringIO("1 0\n2 1\n3 7\n")
    comparison = compare_bfile(wrong)
    assert not comparison.matches
    assert comparison.first_mismatch == (3, 7, 6)


def test_bfile_from_path(tmp_path: Path) -> None:
    """Test comparing a b-file on disk."""
    rng = random.Random(8)
    limit = rng.randint(1000, 5000)
    collisions = [r.n for r in enumerate_collisions(limit)]
    bfile_path = tmp_path / "b_collisions.txt"
    with open(bfile_path, "w", encoding="utf-8") as bfile:
        write_bfile(collisions, bfile)

    assert compare_bfile(bfile_path).checked == len(collisions)


@pytest.mark.parametrize("text", ["1 2 3\n", "1 x\n", "1 0\n3 1\n"])
def test_bfile_malformed(text: str) -> None:
    """Test rejection of malformed b-files."""
    with pytest.raises(BFileError):
        read_bfile(io.StringIO(text))
