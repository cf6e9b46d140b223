"""Tests for the residue-class construction."""

import dataclasses
import itertools
import logging
import math
import random

import pytest

from digit_collider.config import Params
from digit_collider.constructor import (
    ProgressionSpec,
    ShiftFamily,
    assemble_blocks,
    build_family,
    build_shifts,
    build_ternary_key,
    choose_zeta,
    default_deviation_bound,
    difference_failure,
    find_anchor,
    intersect_classes,
    make_progression,
    rarefaction_constant,
    verify_difference_property,
    zeta_offset,
)
from digit_collider.digits import digit_sum, f_value
from digit_collider.errors import (
    ConstructionError,
    EmptyIntervalError,
    InvalidInputError,
    ParametersTooSmallError,
    RangeError,
    SearchFailureError,
)


@pytest.fixture(name="small_family", scope="session")
def small_family_fixture() -> ShiftFamily:
    return build_family(Params.manual(4, 1, 0))


@pytest.fixture(name="family", scope="session")
def family_fixture() -> ShiftFamily:
    return build_family(Params.manual(16, 2, 2))


def test_build_shifts() -> None:
    """Test the ternary repunit shifts."""
    assert build_shifts(Params.manual(4, 1, 0)) == {0: 120}
    assert build_shifts(Params.manual(4, 1, 1)) == {-1: 120, 0: 9840, 1: 797160}

    for d_j in build_shifts(Params.manual(16, 3, 3)).values():
        assert d_j % 12 == 0


@pytest.mark.parametrize(
    ("target", "eta", "expected"), [(0, 4, (20, 0)), (2, 4, (18, 0)), (3, 8, (1478, 1))]
)
def test_assemble_blocks(target: int, eta: int, expected: tuple[int, int]) -> None:
    """Test block assembly on small targets."""
    assert assemble_blocks(target, eta) == expected


@pytest.mark.parametrize("eta", [4, 8, 16])
def test_assemble_blocks_exhaustive(eta: int) -> None:
    """Test the ternary difference for every target in [-eta/2, eta/2]."""
    repunit = (3**eta - 1) // 2
    for target in range(-(eta // 2), (eta // 2) + 1):
        a_frak, xi = assemble_blocks(target, eta)
        assert xi == target % 2
        assert a_frak < 3**eta
        difference = digit_sum(a_frak + repunit, 3) - digit_sum(a_frak, 3)
        assert difference == target - xi
        assert a_frak + repunit < 3**eta


def test_assemble_blocks_out_of_range() -> None:
    """Test rejection of targets the blocks cannot absorb."""
    with pytest.raises(RangeError):
        assemble_blocks(3, 4)

    with pytest.raises(InvalidInputError):
        assemble_blocks(0, 6)


def test_intersect_classes() -> None:
    """Test combining a binary and a ternary class."""
    assert intersect_classes(1, 2, 0, 1) == 9
    assert intersect_classes(0, 1, 0, 1) == 0

    rng = random.Random(6)
    for _ in range(100):
        nu = rng.randint(1, 200)
        beta = rng.randint(1, 120)
        a = rng.randrange(1 << nu)
        K = rng.randrange(3**beta)
        L = intersect_classes(a, nu, K, beta)
        assert L % (1 << nu) == a
        assert L % 3**beta == K
        assert 0 <= L < (1 << nu) * 3**beta


def test_default_deviation_bound() -> None:
    """Test the bound 2 ceil(sqrt(2 nu)), at least 4."""
    assert default_deviation_bound(1) == 4
    for nu in range(1, 500):
        assert default_deviation_bound(nu) == max(4, 2 * math.ceil(math.sqrt(2 * nu)))


def test_small_family(small_family: ShiftFamily) -> None:
    """Test the eta = 4, J = 0 family on every member up to k = 2000."""
    assert small_family.d == {0: 120}
    assert small_family.L % 12 == 9
    small_family.validate()

    for k in range(2000):
        n = small_family.L + (small_family.modulus * k)
        assert f_value(n + 120) - f_value(n) == small_family.xi[0]


@pytest.mark.parametrize(
    ("eta", "J", "m"), list(itertools.product([4, 8, 12], [1, 2, 3], [1, 2, 3]))
)
def test_family_sweep(eta: int, J: int, m: int) -> None:
    """Test construction and the difference property across parameters."""
    family = build_family(Params.manual(eta, m, J))
    family.validate()

    report = verify_difference_property(family, samples=1000)
    assert report.passed
    assert report.checked == 1000
    assert report.counterexample is None

    for j in family.indices:
        assert family.d[j] < (1 << (family.params.nu - 1))
        assert family.expected_difference(j) == (j * m) + family.xi[j]


def test_class_representative_is_a_member(family: ShiftFamily) -> None:
    """Test k = 0 (n = L itself)."""
    assert difference_failure(family, family.L) is None


def test_corrupted_family(family: ShiftFamily) -> None:
    """Test that a flipped parity correction is caught."""
    corrupted = dataclasses.replace(family, xi={**family.xi, 0: 1 - family.xi[0]})
    with pytest.raises(ConstructionError):
        corrupted.validate()

    report = verify_difference_property(corrupted, samples=10)
    assert not report.passed
    assert report.checked == 1
    assert report.counterexample is not None
    assert report.counterexample["j"] == 0


def test_family_dict(family: ShiftFamily) -> None:
    """Test loading a family from its dictionary form."""
    assert ShiftFamily.from_dict(family.to_dict()) == family


def test_find_anchor_failure() -> None:
    """Test that an unassemblable configuration exhausts the budget."""
    params = Params.manual(16, 9, 6)
    with pytest.raises(SearchFailureError) as exc_info:
        find_anchor(params, build_shifts(params), budget=50)

    assert exc_info.value.best_candidate is not None
    assert exc_info.value.statistics["draws"] == 50


def test_find_anchor_without_assembly() -> None:
    """Test that the bound alone is satisfiable."""
    params = Params.manual(16, 9, 6)
    shifts = build_shifts(params)
    a, delta = find_anchor(params, shifts, require_assemblable=False)
    assert a % 4 == 1
    assert max(abs(v) for v in delta.values()) <= default_deviation_bound(params.nu)

    with pytest.raises(ParametersTooSmallError):
        build_ternary_key(params, shifts, delta)


def test_rarefaction() -> None:
    """Test the rarefaction constant and zeta."""
    assert abs(rarefaction_constant() - 0.2075) < 1e-4
    assert choose_zeta(3**100, 29524, 9, 5, 255) == 22

    N = 2**100_000
    ratio = zeta_offset(N, 0, 0, 0, 0) / (math.log(N) / math.log(3))
    assert math.isclose(ratio, rarefaction_constant())


def test_choose_zeta_clamped(caplog: pytest.LogCaptureFixture) -> None:
    """Test that a negative zeta_0 is clamped with a warning."""
    with caplog.at_level(logging.WARNING):
        assert choose_zeta(10, 0, 0, 100, 0) == 0

    assert "clamping" in caplog.text


def test_make_progression(family: ShiftFamily) -> None:
    """Test the multiplier interval of a progression."""
    N = 10**200
    spec = make_progression(family, N, zeta=3)
    assert spec.modulus == (1 << family.params.nu) * 3 ** (family.params.beta + 3)
    assert spec.member(spec.k_lo) >= N
    assert spec.member(spec.k_lo - 1) < N
    assert spec.member(spec.k_hi - 1) < 2 * N
    assert spec.member(spec.k_hi) >= 2 * N
    assert spec.r2 == family.a
    assert spec.b2 == family.L >> family.params.nu

    rng = random.Random(7)
    for _ in range(100):
        k = spec.sample_k(rng)
        assert spec.k_lo <= k < spec.k_hi
        n = spec.member(k)
        assert N <= n < 2 * N
        assert difference_failure(family, n) is None

    assert ProgressionSpec.from_dict(spec.to_dict()) == spec


def test_make_progression_default_zeta(family: ShiftFamily) -> None:
    """Test that zeta is chosen automatically."""
    N = 2**2000
    spec = make_progression(family, N)
    r2 = family.L % (1 << family.params.nu)
    assert spec.zeta == choose_zeta(
        N, family.L, family.params.nu, family.params.beta, r2
    )
    assert not spec.zeta_clamped


def test_make_progression_empty(small_family: ShiftFamily) -> None:
    """Test that an interval below the class representative is rejected."""
    with pytest.raises(EmptyIntervalError):
        make_progression(small_family, 1, zeta=0)

    with pytest.raises(InvalidInputError):
        make_progression(small_family, 10**6, zeta=-1)
