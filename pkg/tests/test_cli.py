"""Tests for the collider command line."""

import json
from fractions import Fraction
from pathlib import Path

import pytest

from digit_collider.__main__ import _load_family_source, main, parse_bignat
from digit_collider.config import Params, ParamsMode
from digit_collider.const import THREADS_ENV_VAR

_FIRST_COLLISIONS = [0, 1, 6, 7, 10, 11, 12, 13, 18, 19, 21, 36]


def run_json(argv: list[str], capsys: pytest.CaptureFixture[str]) -> list[dict]:
    assert main(argv) == 0
    return [json.loads(line) for line in capsys.readouterr().out.splitlines()]


def test_parse_bignat() -> None:
    """Test decimal and hexadecimal numbers."""
    assert parse_bignat("1_000") == 1000
    assert parse_bignat("0x10") == 16


def test_enum(capsys: pytest.CaptureFixture[str]) -> None:
    """Test enumerating collisions as JSON lines."""
    records = run_json(["enum", "--limit", "37"], capsys)
    assert [int(r["n"]) for r in records] == _FIRST_COLLISIONS
    assert records[-1] == {"n": "36", "s2": 2, "s3": 2, "kind": "exact"}


def test_enum_bfile(capsys: pytest.CaptureFixture[str]) -> None:
    """Test enumerating collisions as a b-file."""
    assert main(["enum", "--limit", "37", "--format", "bfile"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "1 0"
    assert lines[-1] == "12 36"


def test_enum_csv(capsys: pytest.CaptureFixture[str]) -> None:
    """Test enumerating almost-collisions as CSV."""
    assert main(["enum", "--limit", "10", "--almost", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,s2,s3,kind"
    assert lines[1] == "0,0,0,almost"


def test_usage_errors(capsys: pytest.CaptureFixture[str]) -> None:
    """Test exit code 2 for usage errors."""
    assert main(["nonsense"]) == 2
    assert main(["enum"]) == 2
    assert main(["count", "--limit", "37", "--format", "bfile"]) == 2
    capsys.readouterr()


def test_domain_error(capsys: pytest.CaptureFixture[str]) -> None:
    """Test exit code 1 for domain errors."""
    assert main(["digits", "5", "--base", "1"]) == 1
    assert main(["enum", "--limit", "10", "--threads", "0"]) == 1
    capsys.readouterr()


def test_digits(capsys: pytest.CaptureFixture[str]) -> None:
    """Test digits, truncation, and carry counts."""
    (document,) = run_json(["digits", "21", "--base", "3", "--trunc", "1"], capsys)
    assert document["digits"] == "210"
    assert document["digit_sum"] == 3
    assert document["digit_sum_trunc"] == 0

    (document,) = run_json(["digits", "5", "--binomial"], capsys)
    assert document["v2"] == 2
    assert document["v3_twice"] == 4
    assert document["identities_hold"]
    assert document["oracle_v3"] == 2


def test_dist(capsys: pytest.CaptureFixture[str]) -> None:
    """Test the distribution subcommands."""
    (table,) = run_json(["dist", "phi", "--t", "1", "--L", "2"], capsys)
    assert table["counts"] == {"-2": "1", "0": "1", "1": "2"}

    (moments,) = run_json(["dist", "moments", "--t", "3", "--L", "3"], capsys)
    assert Fraction(moments["m2"]) == Fraction(9, 4)

    (omega,) = run_json(
        ["dist", "omega", "--t", "1", "--theta", "0.5", "--L", "3"], capsys
    )
    assert abs(omega["real"] + 0.5) < 1e-12

    reports = run_json(["dist", "bounds", "--nu", "1", "--t", "21", "--L", "8"], capsys)
    assert reports[0]["max_m2"] == "1"
    assert reports[1]["holds"]


def test_count(capsys: pytest.CaptureFixture[str]) -> None:
    """Test counting at checkpoints and by level."""
    rows = run_json(["count", "--limit", "37", "--checkpoints", "10", "37"], capsys)
    assert rows == [{"N": "10", "count": 4}, {"N": "37", "count": 12}]

    rows = run_json(["count", "--limit", "37", "--levels"], capsys)
    assert {row["level"]: row["count"] for row in rows} == {0: 1, 1: 1, 2: 5, 3: 5}


def test_patterns(capsys: pytest.CaptureFixture[str]) -> None:
    """Test a pattern search."""
    rows = run_json(
        [
            "patterns",
            "--limit",
            "100",
            "--window",
            "4",
            "--offsets",
            "0",
            "1",
            "2",
            "3",
        ],
        capsys,
    )
    assert {"n": "10"} in rows


def test_analyze(capsys: pytest.CaptureFixture[str]) -> None:
    """Test the analysis subcommands that need no family."""
    (hoeffding,) = run_json(["analyze", "hoeffding", "--T", "20", "--t", "5"], capsys)
    assert Fraction(hoeffding["empirical"]) == Fraction(43400, 1048576)
    assert hoeffding["holds"]

    (carries,) = run_json(["analyze", "carries", "--k-hi", "9"], capsys)
    assert 8 in carries["violations"]
    assert not carries["holds"]

    (fit,) = run_json(["analyze", "fit", "--exponents", "4", "12"], capsys)
    assert 0 < fit["slope"] < 1

    (gelfond,) = run_json(
        ["analyze", "gelfond", "--N", "1000", "--m1", "2", "--m2", "3"], capsys
    )
    assert sum(map(sum, gelfond["counts"])) == 1000


def test_construct_and_forge(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test piping a constructed family into forge."""
    family_path = tmp_path / "family.json"
    argv = ["construct", "--eta", "16", "--m", "2", "--J", "2", "--bits", "500"]
    argv += ["--check-samples", "20", "--output", str(family_path)]
    assert main(argv) == 0

    with open(family_path, "r", encoding="utf-8") as family_file:
        document = json.load(family_file)

    assert document["difference_check"]["passed"]
    assert document["family"]["params"]["eta"] == 16
    assert int(document["progression"]["k_hi"]) > int(document["progression"]["k_lo"])

    (certificate,) = run_json(
        ["forge", "--params", str(family_path), "--bits", "500", "--seed", "5"], capsys
    )
    n = int(certificate["record"]["n"])
    assert bin(n).count("1") == certificate["record"]["s3"]
    assert certificate["record"]["s2"] == certificate["record"]["s3"]


def test_forge_unassemblable(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that a configuration the key cannot absorb exits with 1."""
    argv = ["forge", "--eta", "16", "--J", "6", "--m", "9", "--bits", "2000"]
    argv += ["--anchor-budget", "100"]
    assert main(argv) == 1
    capsys.readouterr()


def test_compare_bfile(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test comparing a b-file written by enum."""
    bfile_path = tmp_path / "b_collisions.txt"
    argv = ["enum", "--limit", "1000", "--format", "bfile", "--output", str(bfile_path)]
    assert main(argv) == 0

    (comparison,) = run_json(["compare-bfile", str(bfile_path)], capsys)
    assert comparison["matches"]
    assert comparison["checked"] > 12


def test_failed_run_leaves_no_output(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test that --output is removed when the run fails."""
    certificate_path = tmp_path / "certificate.json"
    argv = ["forge", "--eta", "16", "--J", "6", "--m", "9", "--bits", "2000"]
    argv += ["--anchor-budget", "100", "--output", str(certificate_path)]
    assert main(argv) == 1
    assert not certificate_path.exists()
    capsys.readouterr()


def test_bad_threads_environment(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test that a malformed thread count in the environment exits with 1."""
    monkeypatch.setenv(THREADS_ENV_VAR, "many")
    assert main(["enum", "--limit", "37"]) == 1
    capsys.readouterr()


def test_load_paper_params(tmp_path: Path) -> None:
    """Test that a saved paper-mode parameter file keeps its mode."""
    params = Params.paper(log_n=10_000)
    params_path = tmp_path / "params.json"
    with open(params_path, "w", encoding="utf-8") as params_file:
        json.dump(params.to_dict(), params_file)

    loaded = _load_family_source(str(params_path))
    assert loaded == params
    assert isinstance(loaded, Params)
    assert loaded.mode == ParamsMode.PAPER
    assert loaded.fineness == 3
