"""Command-line interface for digit-collider."""

import argparse
import csv
import json
import logging
import sys
from collections.abc import Iterable
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional, TextIO, Union

from . import analysis, collider, constructor, digits, distribution
from .config import OutputFormat, Params, RunConfig, make_params
from .const import (
    BINOMIAL_ORACLE_MAX_N,
    DEFAULT_ANCHOR_BUDGET,
    DEFAULT_CONCENTRATION_THRESHOLD,
    DEFAULT_DIFFERENCE_SAMPLES,
    DEFAULT_EPSILON,
    DEFAULT_FORGE_BUDGET,
)
from .errors import ColliderError, InvalidInputError

_FILE = Path(__file__)
_LOGGER = logging.getLogger(_FILE.stem)

Document = dict[str, Any]


def parse_bignat(text: str) -> int:
    """Decimal or 0x-prefixed hexadecimal natural number."""
    try:
        value = int(text.replace("_", ""), 0)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from err

    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text!r}")

    return value


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="Seed for randomized operations")
    common.add_argument(
        "--threads",
        type=int,
        help="Worker processes (default: $COLLIDER_THREADS or 1)",
    )
    common.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.JSONL.value,
        help="Output format (default: jsonl)",
    )
    common.add_argument("--output", help="Output file (default: stdout)")
    common.add_argument(
        "--debug", action="store_true", help="Print DEBUG messages to console"
    )
    return common


def _add_family_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eta", type=int, help="Ternary block length")
    parser.add_argument("--m", type=int, help="Step of the corrected values")
    parser.add_argument("--J", type=int, help="Shifts d_j for -J <= j <= J")
    parser.add_argument(
        "--paper", action="store_true", help="Derive eta, m, J from N (or --log-n)"
    )
    parser.add_argument("--log-n", type=float, help="Natural log of N (paper mode)")
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    parser.add_argument(
        "--params", help="JSON file with parameters or a constructed family"
    )
    parser.add_argument("--N", type=parse_bignat, help="Interval start N")
    parser.add_argument("--bits", type=int, help="Use N = 2^bits")
    parser.add_argument("--zeta", type=int, help="Rarefaction exponent")
    parser.add_argument("--bound", type=int, help="Binary deviation bound")
    parser.add_argument("--anchor-budget", type=int, default=DEFAULT_ANCHOR_BUDGET)


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="collider", description="Collisions of binary and ternary digit sums"
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    # digits
    digits_parser = subparsers.add_parser(
        "digits", parents=[common], help="Digits and digit sums of a number"
    )
    digits_parser.add_argument("n", type=parse_bignat)
    digits_parser.add_argument("--base", type=int, default=2)
    digits_parser.add_argument("--trunc", type=int, help="Truncate to L digits")
    digits_parser.add_argument(
        "--binomial",
        action="store_true",
        help="Carry counts of n + n and valuations of binom(2n, n)",
    )

    # dist
    dist_parser = subparsers.add_parser(
        "dist", help="Distribution of truncated digit-sum differences"
    )
    dist_subparsers = dist_parser.add_subparsers(dest="dist_command", required=True)

    phi_parser = dist_subparsers.add_parser("phi", parents=[common])
    phi_parser.add_argument("--t", type=parse_bignat, required=True)
    phi_parser.add_argument("--L", type=int, required=True)
    phi_parser.add_argument(
        "--mode",
        choices=[distribution.RECURRENCE, distribution.BRUTEFORCE],
        default=distribution.RECURRENCE,
    )

    omega_parser = dist_subparsers.add_parser("omega", parents=[common])
    omega_parser.add_argument("--t", type=parse_bignat, required=True)
    omega_parser.add_argument("--theta", type=float, required=True)
    omega_parser.add_argument("--L", type=int, required=True)
    omega_parser.add_argument(
        "--mode",
        choices=[distribution.RECURRENCE, distribution.DIRECT],
        default=distribution.RECURRENCE,
    )

    moments_parser = dist_subparsers.add_parser("moments", parents=[common])
    moments_parser.add_argument("--t", type=parse_bignat, required=True)
    moments_parser.add_argument("--L", type=int, required=True)

    bounds_parser = dist_subparsers.add_parser("bounds", parents=[common])
    bounds_parser.add_argument("--nu", type=int, help="Check m2(t, nu) <= 2 nu")
    bounds_parser.add_argument("--t", type=parse_bignat, help="Check the omega bound")
    bounds_parser.add_argument("--theta", type=float, default=0.5)
    bounds_parser.add_argument("--L", type=int)

    # construct
    construct_parser = subparsers.add_parser(
        "construct", parents=[common], help="Build a shift family (and progression)"
    )
    _add_family_args(construct_parser)
    construct_parser.add_argument(
        "--check-samples",
        type=int,
        default=0,
        help=f"Verify the difference property (e.g. {DEFAULT_DIFFERENCE_SAMPLES})",
    )

    # enum
    enum_parser = subparsers.add_parser(
        "enum", parents=[common], help="Enumerate collisions below a limit"
    )
    enum_parser.add_argument("--limit", type=parse_bignat, required=True)
    enum_parser.add_argument(
        "--almost", action="store_true", help="Allow s2 - s3 in {0, 1}"
    )
    enum_parser.add_argument("--bases", type=int, nargs=2, default=[2, 3])
    enum_parser.add_argument(
        "--verify", action="store_true", help="Re-check digit counters periodically"
    )

    # patterns
    patterns_parser = subparsers.add_parser(
        "patterns", parents=[common], help="Find collision patterns in a window"
    )
    patterns_parser.add_argument("--limit", type=parse_bignat, required=True)
    patterns_parser.add_argument("--window", type=int, required=True)
    patterns_parser.add_argument("--offsets", type=int, nargs="*", default=[])

    # forge
    forge_parser = subparsers.add_parser(
        "forge", parents=[common], help="Manufacture a large verified collision"
    )
    _add_family_args(forge_parser)
    forge_parser.add_argument("--budget", type=int, default=DEFAULT_FORGE_BUDGET)

    # count
    count_parser = subparsers.add_parser(
        "count", parents=[common], help="Count collisions below checkpoints"
    )
    count_parser.add_argument("--limit", type=parse_bignat, required=True)
    count_parser.add_argument("--checkpoints", type=parse_bignat, nargs="*")
    count_parser.add_argument(
        "--levels", action="store_true", help="Count by common digit sum instead"
    )

    # analyze
    analyze_parser = subparsers.add_parser("analyze", help="Empirical checks")
    analyze_subparsers = analyze_parser.add_subparsers(
        dest="analyze_command", required=True
    )

    concentration_parser = analyze_subparsers.add_parser(
        "concentration", parents=[common]
    )
    _add_family_args(concentration_parser)
    concentration_parser.add_argument("--samples", type=int, default=10_000)
    concentration_parser.add_argument(
        "--threshold", type=float, default=DEFAULT_CONCENTRATION_THRESHOLD
    )

    fairshare_parser = analyze_subparsers.add_parser("fairshare", parents=[common])
    _add_family_args(fairshare_parser)
    fairshare_parser.add_argument("--samples", type=int, default=100_000)
    fairshare_parser.add_argument(
        "--modulus", type=int, required=True, help="Modulus of the class f = 0"
    )

    orthogonality_parser = analyze_subparsers.add_parser(
        "orthogonality", parents=[common]
    )
    orthogonality_parser.add_argument("--L", type=parse_bignat, required=True)
    orthogonality_parser.add_argument("--modulus2", type=parse_bignat, required=True)
    orthogonality_parser.add_argument("--modulus3", type=parse_bignat, required=True)
    orthogonality_parser.add_argument("--lo", type=int, required=True)
    orthogonality_parser.add_argument("--hi", type=int, required=True)
    orthogonality_parser.add_argument("--m", type=int, required=True)
    orthogonality_parser.add_argument("--t", type=int, default=0)

    hoeffding_parser = analyze_subparsers.add_parser("hoeffding", parents=[common])
    hoeffding_parser.add_argument("--T", type=int, required=True)
    hoeffding_parser.add_argument("--t", type=float, required=True)

    gelfond_parser = analyze_subparsers.add_parser("gelfond", parents=[common])
    gelfond_parser.add_argument("--N", type=parse_bignat, required=True)
    gelfond_parser.add_argument("--m1", type=int, required=True)
    gelfond_parser.add_argument("--m2", type=int, required=True)

    fit_parser = analyze_subparsers.add_parser("fit", parents=[common])
    fit_parser.add_argument(
        "--exponents",
        type=int,
        nargs=2,
        metavar=("LO", "HI"),
        help="Count collisions below 2^LO, ..., 2^HI and fit",
    )
    fit_parser.add_argument("--points", help="File with 'N count' lines")

    carries_parser = analyze_subparsers.add_parser("carries", parents=[common])
    carries_parser.add_argument("--k-lo", type=int, default=0)
    carries_parser.add_argument("--k-hi", type=int, required=True)

    # compare-bfile
    compare_parser = subparsers.add_parser(
        "compare-bfile", parents=[common], help="Compare a b-file with enumeration"
    )
    compare_parser.add_argument("path", help="Path to b-file")

    return parser


# -----------------------------------------------------------------------------


class Emitter:
    """Writes documents and row streams in the configured format."""

    def __init__(self, stream: TextIO, output_format: OutputFormat) -> None:
        self.stream = stream
        self.output_format = output_format

    def rows(self, rows: Iterable[Document]) -> int:
        count = 0
        if self.output_format == OutputFormat.CSV:
            writer: Optional[csv.DictWriter] = None
            for row in rows:
                if writer is None:
                    writer = csv.DictWriter(self.stream, fieldnames=list(row))
                    writer.writeheader()

                writer.writerow(row)
                count += 1

            return count

        for row in rows:
            self.document(row)
            count += 1

        return count

    def document(self, document: Document) -> None:
        if self.output_format == OutputFormat.PRETTY:
            print(json.dumps(document, indent=2), file=self.stream)
        elif self.output_format == OutputFormat.CSV:
            writer = csv.writer(self.stream)
            histogram = document.get("histogram")
            if isinstance(histogram, dict):
                writer.writerow(["value", "count"])
                writer.writerows(histogram.items())
                return

            writer.writerow(["key", "value"])
            for key, value in document.items():
                if isinstance(value, (dict, list)):
                    value = json.dumps(value)

                writer.writerow([key, value])
        else:
            print(json.dumps(document), file=self.stream)


@contextmanager
def _open_output(path: Optional[Path]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return

    try:
        with open(path, "w", encoding="utf-8", newline="") as output_file:
            yield output_file
    except ColliderError:
        # No partial results on failure
        path.unlink(missing_ok=True)
        raise


def _load_family_source(path: str) -> Union[constructor.ShiftFamily, Params]:
    with open(path, "r", encoding="utf-8") as params_file:
        data = json.load(params_file)

    if "family" in data:
        return constructor.ShiftFamily.from_dict(data["family"])

    if "params" in data:
        return constructor.ShiftFamily.from_dict(data)

    if "beta" in data:
        # Output of Params.to_dict, keeps its mode
        return Params.from_dict(data)

    return make_params(**data)


def _params_from_args(args: argparse.Namespace, N: Optional[int]) -> Params:
    if args.paper:
        return make_params(N=N, epsilon=args.epsilon, log_n=args.log_n)

    if None in (args.eta, args.m, args.J):
        raise InvalidInputError("Give --eta, --m and --J (or --paper, or --params)")

    return make_params(eta=args.eta, m=args.m, J=args.J)


def _interval_start(args: argparse.Namespace) -> Optional[int]:
    if args.bits is not None:
        return 1 << args.bits

    return args.N


def _family_from_args(
    args: argparse.Namespace, config: RunConfig
) -> constructor.ShiftFamily:
    N = _interval_start(args)
    if args.params:
        source = _load_family_source(args.params)
    else:
        source = _params_from_args(args, N)

    if isinstance(source, constructor.ShiftFamily):
        source.validate()
        return source

    return constructor.build_family(
        source, bound=args.bound, budget=args.anchor_budget, seed=config.seed
    )


def _progression_from_args(
    args: argparse.Namespace, config: RunConfig
) -> constructor.ProgressionSpec:
    N = _interval_start(args)
    if N is None:
        raise InvalidInputError("Give --N or --bits")

    family = _family_from_args(args, config)
    return constructor.make_progression(family, N, zeta=args.zeta)


# -----------------------------------------------------------------------------


def _run_digits(args: argparse.Namespace, emitter: Emitter) -> None:
    digit_string = digits.digits_of(args.n, args.base)
    document: Document = {
        "n": str(args.n),
        "base": args.base,
        "digits": digit_string.text(),
        "digit_sum": digit_string.digit_sum,
    }

    if args.trunc is not None:
        document["digit_sum_trunc"] = digits.digit_sum_trunc(
            args.n, args.base, args.trunc
        )

    if args.binomial:
        check = digits.binomial_valuation_check(args.n)
        document.update(check._asdict())
        if args.n <= BINOMIAL_ORACLE_MAX_N:
            v2, v3 = digits.central_binomial_valuations(args.n)
            document["oracle_v2"] = v2
            document["oracle_v3"] = v3

    emitter.document(document)


def _run_dist(args: argparse.Namespace, emitter: Emitter) -> None:
    if args.dist_command == "phi":
        emitter.document(distribution.phi_table(args.t, args.L, args.mode).to_dict())
    elif args.dist_command == "omega":
        value = distribution.omega(args.t, args.theta, args.L, args.mode)
        emitter.document(
            {
                "t": str(args.t),
                "theta": args.theta,
                "L": args.L,
                "real": value.real,
                "imag": value.imag,
                "abs": abs(value),
            }
        )
    elif args.dist_command == "moments":
        pair = distribution.moments(args.t, args.L)
        emitter.document(
            {"t": str(args.t), "L": args.L, "m1": str(pair.m1), "m2": str(pair.m2)}
        )
    else:
        if (args.nu is None) and (args.t is None):
            raise InvalidInputError("Give --nu and/or --t with --L")

        if args.nu is not None:
            emitter.document(distribution.check_m2_bound(args.nu).to_dict())

        if args.t is not None:
            if args.L is None:
                raise InvalidInputError("--t needs --L")

            check = distribution.check_omega_block_bound(args.t, args.theta, args.L)
            emitter.document({"t": str(args.t), "theta": args.theta, **check._asdict()})


def _run_construct(
    args: argparse.Namespace, config: RunConfig, emitter: Emitter
) -> None:
    family = _family_from_args(args, config)
    document: Document = {"family": family.to_dict()}

    N = _interval_start(args)
    if N is not None:
        spec = constructor.make_progression(family, N, zeta=args.zeta)
        document["progression"] = spec.to_dict()

    if args.check_samples > 0:
        report = constructor.verify_difference_property(
            family, samples=args.check_samples, seed=config.seed
        )
        document["difference_check"] = report.to_dict()

    emitter.document(document)


def _run_enum(args: argparse.Namespace, config: RunConfig, emitter: Emitter) -> None:
    kind = (
        collider.CollisionKind.ALMOST if args.almost else collider.CollisionKind.EXACT
    )
    records = collider.enumerate_collisions(
        args.limit,
        kind=kind,
        threads=config.threads,
        bases=args.bases,
        verify=args.verify,
    )

    if config.output_format == OutputFormat.BFILE:
        count = collider.write_bfile((r.n for r in records), emitter.stream)
    else:
        count = emitter.rows(r.to_dict() for r in records)

    _LOGGER.debug("Emitted %s record(s)", count)


def _run_patterns(
    args: argparse.Namespace, config: RunConfig, emitter: Emitter
) -> None:
    found = collider.find_patterns(
        args.limit, args.window, args.offsets, threads=config.threads
    )
    emitter.rows({"n": str(n)} for n in found)


def _run_forge(args: argparse.Namespace, config: RunConfig, emitter: Emitter) -> None:
    N = _interval_start(args)
    if N is None:
        raise InvalidInputError("Give --N or --bits")

    family = _family_from_args(args, config)
    certificate = collider.forge_collision(
        family, N, budget=args.budget, seed=config.seed, zeta=args.zeta
    )
    emitter.document(certificate.to_dict())


def _run_count(args: argparse.Namespace, config: RunConfig, emitter: Emitter) -> None:
    if args.levels:
        levels = collider.collision_levels(args.limit, threads=config.threads)
        emitter.rows(
            {"level": level, "count": count} for level, count in levels.items()
        )
        return

    checkpoints = args.checkpoints or [args.limit]
    counts = collider.count_collisions(args.limit, checkpoints, threads=config.threads)
    emitter.rows({"N": str(n), "count": count} for n, count in counts)


def _read_points(path: str) -> list[tuple[int, int]]:
    points: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as points_file:
        for line in points_file:
            line = line.strip()
            if line and (not line.startswith("#")):
                n_text, count_text = line.split()[:2]
                points.append((int(n_text), int(count_text)))

    return points


def _run_analyze(
    args: argparse.Namespace, config: RunConfig, emitter: Emitter
) -> None:
    command = args.analyze_command
    if command == "concentration":
        spec = _progression_from_args(args, config)
        report = analysis.sample_concentration(
            spec,
            args.samples,
            seed=config.seed,
            threads=config.threads,
            threshold=args.threshold,
        )
        emitter.document(report.to_dict())
    elif command == "fairshare":
        spec = _progression_from_args(args, config)
        share = analysis.fair_share(
            spec, args.modulus, args.samples, seed=config.seed, threads=config.threads
        )
        emitter.document({"modulus": args.modulus, **share._asdict()})
    elif command == "orthogonality":
        check = analysis.exp_sum_orthogonality(
            args.L, args.modulus2, args.modulus3, args.lo, args.hi, args.m, args.t
        )
        emitter.document(check._asdict())
    elif command == "hoeffding":
        hoeffding = analysis.hoeffding_tail(args.T, args.t)
        emitter.document(
            {
                "T": args.T,
                "t": args.t,
                "empirical": str(hoeffding.empirical),
                "bound": hoeffding.bound,
                "holds": hoeffding.holds,
            }
        )
    elif command == "gelfond":
        emitter.document(
            analysis.gelfond_counts(
                args.N, args.m1, args.m2, threads=config.threads
            ).to_dict()
        )
    elif command == "fit":
        if args.points:
            points = _read_points(args.points)
        elif args.exponents:
            lo, hi = args.exponents
            checkpoints = [1 << e for e in range(lo, hi + 1)]
            points = collider.count_collisions(
                checkpoints[-1], checkpoints, threads=config.threads
            )
        else:
            raise InvalidInputError("Give --exponents or --points")

        emitter.document(analysis.fit_exponent(points).to_dict())
    else:
        report = digits.power_of_two_carry_check(args.k_lo, args.k_hi)
        emitter.document(report.to_dict())


def _run_compare(
    args: argparse.Namespace, config: RunConfig, emitter: Emitter
) -> None:
    comparison = collider.compare_bfile(args.path, threads=config.threads)
    emitter.document(
        {
            "path": args.path,
            "checked": comparison.checked,
            "matches": comparison.matches,
            "first_mismatch": comparison.first_mismatch,
        }
    )


def dispatch(args: argparse.Namespace, config: RunConfig) -> None:
    with _open_output(config.output_path) as stream:
        emitter = Emitter(stream, config.output_format)
        if args.subcommand == "digits":
            _run_digits(args, emitter)
        elif args.subcommand == "dist":
            _run_dist(args, emitter)
        elif args.subcommand == "construct":
            _run_construct(args, config, emitter)
        elif args.subcommand == "enum":
            _run_enum(args, config, emitter)
        elif args.subcommand == "patterns":
            _run_patterns(args, config, emitter)
        elif args.subcommand == "forge":
            _run_forge(args, config, emitter)
        elif args.subcommand == "count":
            _run_count(args, config, emitter)
        elif args.subcommand == "analyze":
            _run_analyze(args, config, emitter)
        else:
            _run_compare(args, config, emitter)


def main(argv: Optional[list[str]] = None) -> int:
    """Run collider and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 2

    logging.basicConfig(level=logging.DEBUG if args.debug else logging.INFO)
    _LOGGER.debug(args)

    if (args.format == OutputFormat.BFILE.value) and (args.subcommand != "enum"):
        parser.print_usage(sys.stderr)
        print("collider: error: --format bfile is only for enum", file=sys.stderr)
        return 2

    try:
        config = RunConfig.from_args(
            args.subcommand, args.seed, args.threads, args.format, args.output
        )
        dispatch(args, config)
    except ColliderError as err:
        _LOGGER.error("%s: %s", err.__class__.__name__, err)
        statistics = getattr(err, "statistics", None)
        if statistics:
            _LOGGER.error("Statistics: %s", statistics)

        return 1

    return 0


# -----------------------------------------------------------------------------

if __name__ == "__main__":
    sys.exit(main())
