"""
Command line interface.

Exit codes: 0 success, 1 usage error, 2 unreadable model/suite/config,
3 verification failure, 4 enumeration cap exceeded.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from . import __version__
from .bench import analyze_model, emit_reports, run_benchmark
from .config import load_benchmark_config
from .corpus import bundled_bench_config
from .exceptions import (
    CircularInheritanceError,
    ConfigFormatError,
    ConfigNotFoundError,
    EnumerationOverflowError,
    GeneratorConfigError,
    IncompleteCoveringArrayError,
    ModelError,
    ModelNotFoundError,
    ModelValidationError,
    ProfileNotFoundError,
    SplcitError,
    SuiteFormatError,
)
from .feature_model import load_model, serialize_model
from .generators import ALGORITHMS, GeneratorConfig, generate
from .metrics import CSV_HEADER, compute_suite_metrics
from .sat_core import DEFAULT_ENUMERATION_CAP, enumerate_products, to_cnf, to_dimacs
from .synthetic import SyntheticSpec, synthetic_model, write_synthetic_model
from .tset_engine import (
    enumerate_valid_tsets,
    format_covering_array,
    read_covering_array,
    verify_covering_array,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_VERIFY = 3
EXIT_CAP = 4


class UsageError(Exception):
    """Raised by the argument parser instead of exiting."""

    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _write_output(text: str, output: Optional[str]) -> None:
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)


def _cmd_analyze(args: argparse.Namespace) -> int:
    report = analyze_model(args.model, cap=args.cap)
    print("\n".join(report.lines()))
    return EXIT_OK


def _cmd_generate(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    if args.config:
        config = load_benchmark_config(args.config).generator_config(args.seed)
    else:
        config = GeneratorConfig(seed=args.seed)
    ca = generate(args.algo, model, args.t, config)
    _write_output(format_covering_array(model, ca), args.output)
    logger.info(f"Generated {len(ca)} products in {ca.meta.generation_ms} ms")
    return EXIT_OK


def _load_suite(args: argparse.Namespace):
    model = load_model(args.model)
    ca = read_covering_array(model, args.suite)
    if ca.model_name != model.name:
        logger.warning(
            f"Suite was generated for model '{ca.model_name}', checking against '{model.name}'"
        )
    universe = enumerate_valid_tsets(model, ca.t)
    return model, ca, universe


def _cmd_metrics(args: argparse.Namespace) -> int:
    model, ca, universe = _load_suite(args)
    metrics = compute_suite_metrics(model, universe, ca)
    row = metrics.csv_row(model.name, ca.meta.algorithm, ca.meta.seed)
    print(",".join(CSV_HEADER))
    print(",".join(str(value) for value in row))
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    model, ca, universe = _load_suite(args)
    verification = verify_covering_array(model, universe, ca)
    if verification.ok:
        print(f"OK: {len(ca)} valid products cover all {len(universe)} valid {ca.t}-sets")
        return EXIT_OK
    for row in verification.invalid_rows:
        print(f"invalid product at row {row + 1}")
    for ts in verification.uncovered:
        print(f"uncovered {ca.t}-set: {ts.describe(model)}")
    print(
        f"FAILED: {len(verification.invalid_rows)} invalid products, "
        f"{len(verification.uncovered)} uncovered {ca.t}-sets"
    )
    return EXIT_VERIFY


def _cmd_bench(args: argparse.Namespace) -> int:
    overrides: Dict[str, Any] = {}
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.algorithms:
        overrides["algorithms"] = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    config_path = args.config or bundled_bench_config()
    config = load_benchmark_config(config_path, args.profile, overrides)
    report = run_benchmark(config, args.output)
    for path in emit_reports(report, args.output):
        logger.info(f"Report: {path}")
    print(f"{len(report.runs)} runs written to {args.output}")
    if report.skipped:
        for origin, reason in report.skipped:
            print(f"skipped {origin}: {reason}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    try:
        spec = SyntheticSpec(
            name=args.name or f"syn{args.features:02d}",
            features=args.features,
            seed=args.seed,
            group_ratio=args.group_ratio,
            xor_share=args.xor_share,
            mandatory_ratio=args.mandatory_ratio,
            ctc_density=args.ctc_density,
        )
    except ModelValidationError as e:
        raise UsageError(str(e)) from e
    if args.output:
        write_synthetic_model(spec, args.output)
    else:
        sys.stdout.write(serialize_model(synthetic_model(spec)))
    return EXIT_OK


def _cmd_products(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    products = enumerate_products(model, cap=args.cap)
    lines = [" ".join(model.names_of(fs.sel)) for fs in products]
    _write_output("\n".join(lines) + "\n", args.output)
    logger.info(f"Model '{model.name}' has {len(products)} products")
    return EXIT_OK


def _cmd_dimacs(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    _write_output(to_dimacs(to_cnf(model), list(model.feature_list)), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="splcit",
        description="Covering arrays and comparison metrics for feature models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Increase log verbosity (-v info, -vv debug)",
    )
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)
    commands.required = True

    analyze = commands.add_parser("analyze", help="Feature counts, product count, t-sets")
    analyze.add_argument("model")
    analyze.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    analyze.set_defaults(handler=_cmd_analyze)

    products = commands.add_parser("products", help="List every valid product")
    products.add_argument("model")
    products.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    products.add_argument("-o", "--output")
    products.set_defaults(handler=_cmd_products)

    gen = commands.add_parser("generate", help="Generate a covering array")
    gen.add_argument("model")
    gen.add_argument("--algo", choices=sorted(ALGORITHMS), default="greedy")
    gen.add_argument("--t", type=int, default=2)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--config", help="Benchmark config whose generator settings apply")
    gen.add_argument("-o", "--output")
    gen.set_defaults(handler=_cmd_generate)

    for name, handler, help_text in (
        ("metrics", _cmd_metrics, "Metrics of a covering-array file"),
        ("verify", _cmd_verify, "Check validity and completeness of a covering array"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("model")
        sub.add_argument("suite")
        sub.set_defaults(handler=handler)

    bench = commands.add_parser("bench", help="Run the benchmark protocol")
    bench.add_argument("--config", help="Benchmark configuration (default: bundled)")
    bench.add_argument("--profile")
    bench.add_argument("-o", "--output", required=True)
    bench.add_argument("--runs", type=int)
    bench.add_argument("--workers", type=int)
    bench.add_argument("--seed", type=int, help="Base seed")
    bench.add_argument("--algorithms", help="Comma-separated algorithm names")
    bench.set_defaults(handler=_cmd_bench)

    synth = commands.add_parser("synth", help="Write a synthetic feature model")
    synth.add_argument("--features", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--name")
    synth.add_argument("--group-ratio", type=float, default=0.3)
    synth.add_argument("--xor-share", type=float, default=0.5)
    synth.add_argument("--mandatory-ratio", type=float, default=0.25)
    synth.add_argument("--ctc-density", type=float, default=0.1)
    synth.add_argument("-o", "--output")
    synth.set_defaults(handler=_cmd_synth)

    dimacs = commands.add_parser("dimacs", help="Export the model's CNF in DIMACS format")
    dimacs.add_argument("model")
    dimacs.add_argument("-o", "--output")
    dimacs.set_defaults(handler=_cmd_dimacs)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    _configure_logging(args.verbose)

    try:
        return args.handler(args)
    except EnumerationOverflowError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except IncompleteCoveringArrayError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except (ModelError, SuiteFormatError, ConfigFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (
        ConfigNotFoundError,
        ModelNotFoundError,
        ProfileNotFoundError,
        CircularInheritanceError,
        GeneratorConfigError,
        UsageError,
        ValueError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SplcitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
