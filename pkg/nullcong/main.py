import argparse
import logging
import os
import sys
from typing import List, Optional

from .errors import ArgumentError, NullcongError
from .manifest_parser import ManifestParserError
from .report import FORMATS, ResidualReport, RunConfig, emit
from .suites import SUITE_NAMES, run_suite

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_EVALUATION = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _ulambda(value: str) -> Optional[float]:
    if value == "auto":
        return None
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {value!r}")


def _default_jobs() -> int:
    value = os.environ.get("NULLCONG_JOBS", "1")
    try:
        return max(int(value), 1)
    except ValueError:
        logger.warning("ignoring NULLCONG_JOBS=%r", value)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullcong",
        description="Verify twisting non-shearing Einstein metrics over almost CR bases.",
    )
    parser.add_argument("suite", choices=SUITE_NAMES + ("all",))
    parser.add_argument("--m", type=int, default=2, help="holomorphic rank of the base")
    parser.add_argument("--base", default="heisenberg", help="heisenberg, fs-lift or file:<path>")
    parser.add_argument("--lambda", dest="cosmological", type=float, default=1.0, help="Λ")
    parser.add_argument("--ulambda", type=_ulambda, default=None, help="Λ̲ or auto")
    parser.add_argument("--c", type=float, default=0.0, help="c̲")
    parser.add_argument("--samples", type=int, default=20)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--tol", type=float, default=1e-7)
    parser.add_argument("--phi-margin", type=float, default=0.2)
    parser.add_argument("--format", choices=FORMATS, default="json")
    parser.add_argument("--jobs", type=int, default=_default_jobs())
    parser.add_argument("--output", help="write the report to this file instead of stdout")
    parser.add_argument(
        "--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR")
    )
    parser.add_argument("--dump-manifest", help="directory for the JSON dump of a base manifest")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        suite=args.suite,
        m=args.m,
        base=args.base,
        cosmological=args.cosmological,
        ulambda=args.ulambda,
        c=args.c,
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        phi_margin=args.phi_margin,
        format=args.format,
        jobs=args.jobs,
    )


def _write(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(output, "w") as f:
        f.write(text)


def exit_code(report: ResidualReport) -> int:
    if report.failed_evaluation:
        return EXIT_EVALUATION
    return EXIT_PASS if report.passed else EXIT_FAIL


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr)

    try:
        config = config_from_args(args)
        report = run_suite(config, dump_path=args.dump_manifest)
    except ArgumentError as e:
        sys.stderr.write(f"nullcong: error: {e.message}\n")
        return EXIT_USAGE
    except ManifestParserError as e:
        sys.stderr.write(f"nullcong: {e.message}\n")
        return EXIT_EVALUATION
    except NullcongError as e:
        sys.stderr.write(f"nullcong: {e.message}\n")
        return EXIT_EVALUATION

    _write(emit(report, config.format), args.output)
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
