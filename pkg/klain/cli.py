"""
Command-line entry point.

    python -m klain intrinsic --shape cube --n 4 --k 2
    python -m klain relation --f hw:2,0 --n 4 --trials 50 --seed 1 --tol 1e-8
    python -m klain counterexample --case n5-hw33 --format csv --out n5.csv

Exit codes: 0 on success, 1 when --assert is given and a verdict is "fail",
2 on usage or input errors.
"""

import sys
import logging
import argparse
from typing import List, Optional

from .errors import KlainError
from .experiment_runner import RUNNERS, run_experiment
from .lab_utils.config import COUNTEREXAMPLE_CASES, LOG_LEVEL, MC_SAMPLES, MC_WORKERS, RELATION_PASS_TOLERANCE
from .lab_utils.utils import (
    create_error_report,
    default_report_path,
    dump_report,
    save_report,
    validate_report_structure,
)

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 50


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="ambient dimension")
    common.add_argument("--k", type=int, help="degree (dimension of the planes)")
    common.add_argument("--f", default="const:1", help="Klain function spec, e.g. hw:2,0 or quad:Q.json")
    common.add_argument("--shape", help="built-in shape kind (cube, simplex, ...)")
    common.add_argument("--param", action="append", help="shape parameter key=value, repeatable")
    common.add_argument("--polytope", help="polytope JSON file")
    common.add_argument("--t-grid", dest="t_grid", help="step sizes start:stop, halving")
    common.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    common.add_argument("--samples", type=int, default=MC_SAMPLES)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=RELATION_PASS_TOLERANCE)
    common.add_argument("--workers", type=int, default=MC_WORKERS)
    common.add_argument("--certify", action="store_true", help="back a passing relation test with a quadratic fit")
    common.add_argument("--case", choices=sorted(COUNTEREXAMPLE_CASES))
    common.add_argument("--out", help="write the report here instead of standard output")
    common.add_argument("--save", action="store_true", help="write the report under the artifacts reports directory")
    common.add_argument("--format", "--report", dest="format", choices=["json", "csv"], default="json")
    common.add_argument("--assert", dest="assert_verdicts", action="store_true",
                        help="exit 1 when any verdict is 'fail'")
    common.add_argument("--verbose", "-v", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="klain", description="Angular valuation lab")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    common = _common_parser()
    for name in RUNNERS:
        sub.add_parser(name, parents=[common])
    return parser


def _check_required(opts: argparse.Namespace) -> Optional[str]:
    needs_n = {"relation", "relation-k", "fit", "dimension", "simplex"}
    needs_k = {"evaluate", "relation-k", "fit", "dimension"}
    if opts.subcommand in needs_n and opts.n is None:
        return f"{opts.subcommand} needs --n"
    if opts.subcommand in needs_k and opts.k is None:
        return f"{opts.subcommand} needs --k"
    if opts.subcommand == "counterexample" and not opts.case:
        return f"counterexample needs --case (one of {', '.join(sorted(COUNTEREXAMPLE_CASES))})"
    if opts.trials < 1 or opts.samples < 1 or opts.workers < 1:
        return "--trials, --samples and --workers must be positive"
    return None


def run(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        opts = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    opts.argv = argv

    logging.basicConfig(level=logging.DEBUG if opts.verbose else LOG_LEVEL, stream=sys.stderr)

    problem = _check_required(opts)
    if problem:
        print(f"klain {opts.subcommand}: error: {problem}", file=sys.stderr)
        return 2

    try:
        report = run_experiment(opts)
    except KlainError as e:
        message = f"{type(e).__name__}: {e}"
        print(f"❌ {message}", file=sys.stderr)
        out = opts.out or (default_report_path(opts.subcommand) if opts.save else None)
        if out:
            # error reports are JSON regardless of --format
            payload = create_error_report(argv, opts.subcommand, message, opts.seed, opts.samples, opts.workers, opts.tol)
            save_report(payload, out, "json")
            print(f"💾 Error report saved to: {out}", file=sys.stderr)
        return 2

    payload = report.to_dict()
    is_valid, missing = validate_report_structure(payload)
    if not is_valid:
        logger.warning(f"report is missing fields: {missing}")

    out = opts.out or (default_report_path(opts.subcommand, opts.format) if opts.save else None)
    if out:
        path = save_report(payload, out, opts.format, report.tables)
        print(f"💾 Report saved to: {path}", file=sys.stderr)
    else:
        sys.stdout.write(dump_report(payload, opts.format, report.tables) + "\n")

    if opts.assert_verdicts and report.failed:
        return 1
    return 0


def main():
    sys.exit(run())
