"""
Command line surface: python -m app.cli <command> PROBLEM [options]

Exit codes: 0 success, 1 verification failure, 2 exceptional family / no
partition / resource limit, 3 unreadable input, 4 non-essential family.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.config import settings, setup_logging
from app.errors import InvalidInput, ReskitError
from app.services.construction_engine import STRATEGIES
from app.services import problem_service

logger = logging.getLogger(__name__)


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
        logger.info(f"wrote {output}")
    else:
        sys.stdout.write(text)


def cmd_essential(args: argparse.Namespace) -> int:
    problem = problem_service.read_problem(args.problem)
    report = problem_service.essential_report(problem_service.family_from_problem(problem))
    _emit(problem_service.dump(report), args.output)
    if not report.essential:
        print(f"not essential: {report.message}", file=sys.stderr)
        return 4
    return 0


def cmd_partition(args: argparse.Namespace) -> int:
    problem = problem_service.read_problem(args.problem)
    document = problem_service.run_partition(problem, args.strategy, seed=args.seed, jobs=args.jobs)
    _emit(problem_service.dump(document), args.output)
    return 0


def _cells(args: argparse.Namespace) -> Optional[list]:
    if getattr(args, "partition", None):
        return problem_service.read_partition_cells(args.partition)
    return None


def cmd_cdeg(args: argparse.Namespace) -> int:
    problem = problem_service.read_problem(args.problem)
    result = problem_service.run_cdeg(
        problem, args.strategy, _cells(args), seed=args.seed, jobs=args.jobs
    )
    _emit(problem_service.dump(result), args.output)
    return 0


def cmd_residue(args: argparse.Namespace) -> int:
    problem = problem_service.read_problem(args.problem)
    cert, document = problem_service.run_residue(
        problem,
        args.strategy,
        _cells(args),
        seed=args.seed,
        jobs=args.jobs,
        homogenized=args.homogenize,
    )
    _emit(problem_service.dump(document), args.output)
    print(f"determinant: {document.determinant}", file=sys.stderr)
    print(f"cdeg: {cert.degree}", file=sys.stderr)
    if cert.vanishing:
        print("WARNING: vanishing certificate (cdeg = 0), element not useful", file=sys.stderr)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    problem = problem_service.read_problem(args.problem)
    cells = _cells(args)
    if cells is None:
        cells = problem.partition
    if cells is None:
        raise InvalidInput("verify needs --partition or a partition inside the problem file")
    report = problem_service.run_verify(problem, cells, seed=args.seed, jobs=args.jobs)
    _emit(problem_service.dump(report), args.output)
    for check in report.checks:
        if not check.passed:
            print(f"FAILED {check.name} ({check.clause}): {check.detail}", file=sys.stderr)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", metavar="PROBLEM", help="problem file (JSON)")
    common.add_argument("--seed", type=int, default=None, help=f"generic point seed (default {settings.RESKIT_SEED})")
    common.add_argument("--jobs", type=int, default=None, help="worker threads for per-face work")
    common.add_argument("--output", "-o", default=None, help="write the document here instead of stdout")
    common.add_argument("--log-level", default=None, help="overrides RESKIT_LOG")

    parser = argparse.ArgumentParser(
        prog="reskit", description="Residue matrices and combinatorial degree certificates"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("essential", parents=[common], help="check essentiality of the family")
    p.set_defaults(handler=cmd_essential)

    p = sub.add_parser("partition", parents=[common], help="construct a partition matrix")
    p.add_argument("--strategy", choices=STRATEGIES, default="auto")
    p.set_defaults(handler=cmd_partition)

    p = sub.add_parser("cdeg", parents=[common], help="combinatorial degree of a partition")
    p.add_argument("--strategy", choices=STRATEGIES, default="auto")
    p.add_argument("--partition", default=None, help="partition or certificate file to use")
    p.set_defaults(handler=cmd_cdeg)

    p = sub.add_parser("residue", parents=[common], help="certified residue element")
    p.add_argument("--strategy", choices=STRATEGIES, default="auto")
    p.add_argument("--partition", default=None, help="partition or certificate file to use")
    p.add_argument("--homogenize", action="store_true", help="add facet-indexed exponents")
    p.set_defaults(handler=cmd_residue)

    p = sub.add_parser("verify", parents=[common], help="run every check on a partition")
    p.add_argument("--partition", default=None, help="partition or certificate file to check")
    p.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse usage errors are input errors here
        return 3 if e.code == 2 else int(e.code or 0)
    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except ReskitError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
