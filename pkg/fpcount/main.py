"""
fpcount command line: single-pair reports, sweeps, verification suites and arc experiments.

stdout carries data only (CSV, JSON, the verify matrix); logs go to stderr.
"""
import argparse
import inspect
import json
import logging
import sys
from typing import List, Optional, TextIO

from loguru import logger
from pydantic import ValidationError

from fpcount import __version__
from fpcount.config import (
    DEFAULT_STEP_DIVISOR,
    LOG_FILE,
    LOG_LEVEL,
    QUADRATURE_LIMIT,
    STREAM_THRESHOLD,
    V_DIRECT_LIMIT,
)
from fpcount.errors import CapacityError, DomainError, FrobeniusError, OutputError
from fpcount.models.reports import (
    CSV_HEADER,
    ArcEntry,
    ArcReport,
    CheckResult,
    QuadratureReport,
    SupProbe,
    SweepConfig,
)
from fpcount.services import counts, expsum
from fpcount.services.sieve_cache import get_sieve
from fpcount.services.verification_service import VerificationService
from fpcount.tasks import SweepRunner

STDERR_FORMAT = ("<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level}</level> | "
                 "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>")
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level} | {name}:{function}:{line} - {message}"


class InterceptHandler(logging.Handler):
    """Forward standard-library records from the services into loguru."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno
        frame, depth = inspect.currentframe(), 0
        while frame and (depth == 0 or frame.f_code.co_filename == logging.__file__):
            frame = frame.f_back
            depth += 1
        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def configure_logging(level: str = LOG_LEVEL, log_file: Optional[str] = LOG_FILE) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level, format=STDERR_FORMAT)
    if log_file:
        logger.add(log_file, level="DEBUG", rotation="10 MB", retention="1 week", format=FILE_FORMAT)
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise DomainError(message)


def _open_output(path: Optional[str]) -> TextIO:
    if path is None:
        return sys.stdout
    try:
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}") from e


def _tables_for(q: counts.CountQuery):
    return get_sieve(q.root) if q.root <= STREAM_THRESHOLD else None


def cmd_count(args: argparse.Namespace) -> int:
    q = counts.new_query(args.c, args.d, args.k)
    report = counts.count_report(q, _tables_for(q))
    if args.format == "json":
        print(json.dumps(report.model_dump(), indent=2))
    else:
        print(CSV_HEADER)
        print(report.csv_row())
    return 0


def _parse_k_list(raw: str) -> List[int]:
    try:
        return [int(k) for k in raw.split(",") if k.strip()]
    except ValueError:
        raise DomainError(f"--k must be a comma separated list of integers, got {raw!r}")


def cmd_table(args: argparse.Namespace) -> int:
    config = SweepConfig(
        c_range=(args.c_min, args.c_max),
        d_range=(args.d_min, args.d_max),
        k_list=_parse_k_list(args.k),
        pair_mode=args.pairs,
        seed=args.seed,
        output_format=args.format,
        output_path=args.output,
        threads=args.threads,
    )
    runner = SweepRunner(config)
    step = {"next": 0}

    def progress_callback(current: int, total: int, status: str) -> None:
        if current * 10 >= step["next"] * total:
            step["next"] = current * 10 // total + 1
            logger.info(f"Sweep {current}/{total}: {status}")

    runner.register_progress_callback(progress_callback)
    reports = runner.run()
    # a failed sweep must not truncate an existing output file
    out = _open_output(config.output_path)
    try:
        if config.output_format == "json":
            document = {
                "pair_mode": config.pair_mode,
                "seed": config.seed,
                "rows": [report.model_dump() for report in reports],
            }
            out.write(json.dumps(document, indent=2) + "\n")
        else:
            if config.random_count is not None:
                out.write(f"# pairs={config.pair_mode} seed={config.seed}\n")
            out.write(CSV_HEADER + "\n")
            for report in reports:
                out.write(report.csv_row() + "\n")
        out.flush()
    except OSError as e:
        raise OutputError(f"write failed: {e}") from e
    finally:
        if out is not sys.stdout:
            out.close()
    if config.output_path:
        logger.info(f"Wrote {len(reports)} rows to {config.output_path}")
    return 0


def _format_witness(result: CheckResult) -> str:
    if not result.witness:
        return ""
    return " ".join(f"{key}={value}" for key, value in result.witness.items())


def cmd_verify(args: argparse.Namespace) -> int:
    service = VerificationService(level=args.level)
    service.register_progress_callback(
        lambda current, total, status: logger.debug(f"verify {current}/{total}: {status}")
    )
    results = service.run()
    width = max(len(r.name) for r in results)
    print(f"{'check':<{width}}  status  {'instances':>9}  witness")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status:<6}  {r.instances:>9}  {_format_witness(r)}")
    failed = [r for r in results if not r.passed]
    for r in failed:
        logger.error(f"{r.name} failed at {_format_witness(r) or 'no instance'}: {r.detail}")
    return 1 if failed else 0


def cmd_arcs(args: argparse.Namespace) -> int:
    q = counts.new_query(args.c, args.d, args.k)
    sg = q.sg
    arcs = expsum.build_arcs(args.Q, sg.g)
    report = ArcReport(
        c=sg.c, d=sg.d, k=q.k, Q=args.Q, g=sg.g,
        warning=arcs.warning, disjoint=arcs.disjoint, contained=arcs.contained,
        arcs=[ArcEntry(**entry) for entry in expsum.arc_entries(arcs)],
    )
    if args.probes > 0 and sg.g > V_DIRECT_LIMIT:
        raise CapacityError(f"minor-arc probe for c={sg.c} d={sg.d} needs g <= {V_DIRECT_LIMIT}, got {sg.g}")
    if args.quadrature and sg.g > QUADRATURE_LIMIT:
        raise CapacityError(f"quadrature for c={sg.c} d={sg.d} needs g <= {QUADRATURE_LIMIT}, got {sg.g}")
    need_f = args.probes > 0 or args.quadrature
    tables = _tables_for(q) if need_f else None
    poly = expsum.build_f(q, tables) if need_f else None
    if args.probes > 0:
        probe = expsum.minor_sup_probe(q, arcs, args.probes, poly=poly)
        report.sup_probe = SupProbe(samples=args.probes, minor_points=probe.minor_points,
                                    sup_abs=probe.sup_abs, ratio=probe.ratio_to_f0)
    if args.quadrature:
        window = expsum.window_integral_quadrature(q, args.step_divisor, poly=poly,
                                                   start=float(arcs.window_start))
        major = expsum.major_integral_quadrature(q, arcs, args.step_divisor, poly=poly)
        report.quadrature = QuadratureReport(
            step_divisor=args.step_divisor, major=major, minor=window - major,
            window=window, psi=counts.weighted_psi(q, tables),
        )
    if args.h_probe:
        report.major_h_ratio = expsum.major_h_probe(sg, arcs)
    print(json.dumps(report.model_dump(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fpcount", description="Prime and prime-power counts in <c, d> semigroups")
    parser.add_argument("--version", action="version", version=f"fpcount {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    count = sub.add_parser("count", help="counts for one (c, d, k)")
    count.add_argument("--c", type=int, required=True)
    count.add_argument("--d", type=int, required=True)
    count.add_argument("--k", type=int, default=1)
    count.add_argument("--format", choices=["csv", "json"], default="csv")
    count.set_defaults(handler=cmd_count)

    table = sub.add_parser("table", help="CSV/JSON sweep over coprime pairs")
    table.add_argument("--c-min", type=int, required=True)
    table.add_argument("--c-max", type=int, required=True)
    table.add_argument("--d-min", type=int, required=True)
    table.add_argument("--d-max", type=int, required=True)
    table.add_argument("--k", default="1", help="comma separated list, e.g. 1,2")
    table.add_argument("--pairs", default="all-coprime", help="all-coprime or random:N")
    table.add_argument("--seed", type=int, default=0, help="64-bit seed for random:N (PCG64)")
    table.add_argument("--format", choices=["csv", "json"], default="csv")
    table.add_argument("--output", default=None)
    table.add_argument("--threads", type=int, default=1)
    table.set_defaults(handler=cmd_table)

    verify = sub.add_parser("verify", help="run the property suites")
    verify.add_argument("--level", choices=["quick", "full"], default="quick")
    verify.set_defaults(handler=cmd_verify)

    arcs = sub.add_parser("arcs", help="major/minor arc partition and probes")
    arcs.add_argument("--c", type=int, required=True)
    arcs.add_argument("--d", type=int, required=True)
    arcs.add_argument("--k", type=int, default=1)
    arcs.add_argument("--Q", type=int, required=True)
    arcs.add_argument("--probes", type=int, default=0, help="golden-ratio samples for the minor-arc sup")
    arcs.add_argument("--quadrature", action="store_true")
    arcs.add_argument("--step-divisor", type=int, default=DEFAULT_STEP_DIVISOR)
    arcs.add_argument("--h-probe", action="store_true", help="max |h| / (q d) over major arcs, q >= 2")
    arcs.set_defaults(handler=cmd_arcs)
    return parser


def _one_line(message: str) -> str:
    return " ".join(str(message).split())


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        return args.handler(args)
    except FrobeniusError as e:
        print(f"error:{e.kind}:{_one_line(e)}", file=sys.stderr)
    except ValidationError as e:
        reasons = "; ".join(err["msg"] for err in e.errors())
        print(f"error:domain:{_one_line(reasons)}", file=sys.stderr)
    except OSError as e:
        print(f"error:io:{_one_line(e)}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
