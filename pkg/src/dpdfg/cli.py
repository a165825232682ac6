"""Command-line front end: anonymize one log, run parameter sweeps, or
inspect a log's DFG.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .bench import SweepSpec, run_sweep
from .dfg import AggregationKind, aggregate, build_dfg, choose_time_unit, convert_unit
from .eventlog import NS_PER_UNIT, ColumnMapping, IngestError, parse_csv, parse_xes
from .noise import DEFAULT_SEED, SEED_ENV_VAR
from .pipeline import (
    DisclosureRequest,
    Mode,
    disclose,
    emit_csv,
    emit_dot,
    emit_json,
)
from .risk import RiskParams
from .utility import UtilityParams

# exit codes: 0 success, 1 data/domain error, 2 usage error (argparse)
DATA_ERROR = 1


def _resolve_seed(flag_value: str | None) -> int:
    if flag_value is None:
        env = os.environ.get(SEED_ENV_VAR)
        return int(env) if env else DEFAULT_SEED
    if flag_value == "random":
        return random.SystemRandom().randrange(2**63)
    return int(flag_value)


def _load_log(path: str, fmt: str, args):
    source = Path(path).read_bytes()
    if fmt == "auto":
        fmt = "xes" if path.lower().endswith(".xes") else "csv"
    if fmt == "xes":
        return parse_xes(source)
    mapping = ColumnMapping(
        case_col=args.case_col,
        activity_col=args.activity_col,
        timestamp_col=args.timestamp_col,
        timestamp_format=args.timestamp_format,
        number_unit=args.timestamp_unit,
    )
    return parse_csv(source, mapping)


def _add_input_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="path to the event log")
    parser.add_argument("--input-format", choices=["auto", "csv", "xes"], default="auto")
    parser.add_argument("--case-col", default="case")
    parser.add_argument("--activity-col", default="activity")
    parser.add_argument("--timestamp-col", default="timestamp")
    parser.add_argument("--timestamp-format", choices=["auto", "iso", "number"], default="auto")
    parser.add_argument("--timestamp-unit", choices=sorted(NS_PER_UNIT), default="h",
                        help="unit of numeric timestamps (default: hours)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpdfg", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    anon = sub.add_parser("anonymize", help="disclose a DFG under differential privacy")
    _add_input_flags(anon)
    anon.add_argument("--agg", default="frequency", help="frequency|sum|min|max|avg")
    anon.add_argument("--delta", type=float, help="guessing-advantage target (P1)")
    anon.add_argument("--mape", type=float, help="percentage-error target (P2)")
    anon.add_argument("--beta", type=float, default=0.05, help="noise-exceedance probability (P2)")
    anon.add_argument("--precision", type=float, default=0.5,
                      help="guess window as a fraction of the edge range")
    anon.add_argument("--seed", default=None, help="integer seed, or 'random'")
    anon.add_argument("--runs", type=int, default=1)
    anon.add_argument("--include-boundary-time", action="store_true",
                      help="keep virtual start/end edges in time-annotated output")
    anon.add_argument("--time-unit", choices=sorted(NS_PER_UNIT), default=None,
                      help="bypass time-unit auto-scaling")
    anon.add_argument("--threads", type=int, default=1)
    anon.add_argument("--annotate-debug", action="store_true",
                      help="add epsilon/APE labels to DOT output")
    anon.add_argument("--format", choices=["json", "csv", "dot"], default="json")
    anon.add_argument("--out", default=None, help="output path (default: stdout)")

    sweep = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    sweep.add_argument("--config", required=True, help="sweep configuration (JSON)")
    sweep.add_argument("--out", default=None, help="grid CSV path (default: stdout)")
    sweep.add_argument("--threads", type=int, default=1)

    inspect = sub.add_parser("inspect", help="summarize a log and its DFG")
    _add_input_flags(inspect)
    inspect.add_argument("--agg", default="frequency")
    return parser


def _run_anonymize(args, parser) -> int:
    if (args.delta is None) == (args.mape is None):
        parser.error("--delta and --mape are mutually exclusive; provide exactly one")
    try:
        kind = AggregationKind.parse(args.agg)
        seed = _resolve_seed(args.seed)
        if args.delta is not None:
            request = DisclosureRequest(
                mode=Mode.P1,
                aggregation=kind,
                risk=RiskParams(args.delta, args.precision),
                precision=args.precision,
                seed=seed,
                runs=args.runs,
                include_boundary_time=args.include_boundary_time,
                time_unit=args.time_unit,
            )
        else:
            request = DisclosureRequest(
                mode=Mode.P2,
                aggregation=kind,
                utility=UtilityParams(args.mape, args.beta),
                precision=args.precision,
                seed=seed,
                runs=args.runs,
                include_boundary_time=args.include_boundary_time,
                time_unit=args.time_unit,
            )
        log = _load_log(args.input, args.input_format, args)
        dfg = build_dfg(log)
        annotated, report = disclose(dfg, request, threads=args.threads)
    except (IngestError, ValueError, OSError) as exc:
        print(f"dpdfg: error: {exc}", file=sys.stderr)
        return DATA_ERROR

    if args.format == "json":
        payload = emit_json(report)
    elif args.format == "csv":
        payload = emit_csv(report)
    else:
        payload = emit_dot(annotated, report, annotate_debug=args.annotate_debug)

    if not _write_output(payload, args.out):
        return DATA_ERROR
    print(f"dpdfg: {len(report.edges)} edges disclosed in {report.runtime_ms:.1f} ms", file=sys.stderr)
    return 0


def _write_output(payload: str, out: str | None) -> bool:
    if not out:
        sys.stdout.write(payload)
        return True
    try:
        Path(out).write_text(payload, encoding="utf-8")
    except OSError as exc:
        print(f"dpdfg: error: cannot write {out}: {exc}", file=sys.stderr)
        return False
    return True


def _run_sweep(args) -> int:
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        spec = SweepSpec.from_dict(config)
        grid_csv = run_sweep(spec, threads=args.threads)
    except (IngestError, ValueError, OSError, KeyError) as exc:
        print(f"dpdfg: error: {exc}", file=sys.stderr)
        return DATA_ERROR
    if not _write_output(grid_csv, args.out):
        return DATA_ERROR
    return 0


def _run_inspect(args) -> int:
    try:
        kind = AggregationKind.parse(args.agg)
        log = _load_log(args.input, args.input_format, args)
        dfg = build_dfg(log)
    except (IngestError, ValueError, OSError) as exc:
        print(f"dpdfg: error: {exc}", file=sys.stderr)
        return DATA_ERROR
    lines = [
        f"traces: {len(log)}",
        f"events: {log.event_count()}",
        f"activities: {len(dfg.activities)}",
        f"edges: {len(dfg.edges)}",
    ]
    if kind.is_time and dfg.edges:
        unit = choose_time_unit(dfg, kind)
        scaled = convert_unit(dfg, unit)
        lines.append(f"time unit ({kind.value}): {unit}")
        for key in sorted(scaled.edges):
            e = scaled.edges[key]
            lines.append(
                f"  {key[0]} -> {key[1]}: n={e.frequency} {kind.value}={aggregate(e, kind):.6g}"
            )
    else:
        for key in sorted(dfg.edges):
            e = dfg.edges[key]
            lines.append(f"  {key[0]} -> {key[1]}: n={e.frequency}")
    print("\n".join(lines))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "anonymize":
        return _run_anonymize(args, parser)
    if args.subcommand == "sweep":
        return _run_sweep(args)
    return _run_inspect(args)


if __name__ == "__main__":
    sys.exit(main())
