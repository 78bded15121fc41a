"""Command-line entry points: baseline, scan, and gen.

baseline loads a case and area and reports the base quantities and
border weights. scan additionally evaluates every in-service area line
outage with severity and ratio statistics. gen writes a seeded random
case and area pair for testing. Exit codes: 0 success, 1 bad input,
2 degenerate area, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__
from .areas import load_area_spec, partition_area, save_area
from .dcflow import solve_angles
from .errors import DegenerateAreaError, NumericError, ParseError, ValidationError
from .netgen import generate_case
from .network import load_case, save_case
from .outage import ratio_statistics, scan_outages
from .reduction import reduce_area
from .report import (
    build_scan_report,
    render_baseline_csv,
    render_baseline_json,
    render_baseline_table,
    render_scan_csv,
    render_scan_json,
    render_scan_table,
    report_meta,
)
from .severity import severity_scan, stress_direction


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--case", required=True, help="case file (JSON)")
    sub.add_argument("--area", required=True, help="area spec file (JSON)")
    sub.add_argument("--format", choices=("table", "csv", "json"),
                     default="table", help="output format")
    sub.add_argument("--out", default=None, help="write output here instead of stdout")
    sub.add_argument("--jobs", type=int, default=None,
                     help="worker count for the scan (default: all cores)")
    sub.add_argument("--fast-path", choices=("on", "off"), default="on",
                     dest="fast_path",
                     help="rank-one post-outage updates instead of refactorizing")


def _load_inputs(args):
    net = load_case(args.case)
    spec = load_area_spec(args.area, net)
    part = partition_area(net, spec)
    return net, part


def cmd_baseline(args) -> int:
    net, part = _load_inputs(args)
    base = reduce_area(net, part, solve_angles(net))
    meta = report_meta(args.case, args.area, __version__)
    if args.format == "csv":
        text = render_baseline_csv(base)
    elif args.format == "json":
        text = render_baseline_json(meta, base)
    else:
        text = render_baseline_table(base)
    _write_text(args.out, text)
    return 0


def cmd_scan(args) -> int:
    started = time.perf_counter()
    net, part = _load_inputs(args)
    sol = solve_angles(net)
    base = reduce_area(net, part, sol)
    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    fast = args.fast_path == "on"

    results = scan_outages(net, part, base, fast_path=fast, jobs=jobs)
    direction = stress_direction(net, part, sol)
    severities = severity_scan(net, part, results, direction=direction,
                               fast_path=fast, jobs=jobs)
    try:
        stats = ratio_statistics(results)
    except ValidationError:
        stats = None

    meta = report_meta(args.case, args.area, __version__)
    report = build_scan_report(meta, base, results, severities, stats)
    if args.format == "csv":
        text = render_scan_csv(report)
    elif args.format == "json":
        text = render_scan_json(report)
    else:
        text = render_scan_table(report)
    _write_text(args.out, text)
    elapsed = time.perf_counter() - started
    print(f"scanned {len(results)} outages in {elapsed:.2f} s", file=sys.stderr)
    return 0


def cmd_gen(args) -> int:
    net, spec = generate_case(
        args.seed,
        buses=args.buses,
        topology=args.topology,
        paths=args.paths,
        extra_lines=args.lines,
        limit_factor=args.limit_factor,
    )
    save_case(net, args.out)
    save_area(spec, args.area_out)
    print(
        f"wrote {args.out} ({len(net.buses)} buses, {len(net.lines)} lines) "
        f"and {args.area_out}",
        file=sys.stderr,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="areaangle",
        description="Area-angle monitoring of a DC network: baseline, outage scan, severity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    baseline = subs.add_parser("baseline", help="base-case area quantities and weights")
    _common_flags(baseline)
    baseline.set_defaults(func=cmd_baseline)

    scan = subs.add_parser("scan", help="evaluate every single area-line outage")
    _common_flags(scan)
    scan.set_defaults(func=cmd_scan)

    gen = subs.add_parser("gen", help="generate a seeded random case and area spec")
    gen.add_argument("--seed", type=int, required=True, help="rng seed")
    gen.add_argument("--buses", type=int, default=30, help="bus count")
    gen.add_argument("--topology", choices=("mesh", "ladder", "bypass"),
                     default="mesh", help="network layout")
    gen.add_argument("--paths", type=int, default=3,
                     help="parallel chains for ladder/bypass layouts")
    gen.add_argument("--lines", type=int, default=None,
                     help="extra lines beyond the base construction")
    gen.add_argument("--limit-factor", type=float, default=None,
                     dest="limit_factor",
                     help="flow limits at this multiple of base loading")
    gen.add_argument("--out", required=True, help="case file to write")
    gen.add_argument("--area-out", required=True, dest="area_out",
                     help="area spec file to write")
    gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DegenerateAreaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
