"""Command-line entry point.

Verbs: spectrum, sweep-cavity, sweep-tau, multiwell, converge. Each takes a
JSON config (--config), writes a CSV and a JSON report into --out, and exits
with 0 on success, 2 on a config error, 3 when every sweep point failed
numerically (partial failures exit 0 with flagged rows).
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, load_config
from .harness import (
    RUNNERS,
    build_pipeline,
    default_workers,
    dump_basis_csv,
    dump_catalog_csv,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkcond",
        description="Dark vertical conductance of a cavity-embedded heterostructure",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in RUNNERS:
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help=f"sweep-point workers (default ${'{'}DARKCOND_WORKERS{'}'} or 1)")
        p.add_argument("--dump-basis", action="store_true",
                       help="also write basis.csv (z, V, phi_j)")
        p.add_argument("--dump-catalog", action="store_true",
                       help="also write catalog.csv (transition table)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        runner, header = RUNNERS[args.verb]
        workers = args.workers if args.workers is not None else default_workers()
        report = runner(config, workers=workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(args.out, exist_ok=True)
    csv_name = config.outputs.get("csv", f"{args.verb}.csv")
    report_name = config.outputs.get("report", f"{args.verb}_report.json")
    csv_path = os.path.join(args.out, csv_name)
    report_path = os.path.join(args.out, report_name)
    write_csv(csv_path, header, report.rows)
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")

    if args.dump_basis or args.dump_catalog:
        pipe = build_pipeline(config)
        if args.dump_basis:
            dump_basis_csv(os.path.join(args.out, config.outputs.get(
                "basis_csv", "basis.csv")), pipe.basis, pipe.potential)
        if args.dump_catalog:
            dump_catalog_csv(os.path.join(args.out, config.outputs.get(
                "catalog_csv", "catalog.csv")), pipe.catalog)

    if report.all_flagged:
        print("error: every sweep point failed numerically", file=sys.stderr)
        return EXIT_NUMERICAL
    if report.n_flagged:
        print(f"warning: {report.n_flagged}/{len(report.rows)} sweep points flagged",
              file=sys.stderr)
    print(f"wrote {csv_path} and {report_path}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
