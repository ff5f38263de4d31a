"""Command line entry point: solve, simulate, analyze, tables, serve.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 I/O error.
NETPROTECT_OUTDIR sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config, parse_session_config
from .engine import batch, records_to_csv, records_to_json, records_from_csv
from .equilibrium import UtilitySpec, pure_nash
from .game import GameError, Treatment
from .stats import StatsError, reproduce_tables, tabulate_records

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _outdir() -> Path:
    return Path(os.environ.get("NETPROTECT_OUTDIR", "."))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netprotect",
                     description="Network protection game toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="brute-force equilibrium analysis")
    solve.add_argument("--treatment", required=True,
                       choices=["bas-ind", "bas-net", "dec-ind", "dec-net"])
    solve.add_argument("--utility", default="risk_neutral",
                       help="risk_neutral, crra:RHO or cara:ALPHA")
    solve.add_argument("--out", help="write the JSON report here (default stdout)")
    solve.add_argument("--no-payoff-table", action="store_true",
                       help="omit the per-profile payoff table")

    sim = sub.add_parser("simulate", help="run seeded agent sessions")
    sim.add_argument("--config", help="JSON run configuration")
    sim.add_argument("--seed", type=int, help="override the master seed")
    sim.add_argument("--replications", type=int, default=None)
    sim.add_argument("--format", choices=["csv", "json"], default="csv")
    sim.add_argument("--out", help="output file (default stdout)")

    ana = sub.add_parser("analyze", help="tabulate a choice-log CSV")
    ana.add_argument("--log", required=True, help="choice log produced by simulate")
    ana.add_argument("--format", choices=["text", "json"], default="text")
    ana.add_argument("--out", help="output file (default stdout)")

    tab = sub.add_parser("tables", help="regenerate the study's summary tables")
    tab.add_argument("--out", help="directory for CSV files "
                                   "(default: print text report)")
    tab.add_argument("--method", default="t_pooled",
                     choices=["t_pooled", "t_unpooled", "z_pooled"])

    srv = sub.add_parser("serve", help="run the live-session HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--store", help="directory for session event logs")

    return parser


def _write(text: str, out: str | None) -> None:
    if out:
        path = Path(out)
        if not path.is_absolute() and "NETPROTECT_OUTDIR" in os.environ:
            path = _outdir() / path
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _cmd_solve(args) -> int:
    report = pure_nash(Treatment.from_label(args.treatment),
                       UtilitySpec.parse(args.utility))
    doc = report.to_json_dict(include_payoffs=not args.no_payoff_table)
    _write(json.dumps(doc, indent=2), args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    if args.config:
        config, doc = load_config(args.config)
    else:
        config, doc = parse_session_config({}), {}
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    replications = args.replications or doc.get("replications", 1)
    seeds = [config.master_seed + i for i in range(replications)]
    records, summary = batch([config], replications, seeds)
    if args.format == "json":
        _write(records_to_json(records), args.out)
    else:
        _write(records_to_csv(records), args.out)
    print(f"simulated {len(records)} records; shares: "
          + json.dumps(summary, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    path = Path(args.log)
    if not path.exists():
        raise ConfigError(f"log file not found: {path}")
    records = records_from_csv(path.read_text())
    tables = tabulate_records(records)
    warnings: list[str] = []
    doc = {
        "records": len(records),
        "warnings": warnings,
        "cells": [
            {
                "treatment": t.treatment, "slice": t.slice, "degree": t.degree,
                "no_buy": t.no_buy, "token_x": t.token_x, "token_y": t.token_y,
                "total": t.total,
            }
            for t in tables
        ],
    }
    if args.format == "json":
        _write(json.dumps(doc, indent=2), args.out)
    else:
        lines = [f"records: {len(records)}", "warnings: none" if not warnings else ""]
        for cell in doc["cells"]:
            scope = f"degree {cell['degree']}" if cell["degree"] else "all positions"
            lines.append(
                f"{cell['treatment']:8s} {cell['slice']:12s} {scope:13s} "
                f"no_buy={cell['no_buy']:4d} token_x={cell['token_x']:4d} "
                f"token_y={cell['token_y']:4d} total={cell['total']}")
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_tables(args) -> int:
    report = reproduce_tables(method=args.method)
    if args.out:
        outdir = Path(args.out)
        if not outdir.is_absolute() and "NETPROTECT_OUTDIR" in os.environ:
            outdir = _outdir() / outdir
        files = report.write_csv_files(outdir)
        print("\n".join(files))
    else:
        sys.stdout.write(report.render_text())
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(store_dir=args.store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "solve": _cmd_solve,
        "simulate": _cmd_simulate,
        "analyze": _cmd_analyze,
        "tables": _cmd_tables,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, GameError, StatsError) as exc:
        print(f"netprotect: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"netprotect: io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
