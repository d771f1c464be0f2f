"""Command line entry point: ``mwlab run | list-scenarios | reproduce``."""

from __future__ import annotations

import argparse
import sys

from mwlab.scenarios import PRESETS, TABLES, load_scenario, table_presets
from mwlab.simulate import run_scenario
from mwlab.tables import emit_table


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mwlab", description="Monte Carlo bias tables for minimum wage estimators.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario (preset name or JSON config path)")
    run.add_argument("--scenario", required=True)
    run.add_argument("--reps", type=int)
    run.add_argument("--regions", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--format", choices=("csv", "markdown"), default="csv")
    run.add_argument("--workers", type=int, default=1)

    sub.add_parser("list-scenarios", help="list built-in presets")

    rep = sub.add_parser("reproduce", help="run every panel of a table and print it as markdown")
    rep.add_argument("--table", required=True, type=str.upper, choices=TABLES)
    rep.add_argument("--reps", type=int)
    rep.add_argument("--seed", type=int)
    rep.add_argument("--workers", type=int, default=1)
    return p


def _write(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-scenarios":
            for name, cfg in PRESETS.items():
                print(f"{name:22s} {cfg.dgp:16s} {cfg.description}")
        elif args.command == "run":
            cfg = load_scenario(args.scenario).with_overrides(regions=args.regions, seed=args.seed)
            summary = run_scenario(cfg, replications=args.reps, workers=args.workers)
            _write(emit_table(summary, args.format), args.out)
        else:
            summaries = []
            for cfg in table_presets(args.table):
                cfg = cfg.with_overrides(seed=args.seed)
                summaries.append(run_scenario(cfg, replications=args.reps, workers=args.workers))
            print(emit_table(summaries, "markdown", title=f"Table {args.table}"), end="")
    except Exception as exc:
        print(f"mwlab: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
