"""Command-line entry point: ``lanekit run|eval|gen-masks|plot-data``.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, LanekitError
from .evalrun import evaluate_run, execute, generate_masks, load_scenario, write_plot_data

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lanekit", description="Lane pose estimation toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario and write estimates, truth and report")
    r.add_argument("--scenario", required=True, type=Path)
    r.add_argument("--out", required=True, type=Path)
    e = sub.add_parser("eval", help="recompute report.json for a run directory")
    e.add_argument("--run", required=True, type=Path)
    g = sub.add_parser("gen-masks", help="render a scenario's masks as PGM files")
    g.add_argument("--scenario", required=True, type=Path)
    g.add_argument("--out", type=Path, default=None)
    d = sub.add_parser("plot-data", help="write heading/offset series for plotting")
    d.add_argument("--run", required=True, type=Path)
    d.add_argument("--out", type=Path, default=None)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            report = execute(load_scenario(args.scenario), args.out)
            if report is not None:
                print(report.table_row())
        elif args.command == "eval":
            print(evaluate_run(args.run).table_row())
        elif args.command == "gen-masks":
            out = args.out or args.scenario.with_suffix("").with_name(args.scenario.stem + "_masks")
            print(generate_masks(load_scenario(args.scenario), out))
        elif args.command == "plot-data":
            print(write_plot_data(args.run, args.out))
    except ConfigError as exc:
        print(f"lanekit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, KeyError) as exc:
        print(f"lanekit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LanekitError as exc:
        print(f"lanekit: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
