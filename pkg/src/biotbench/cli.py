"""Command line entry point: config-driven benchmark runs with CSV output.

Subcommands: run, convergence, sweep-alpha, compare.  Each reads a JSON
config, executes the corresponding driver and writes results.csv (plus
auxiliary plot/snapshot files) into the output directory.

Exit codes: 0 on success, 2 on config errors, 3 on solver failures in
non-sweep runs.
"""

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import cmd_compare, cmd_convergence, cmd_run, cmd_sweep_alpha
from .linsolve import SolverFailure

_COMMANDS = {
    "run": cmd_run,
    "convergence": cmd_convergence,
    "sweep-alpha": cmd_sweep_alpha,
    "compare": cmd_compare,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="biotbench",
        description="Poroelasticity time-stepping benchmarks on the unit square")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument("--out", default=None,
                         help="output directory (overrides the config)")
        cmd.add_argument("--workers", type=int, default=None,
                         help="parallel worker count for sweep points")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.out is not None:
            config.output_dir = args.out
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers", "expected a positive integer")
            config.workers = args.workers
        table, aux = _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table.write_csv(out_dir / "results.csv")
    for name, text in aux.items():
        (out_dir / name).write_text(text, encoding="utf-8")
    if table.summary:
        (out_dir / "summary.txt").write_text("\n".join(table.summary) + "\n",
                                             encoding="utf-8")
        for line in table.summary:
            print(line)
    print(f"wrote {out_dir / 'results.csv'} ({len(table.rows)} row(s))")
    return 0


if __name__ == "__main__":
    sys.exit(main())
