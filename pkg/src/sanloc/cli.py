"""Command-line entry point.

Subcommands:
  run <config>                 SNR sweep, writes results.csv and manifest.txt
  validate                     oracle self-checks, exit 2 on any failure
  fig2d <config> --scale <x>   sweep with both key shifts scaled

Exit codes: 0 success, 1 configuration error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import SanlocError
from .experiments import fig2d_sweep, load_config, run_sweep
from .validate import run_all_checks


def _parse_seeds(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise SanlocError(f"--seeds expects a comma-separated integer list, got {text!r}")


def _add_sweep_args(parser):
    parser.add_argument("config", help="path to a YAML experiment config")
    parser.add_argument("--out", default="results", help="output directory (default: results)")
    parser.add_argument("--seeds", default=None, help="comma-separated seed list overriding the config")
    parser.add_argument("--threads", type=int, default=1, help="worker threads over seeds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sanloc", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_sweep_args(sub.add_parser("run", help="run the configured SNR sweep"))
    sub.add_parser("validate", help="run the oracle self-checks")
    fig = sub.add_parser("fig2d", help="sweep with scaled key shifts")
    _add_sweep_args(fig)
    fig.add_argument("--scale", type=float, required=True, help="factor on both key shift magnitudes")
    return parser


def _load(args):
    config = load_config(args.config)
    if args.seeds is not None:
        config = replace(config, seeds=_parse_seeds(args.seeds))
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        results = run_all_checks()
        for res in results:
            print(res.line())
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
        return 2 if failed else 0
    try:
        config = _load(args)
        if args.command == "run":
            csv_path, manifest_path, rows = run_sweep(config, args.out, threads=args.threads)
        else:
            csv_path, manifest_path, rows = fig2d_sweep(
                config, args.scale, args.out, threads=args.threads
            )
    except SanlocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(rows)} rows to {csv_path}")
    print(f"wrote {manifest_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
