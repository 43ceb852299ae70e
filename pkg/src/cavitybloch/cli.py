"""Command-line entry point.

    cavitybloch run <experiment-id> [--config PATH] [--out DIR]
                    [--desk-scale] [--set key=value ...] [--no-figures]

Exit codes: 0 success, 2 configuration error, 3 numerical error.
The environment variable CAVITYBLOCH_THREADS caps the BLAS/FFT thread
count (serial by default).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np


def _apply_thread_env():
    threads = os.environ.get("CAVITYBLOCH_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitybloch",
        description="standing-wave cavity dynamics experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a named experiment")
    run.add_argument("experiment", help="experiment id (fig1, fig2, ..., custom)")
    run.add_argument("--config", type=Path, default=None,
                     help="INI config file ([experiment] / [overrides])")
    run.add_argument("--out", type=Path, default=Path("runs"),
                     help="output directory (default: runs/)")
    run.add_argument("--desk-scale", action="store_true",
                     help="use the reduced-size variant of expensive runs")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override one setting")
    run.add_argument("--no-figures", action="store_true",
                     help="emit data files only, skip figure rendering")
    return parser


def main(argv: list[str] | None = None) -> int:
    _apply_thread_env()
    args = build_parser().parse_args(argv)

    from .core import GridError, InvalidParameterError
    from .experiments import (
        ConfigError,
        ExperimentConfig,
        load_config,
        parse_override,
        run_experiment,
    )
    from .propagator import StepSizeError
    from .spectrum import TruncationError

    try:
        if args.config is not None:
            config = load_config(args.config, experiment=args.experiment)
        else:
            config = ExperimentConfig(experiment=args.experiment)
        config.out_dir = args.out
        config.desk_scale = args.desk_scale
        config.figures = not args.no_figures
        for pair in args.overrides:
            key, value = parse_override(pair)
            config.overrides[key] = value
        config.resolved()          # validate before any heavy work
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        manifest = run_experiment(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (StepSizeError, TruncationError, InvalidParameterError, GridError,
            np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3

    print(f"{manifest.experiment}: {len(manifest.files)} files in "
          f"{manifest.out_dir} ({manifest.wall_seconds:.1f} s)")
    for entry in manifest.files:
        print(f"  {entry['path']}  sha256:{entry['sha256'][:12]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
