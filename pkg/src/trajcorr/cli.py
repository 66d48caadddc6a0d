"""Command-line driver: validate configs and run named experiment scenarios.

Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .experiment import ConfigError, load_config, run_scenario, validate_config
from .lindblad import StepSizeError
from .trajectory import TrajectoryError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajcorr",
        description="Trajectory-averaged genuine multipartite correlations "
                    "of open quantum systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a config file")
    run.add_argument("--config", required=True, help="path to a JSON config or manifest")
    run.add_argument("--threads", type=int, default=None,
                     help="worker processes (default: available cores)")
    run.add_argument("--seed", type=int, default=None,
                     help="override the config's master seed")
    run.add_argument("--out", default=None, help="override the output directory")

    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("--config", required=True, help="path to a JSON config")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        normalized = validate_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"config ok: scenario {normalized['scenario']}")
        return EXIT_OK

    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = run_scenario(cfg, threads=threads, out_dir=args.out, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepSizeError, TrajectoryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for warning in paths["warnings"]:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"wrote {paths['csv']}")
    print(f"wrote {paths['json']}")
    print(f"wrote {paths['manifest']}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
