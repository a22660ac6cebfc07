"""Command-line entry point: run named experiments from config files or
list the catalog.

Exit codes: 0 success, 1 error (bad config, crash), 2 the experiment ran
but an acceptance threshold failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .catalog import BY_NAME, REGISTRY
from .io import ConfigError, parse_config, result_dir, write_summary

KNOWN_KEYS = {"experiment", "seed", "out", "threads", "timestamp"}


def list_catalog(file=None):
    file = file or sys.stdout
    for e in sorted(REGISTRY, key=lambda e: e.name):
        print(f"{e.name:20s} {e.description:55s} {e.tag}", file=file)


def validate(config, experiment):
    known = KNOWN_KEYS | set(experiment.defaults)
    unknown = sorted(set(config) - known)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r} for "
                          f"experiment {experiment.name!r}")
    if "seed" not in config:
        raise ConfigError("missing required field 'seed'")
    if not isinstance(config["seed"], int):
        raise ConfigError("field 'seed' must be an integer")


def run(config_path, seed=None, out=None, threads=None, timestamp=None):
    config = parse_config(config_path)
    name = config.get("experiment")
    if not name:
        raise ConfigError("missing required field 'experiment'")
    if name not in BY_NAME:
        raise ConfigError(f"unknown experiment {name!r} "
                          f"(run --list for the catalog)")
    exp = BY_NAME[name]
    if seed is not None:
        config["seed"] = seed
    if threads is not None:
        config["threads"] = threads
    validate(config, exp)
    merged = dict(exp.defaults)
    merged.update({k: v for k, v in config.items()
                   if k not in ("experiment", "out", "timestamp")})
    merged.setdefault("threads", os.cpu_count() or 1)
    base = Path(out or config.get("out", "results"))
    out_dir = result_dir(base, name, timestamp=timestamp or config.get("timestamp"))
    summary, ok = exp.runner(merged, out_dir)
    write_summary(out_dir, name, merged, summary)
    print(f"{name}: {'ok' if ok else 'THRESHOLD FAILED'} -> {out_dir}")
    return 0 if ok else 2


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="isinglab",
        description="critical Ising / FK-Ising identity checks and experiments")
    parser.add_argument("--list", action="store_true",
                        help="print the experiment catalog and exit")
    parser.add_argument("--schema", action="store_true",
                        help="print the generated CSV-columns fragment and exit")
    parser.add_argument("--config", type=str, help="experiment config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", type=str, default=None,
                        help="output base directory (default: results/)")
    parser.add_argument("--threads", type=int, default=None,
                        help="parallelism degree (default: available cores)")
    args = parser.parse_args(argv)
    if args.list:
        list_catalog()
        return 0
    if args.schema:
        from .catalog import schema_fragment
        print(schema_fragment(), end="")
        return 0
    if not args.config:
        parser.print_usage()
        print("error: --config or --list is required", file=sys.stderr)
        return 1
    try:
        return run(args.config, seed=args.seed, out=args.out,
                   threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
