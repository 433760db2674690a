"""Command-line entry point.

Exit codes: 0 success, 2 invalid config or arguments, 3 runtime failure,
4 SPMD handshake failure. Diagnostics go to stderr; stdout carries listings
and sweep results only. ``EVOFLOW_OUTPUT_DIR`` overrides the config's
``output_dir``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from evoflow.errors import ConfigurationError, EvoflowError, HandshakeError
from evoflow.experiment import OUTPUT_ENV, ExperimentConfig, run_experiment, sweep, sweep_csv
from evoflow.registry import names
from evoflow.runtime.spmd import ClusterConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_HANDSHAKE = 4

log = logging.getLogger("evoflow")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evoflow", description="Run evolutionary computation experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("config")
    run.add_argument("--workers", type=int, help="local evaluation workers (overrides the config)")
    run.add_argument("--role", choices=["single", "coordinator", "worker"], default="single")
    run.add_argument("--node-id", type=int, default=0)
    run.add_argument("--world-size", type=int, default=1)
    run.add_argument("--addr", default="127.0.0.1:29500", help="coordinator HOST:PORT")
    run.add_argument("--timeout", type=float, default=30.0, help="handshake and all-gather timeout in seconds")

    ls = sub.add_parser("list", help="list registered algorithms or problems")
    ls.add_argument("kind")

    sw = sub.add_parser("sweep", help="time iterations across dimensions or population sizes")
    sw.add_argument("config")
    sw.add_argument("--axis", required=True, choices=["dim", "pop"])
    sw.add_argument("--values", required=True, help="comma-separated ascending values, e.g. 10,100,1000")
    return parser


def _load(path: str) -> ExperimentConfig:
    cfg = ExperimentConfig.load(path)
    override = os.environ.get(OUTPUT_ENV)
    return cfg.replace(output_dir=override) if override else cfg


def _run(args) -> int:
    cfg = _load(args.config)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigurationError("must be >= 1", "workers")
        cfg = cfg.replace(workers=args.workers)
    cluster = ClusterConfig.from_address(args.role, args.node_id, args.world_size, args.addr)
    meta = run_experiment(cfg, cluster, timeout=args.timeout)
    log.info("finished in %.3f s; artifacts in %s", meta["wall_time_s"], cfg.output_dir)
    return EXIT_OK


def _sweep(args) -> int:
    cfg = _load(args.config)
    try:
        values = [int(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"not a list of integers: {args.values!r}", "values") from None
    rows = sweep(cfg, args.axis, values)
    text = sweep_csv(rows)
    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(os.path.join(cfg.output_dir, f"sweep_{args.axis}.csv"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "list":
            sys.stdout.write("".join(f"{n}\n" for n in names(args.kind)))
            return EXIT_OK
        if args.command == "run":
            return _run(args)
        return _sweep(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HandshakeError as exc:
        print(f"handshake failed: {exc}", file=sys.stderr)
        return EXIT_HANDSHAKE
    except EvoflowError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
