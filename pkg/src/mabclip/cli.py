"""Command-line entry point ``simulate``.

Exit codes: 0 success, 1 output write failure, 2 configuration error,
3 numerical error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import actions, config, harness
from .errors import ConfigError, InvalidInput

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
_INT_PARAMS = {"n_antennas", "n_interferers"}


def parse_sweep(text: str) -> tuple[str, tuple]:
    name, sep, raw = text.partition("=")
    name = name.strip()
    if not sep or not name or not raw.strip():
        raise ConfigError(f"--sweep expects <param>=<v1,v2,...>, got {text!r}")
    if name not in harness.SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {name!r}; expected one of {harness.SWEEP_PARAMS}")
    items = [v.strip() for v in raw.split(",") if v.strip()]
    if name == "mitigation":
        return name, tuple(harness.canonical_mitigation(v) for v in items)
    try:
        conv = int if name in _INT_PARAMS else float
        return name, tuple(conv(v) for v in items)
    except ValueError:
        raise ConfigError(f"non-numeric value in --sweep {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="OFDM link simulation with bandit-tuned multi-threshold clipping.")
    p.add_argument("--config", help="YAML configuration file")
    p.add_argument("--seed", type=int, help="override the base seed")
    p.add_argument("--frames", type=int, help="override the number of frames")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--sweep", help="sweep one parameter, e.g. sir_db=-30,-20,-10")
    p.add_argument("--mitigation", choices=[*harness.MITIGATIONS, "blanking", "clipping"])
    p.add_argument("--trace", action="store_true",
                   help="write the per-frame trace even for a sweep")
    p.add_argument("--workers", type=int, default=1, help="parallel sweep points")
    p.add_argument("--dump-catalog", action="store_true",
                   help="print the action catalog for the configured M and q, then exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _resolve(args) -> harness.SimConfig:
    cfg = config.load(args.config) if args.config else harness.SimConfig()
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.frames is not None:
        over["frames"] = args.frames
    if args.mitigation is not None:
        over["mitigation"] = args.mitigation
    if args.sweep is not None:
        over["sweep"] = (parse_sweep(args.sweep),)
    return replace(cfg, **over) if over else cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is None and not args.dump_catalog:
            raise ConfigError("--config is required")
        cfg = _resolve(args)
        if args.dump_catalog:
            sys.stdout.write(actions.build_catalog(cfg.M, cfg.q, cfg.n).dump())
            return EXIT_OK
        if len(cfg.sweep) > 1:
            raise ConfigError("only one sweep parameter can run at a time")
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if cfg.sweep:
            param, values = cfg.sweep[0]
            records = harness.run_sweep(cfg, param, values, workers=args.workers)
            kind = "trace" if args.trace else "summary"
        else:
            records = [harness.run_episode(cfg)]
            kind = "trace"
    except (ConfigError, InvalidInput) as exc:
        print(f"simulate: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (harness.NumericalError, FloatingPointError, OverflowError) as exc:
        print(f"simulate: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    try:
        if args.out:
            harness.emit_csv(records, args.out, kind)
        else:
            harness.write_rows(records, sys.stdout, kind)
    except OSError as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
