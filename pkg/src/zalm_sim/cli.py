"""Command-line entry point: ``zalm-sim run | sweep | grid-dump``."""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Sequence

from .config import (
    ConfigError,
    apply_mode,
    canonical_key,
    coerce,
    load_config,
    validate,
    with_overrides,
)
from .engine import run_trials, summarize
from .results import render, result_row, write_herald_log
from .spectral_filtering import build_grid, write_grid_csv

log = logging.getLogger("zalm_sim")


def _common(p: argparse.ArgumentParser, campaign: bool = True) -> None:
    p.add_argument("--config", help="flat dotted-key config file (JSON or YAML)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key; repeatable")
    p.add_argument("--out", help="output path (default: stdout)")
    if campaign:
        p.add_argument("--trials", type=int, help="trials per campaign")
        p.add_argument("--seed", type=int, help="campaign seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, help="worker processes (default: $ZALM_SIM_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zalm-sim", description="ZALM source Monte Carlo simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a single campaign")
    _common(run)
    run.add_argument("--herald-log", help="write per-trial herald records to this file")

    sw = sub.add_parser("sweep", help="run one campaign per parameter value")
    _common(sw)
    sw.add_argument("--param", required=True, help="dotted config key to sweep")
    sw.add_argument("--values", required=True, help="comma-separated values")

    grid = sub.add_parser("grid-dump", help="write the DWDM channel plan as CSV")
    _common(grid, campaign=False)
    return parser


@contextmanager
def _output(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            yield fh


def _load(args):
    overrides = list(args.overrides)
    if getattr(args, "trials", None) is not None:
        overrides.append(f"n_trials={args.trials}")
    if getattr(args, "seed", None) is not None:
        overrides.append(f"seed={args.seed}")
    return load_config(args.config, overrides)


def _campaign_row(cfg, param, value, workers, outcomes_sink=None):
    outcomes = run_trials(cfg, cfg.n_trials, cfg.seed, workers)
    if outcomes_sink is not None:
        outcomes_sink.extend(outcomes)
    metrics = summarize(outcomes)
    log.info("%s=%s ebits/use=%.5g fidelity=%.4f", param or "-", value, metrics.ebits_per_use,
             metrics.avg_fidelity)
    return result_row(param, value, metrics, cfg)


def _split_values(text: str) -> list[str]:
    text = text.strip().strip("[]")
    return [v.strip() for v in text.split(",") if v.strip()]


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _load(args)
        if args.command == "grid-dump":
            with _output(args.out) as fh:
                write_grid_csv(build_grid(cfg.dwdm), fh)
            return 0

        if args.command == "run":
            outcomes = [] if args.herald_log else None
            rows = [_campaign_row(cfg, "", "", args.workers, outcomes)]
            if args.herald_log:
                with _output(args.herald_log) as fh:
                    write_herald_log(outcomes, fh)
        else:
            key = canonical_key(args.param)
            rows = []
            for raw in _split_values(args.values):
                value = coerce(key, raw)
                point = apply_mode(validate(with_overrides(cfg, {key: value})))
                rows.append(_campaign_row(point, key, raw, args.workers))
        with _output(args.out) as fh:
            fh.write(render(rows, args.format))
        return 0
    except (ConfigError, ValueError, OSError) as exc:
        print(f"zalm-sim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
