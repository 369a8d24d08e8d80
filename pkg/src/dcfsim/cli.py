"""Command-line front end: single runs and parameter sweeps.

Exit codes: 0 success, 2 configuration error, 3 internal invariant
violation (accounting/conservation failure, which indicates a simulator
bug rather than a bad input).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import (SWEEP_KINDS, SweepSpec, csv_row, default_values,
                      run_single, run_sweep, write_csv, write_plot_data)
from .metrics import AccountingError
from .scenario import ConfigError, ScenarioConfig, load_scenario_file

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _parse_seeds(text):
    """Seed range "n..m" (inclusive) or a comma-separated list."""
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ConfigError(f"empty seed range {text!r}")
        return tuple(range(lo, hi + 1))
    return tuple(int(s) for s in text.split(","))


def _parse_values(kind, text):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty --values list")
    if kind == "cwpairs":
        pairs = []
        for part in parts:
            lo, sep, hi = part.partition(":")
            if not sep:
                raise ConfigError(
                    f"cw pair {part!r} must be written as cwmin:cwmax")
            pairs.append((int(lo), int(hi)))
        return tuple(pairs)
    return tuple(int(p) for p in parts)


def _base_config(args) -> ScenarioConfig:
    cfg = load_scenario_file(args.config) if args.config else ScenarioConfig()
    updates = {}
    if args.nodes is not None:
        updates["n_intermediate"] = args.nodes
    if args.duration is not None:
        updates["duration_s"] = args.duration
    if args.allow_any_n:
        updates["allow_any_n"] = True
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if updates:
        cfg = replace(cfg, **updates)
    cfg.validate()
    return cfg


def _add_common(parser):
    parser.add_argument("--config", help="scenario file (ini sections: scenario/mac/radio/tcp)")
    parser.add_argument("--nodes", type=int, metavar="N",
                        help="intermediate node count (6, 8 or 10)")
    parser.add_argument("--duration", type=float, metavar="SECONDS")
    parser.add_argument("--allow-any-n", action="store_true",
                        help="accept intermediate counts outside {6,8,10}")
    parser.add_argument("--out", metavar="CSV", help="write CSV here instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dcfsim",
        description="802.11 DCF ad-hoc network simulator with TCP/FTP traffic")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="single deterministic run")
    _add_common(run_p)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--trace", metavar="PATH", help="write the MAC event log here")

    sweep_p = sub.add_parser("sweep", help="parameter sweep over seeds")
    _add_common(sweep_p)
    sweep_p.add_argument("--sweep", choices=[k for k in SWEEP_KINDS if k != "none"],
                         required=True)
    sweep_p.add_argument("--values",
                         help="comma-separated values; cwpairs use cwmin:cwmax")
    sweep_p.add_argument("--seeds", default="1..5", metavar="N..M",
                         help="seed range n..m or comma list (default 1..5)")
    sweep_p.add_argument("--plot-dir", metavar="DIR",
                         help="also emit two-column (x, mean) files per metric")
    return parser


def _cmd_run(args) -> int:
    cfg = _base_config(args)
    report = run_single(cfg, trace_path=args.trace)
    rows = [csv_row(cfg, cfg.seed, report.csv_values())]
    if args.out:
        write_csv(rows, args.out)
    else:
        write_csv(rows, sys.stdout)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = _base_config(args)
    values = (_parse_values(args.sweep, args.values) if args.values
              else default_values(args.sweep))
    spec = SweepSpec(kind=args.sweep, values=values,
                     seeds=_parse_seeds(args.seeds), base=base)
    rows, reports = run_sweep(spec)
    if args.out:
        write_csv(rows, args.out)
    else:
        write_csv(rows, sys.stdout)
    if args.plot_dir:
        write_plot_data(spec, reports, args.plot_dir)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_sweep(args)
    except ConfigError as exc:
        print(f"dcfsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AccountingError as exc:
        print(f"dcfsim: internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
