"""Single runs, parameter sweeps over seeds, and CSV/plot-data output."""

from __future__ import annotations

import csv
import gc
import os
from dataclasses import dataclass, field, replace

from .metrics import MetricsReport
from .scenario import ConfigError, ScenarioConfig
from .simulation import Simulation

# Default sweep grids bracket the standard defaults (7, 31/1023) and the
# optima reported for this topology (short retry 20, cw_min 255).
DEFAULT_RETRY_VALUES = (2, 4, 7, 10, 14, 20, 28)
DEFAULT_CWMIN_VALUES = (15, 31, 63, 127, 255, 511, 1023)   # cw_max pinned at 1023
DEFAULT_CWMAX_VALUES = (63, 127, 255, 511, 1023, 2047)     # cw_min pinned at 31
DEFAULT_CW_PAIRS = ((15, 1023), (31, 1023), (31, 511), (127, 255),
                    (127, 511), (127, 1023), (255, 511))

SWEEP_KINDS = ("retry", "cwmin", "cwmax", "cwpairs", "none")
DEFAULT_SEEDS = (1, 2, 3, 4, 5)

CSV_COLUMNS = ("n_intermediate", "short_retry", "long_retry", "cw_min",
               "cw_max", "seed") + MetricsReport.CSV_FIELDS

# Metrics averaged into the per-value mean rows and plot files.
MEAN_FIELDS = MetricsReport.CSV_FIELDS


@dataclass
class SweepSpec:
    kind: str
    values: tuple
    seeds: tuple = DEFAULT_SEEDS
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ConfigError(f"unknown sweep kind {self.kind!r}")
        if not self.values:
            raise ConfigError("sweep values must be non-empty")
        if not self.seeds:
            raise ConfigError("sweep seeds must be non-empty")
        if self.kind == "cwpairs":
            for lo, hi in self.values:
                if lo > hi:
                    raise ConfigError(f"cw pair ({lo},{hi}) has cw_min > cw_max")


def default_values(kind):
    return {
        "retry": DEFAULT_RETRY_VALUES,
        "cwmin": DEFAULT_CWMIN_VALUES,
        "cwmax": DEFAULT_CWMAX_VALUES,
        "cwpairs": DEFAULT_CW_PAIRS,
        "none": (0,),
    }[kind]


def apply_sweep_value(base: ScenarioConfig, kind, value) -> ScenarioConfig:
    if kind == "retry":
        mac = replace(base.mac, short_retry_limit=int(value))
    elif kind == "cwmin":
        mac = replace(base.mac, cw_min=int(value))
    elif kind == "cwmax":
        mac = replace(base.mac, cw_max=int(value))
    elif kind == "cwpairs":
        mac = replace(base.mac, cw_min=int(value[0]), cw_max=int(value[1]))
    elif kind == "none":
        mac = base.mac
    else:
        raise ConfigError(f"unknown sweep kind {kind!r}")
    return replace(base, mac=mac)


def run_single(cfg: ScenarioConfig, trace_path=None) -> MetricsReport:
    """One deterministic run of (config, seed)."""
    sim = Simulation(cfg, trace=trace_path is not None)
    # The event loop allocates heavily but creates almost no cycles;
    # pausing the cycle collector is worth ~15% on long runs.
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        report = sim.run()
    finally:
        if was_enabled:
            gc.enable()
    if trace_path is not None:
        sim.trace.write(trace_path)
    return report


def _format(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def csv_row(cfg: ScenarioConfig, seed_label, report_values):
    params = [cfg.n_intermediate, cfg.mac.short_retry_limit,
              cfg.mac.long_retry_limit, cfg.mac.cw_min, cfg.mac.cw_max,
              seed_label]
    return [_format(v) for v in params + list(report_values)]


def value_label(kind, value):
    if kind == "cwpairs":
        return f"{value[0]}-{value[1]}"
    return str(value)


def run_sweep(spec: SweepSpec, progress=None):
    """Run every (value, seed) point plus a per-value mean row.

    Returns (rows, reports): rows are CSV-ready string lists ordered by
    (value, seed) with the mean row after each value's seeds; reports maps
    value -> list of MetricsReport in seed order.
    """
    rows = []
    reports = {}
    for value in spec.values:
        cfg = apply_sweep_value(spec.base, spec.kind, value)
        per_seed = []
        for seed in spec.seeds:
            run_cfg = replace(cfg, seed=seed)
            report = run_single(run_cfg)
            per_seed.append(report)
            rows.append(csv_row(run_cfg, seed, report.csv_values()))
            if progress is not None:
                progress(spec.kind, value, seed, report)
        reports[value] = per_seed
        means = [sum(getattr(r, name) for r in per_seed) / len(per_seed)
                 for name in MEAN_FIELDS]
        rows.append(csv_row(cfg, "mean", means))
    return rows, reports


def write_csv(rows, path_or_file):
    """Plain comma-separated output with the fixed header row."""
    if hasattr(path_or_file, "write"):
        writer = csv.writer(path_or_file, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        write_csv(rows, fh)


def write_plot_data(spec: SweepSpec, reports, plot_dir):
    """Two-column (x, mean metric) files, one per metric, for external
    plotting tools."""
    os.makedirs(plot_dir, exist_ok=True)
    for name in MEAN_FIELDS:
        path = os.path.join(plot_dir, f"{spec.kind}_{name}.dat")
        with open(path, "w") as fh:
            for value in spec.values:
                per_seed = reports[value]
                mean = sum(getattr(r, name) for r in per_seed) / len(per_seed)
                fh.write(f"{value_label(spec.kind, value)} {_format(mean)}\n")
