"""Dev helper: run the acceptance-scale grids once, cache to JSON."""
import json
import os
import sys
import time
from dataclasses import asdict, replace

sys.path.insert(0, "src")
from dcfsim import ScenarioConfig, apply_sweep_value, run_single

CACHE = "dev_grid_cache.json"
cache = {}
if os.path.exists(CACHE):
    cache = json.load(open(CACHE))

base = ScenarioConfig()
SEEDS = [1, 2, 3, 4, 5]
grids = [
    ("retry", [2, 7, 20]),
    ("cwmin", [15, 31, 63, 127, 255, 511, 1023]),
    ("cwmax", [63, 127, 255, 511, 1023, 2047]),
    ("cwpairs", [(15, 1023), (31, 1023), (31, 511), (127, 255), (127, 511),
                 (127, 1023), (255, 511)]),
]

t_start = time.time()
n_done = 0
for kind, values in grids:
    for v in values:
        cfg = apply_sweep_value(base, kind, v)
        for seed in SEEDS:
            run_cfg = replace(cfg, seed=seed)
            key = f"sr{run_cfg.mac.short_retry_limit}_cw{run_cfg.mac.cw_min}-{run_cfg.mac.cw_max}_s{seed}"
            if key in cache:
                continue
            t0 = time.time()
            rep = run_single(run_cfg)
            cache[key] = {k: val for k, val in asdict(rep).items()
                          if k != "per_flow_delivered"}
            n_done += 1
            json.dump(cache, open(CACHE, "w"))
            print(f"[{time.time()-t_start:6.0f}s] {key}: dlv={rep.delivered} "
                  f"drop={rep.total_dropped} ({time.time()-t0:.0f}s)", flush=True)
print("grid complete", len(cache))
