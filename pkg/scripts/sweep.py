#!/usr/bin/env python3
"""Multi-seed sweep on a synthetic building: label budget, LINE(2nd) ablation,
power weighting and MAC dropout, one row per seed plus the across-seed mean.

    python scripts/sweep.py --seeds 0 1 2 --json sweep.json
"""

import argparse
import json
import time
from dataclasses import replace

import numpy as np

from floorgraph.dataset import split
from floorgraph.eline import TrainConfig
from floorgraph.graph import WeightConfig
from floorgraph.pipeline import fit, keep_macs, label_sweep
from floorgraph.synthgen import BuildingSpec, generate


def one_seed(spec, seed, labels, keep_fractions):
    dataset = generate(replace(spec, seed=seed))
    cfg = TrainConfig(seed=seed)
    row = {"seed": seed}
    t0 = time.perf_counter()
    for n, report in label_sweep(dataset, labels, train_config=cfg, split_seed=seed).items():
        row[f"eline@{n}"] = report.micro_f
    row["eline_seconds"] = time.perf_counter() - t0
    row["line2@4"] = label_sweep(dataset, [4], train_config=replace(cfg, mode="line2"), split_seed=seed)[4].micro_f
    row["power@4"] = label_sweep(dataset, [4], WeightConfig("power"), train_config=cfg, split_seed=seed)[4].micro_f
    if keep_fractions:
        train_set, test_set = split(dataset, 0.7, 4, seed)
        model, _ = fit(train_set, WeightConfig(), cfg)
        for frac in keep_fractions:
            row[f"keep{frac}"] = model.evaluate(test_set.records, keep_macs(model, frac, seed)).micro_f
    return row


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--floors", type=int, default=4)
    ap.add_argument("--aps-per-floor", type=int, default=40)
    ap.add_argument("--records-per-floor", type=int, default=300)
    ap.add_argument("--labels", type=int, nargs="+", default=[4, 1, 2, 8])
    ap.add_argument("--keep", type=float, nargs="*", default=[0.4, 0.1])
    ap.add_argument("--json")
    args = ap.parse_args()

    spec = BuildingSpec(floors=args.floors, aps_per_floor=args.aps_per_floor, records_per_floor=args.records_per_floor)
    rows = []
    for seed in args.seeds:
        row = one_seed(spec, seed, args.labels, args.keep)
        rows.append(row)
        print("  ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()), flush=True)
    keys = [k for k in rows[0] if k != "seed"]
    print("mean  " + "  ".join(f"{k}={np.mean([r[k] for r in rows]):.4f}" for k in keys))
    print("std   " + "  ".join(f"{k}={np.std([r[k] for r in rows]):.4f}" for k in keys))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
