#!/usr/bin/env python3
"""How held-out accuracy and duplicate-scan recovery depend on the training budget.

The default budget is per edge, so small buildings see few updates per
node. This prints micro-F against samples_per_edge on a small building,
then the rank of a scan's source record among all training records
(by ego cosine) after online embedding, for two budgets.
"""

import argparse

import numpy as np

from floorgraph.dataset import ScanRecord
from floorgraph.eline import TrainConfig, embed_new, train
from floorgraph.graph import build, extend
from floorgraph.pipeline import run_experiment
from floorgraph.synthgen import BuildingSpec, generate


def accuracy_vs_budget(budgets, seeds):
    ds = generate(BuildingSpec(floors=3, aps_per_floor=12, records_per_floor=40, seed=7))
    for spe in budgets:
        scores = [
            run_experiment(ds, train_config=TrainConfig(seed=s, samples_per_edge=spe), split_seed=s)[1].micro_f
            for s in seeds
        ]
        print(f"samples_per_edge={spe:5d}  micro-F {np.mean(scores):.3f}  {np.round(scores, 3).tolist()}")


def duplicate_ranks(cfg):
    ds = generate(BuildingSpec(floors=3, aps_per_floor=40, records_per_floor=60, detection_threshold_dbm=-75, seed=4))
    g = build(ds)
    table, _ = train(g, cfg)
    base = table.ego[g.record_rows]
    base = base / np.linalg.norm(base, axis=1, keepdims=True)
    ranks = []
    for source in ds.records[::6]:
        g2, node, new = extend(g, ScanRecord("query", source.entries))
        u = embed_new(g2, table, [node, *new], cfg).ego_of(g2, node)
        sims = base @ (u / np.linalg.norm(u))
        ranks.append(int((sims > sims[g.record_index[source.record_id].index]).sum()))
    return ranks


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budgets", type=int, nargs="+", default=[50, 100, 300, 1000])
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    args = ap.parse_args()
    accuracy_vs_budget(args.budgets, args.seeds)
    for cfg in (TrainConfig(seed=2), TrainConfig(seed=2, samples_per_edge=1000, new_node_passes=1000)):
        ranks = duplicate_ranks(cfg)
        print(f"spe={cfg.samples_per_edge} passes={cfg.new_node_passes}: top-1 {sum(r == 0 for r in ranks)}/{len(ranks)}, "
              f"median rank {np.median(ranks):.0f}, max {max(ranks)}")


if __name__ == "__main__":
    main()
