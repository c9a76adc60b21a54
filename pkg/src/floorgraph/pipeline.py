"""Offline training and online inference wired end to end."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from floorgraph.cluster import ClusterModel, LabeledPoint, agglomerate
from floorgraph.dataset import Dataset, ScanRecord, split
from floorgraph.eline import EmbeddingTable, TrainConfig, TrainReport, embed_new, train
from floorgraph.errors import OutsideBuilding
from floorgraph.graph import BipartiteGraph, WeightConfig, build, extend
from floorgraph.predict_eval import EvalReport, Prediction, evaluate, predict


@dataclass(frozen=True, eq=False)
class FloorModel:
    weight_config: WeightConfig
    train_config: TrainConfig
    graph: BipartiteGraph
    table: EmbeddingTable
    clusters: ClusterModel

    @property
    def floors(self) -> list[str]:
        return sorted(set(self.clusters.labels))

    def embed(self, record: ScanRecord) -> np.ndarray:
        """Ego vector of an unseen scan; raises OutsideBuilding if no MAC is known."""
        if record.record_id in self.graph.record_index:
            # online scans may reuse a training id; the overlay node needs a fresh one
            record = replace(record, record_id=f"{record.record_id}#online")
        graph, node, new_macs = extend(self.graph, record, self.weight_config)
        table = embed_new(graph, self.table, [node, *new_macs], self.train_config)
        return table.ego_of(graph, node)

    def predict(self, record: ScanRecord) -> Prediction:
        return predict(self.embed(record), self.clusters, record.record_id)

    def embed_all(
        self, records: Iterable[ScanRecord], keep: set[str] | None = None
    ) -> list[np.ndarray | None]:
        """Embed each record through the online path; None marks an outside-building scan.

        ``keep`` first restricts every scan to those MACs.
        """
        out: list[np.ndarray | None] = []
        for record in records:
            if keep is not None:
                entries = tuple(e for e in record.entries if e.mac in keep)
                if not entries:
                    out.append(None)
                    continue
                record = replace(record, entries=entries)
            try:
                out.append(self.embed(record))
            except OutsideBuilding:
                out.append(None)
        return out

    def evaluate(self, records: Sequence[ScanRecord], keep: set[str] | None = None) -> EvalReport:
        return score(self.clusters, self.embed_all(records, keep), [r.floor_label for r in records])

    def relabel(self, labels: dict[str, str | None]) -> "FloorModel":
        """Same embeddings, re-clustered around a different set of labeled records."""
        return replace(self, clusters=cluster_records(self.graph, self.table, labels))


def score(
    clusters: ClusterModel, embeddings: Sequence[np.ndarray | None], truths: Sequence[str]
) -> EvalReport:
    pairs = []
    for u, truth in zip(embeddings, truths):
        pred = predict(u, clusters).floor_label if u is not None else None
        pairs.append((pred, truth))
    return evaluate(pairs, sorted(set(clusters.labels)))


def cluster_records(
    graph: BipartiteGraph, table: EmbeddingTable, labels: dict[str, str | None]
) -> ClusterModel:
    points = [
        LabeledPoint(graph.record_index[rid], table.ego[graph.record_rows[k]], labels.get(rid))
        for k, rid in enumerate(graph.record_labels)
    ]
    return agglomerate(points)


def fit(
    train_set: Dataset,
    weight_config: WeightConfig = WeightConfig(),
    train_config: TrainConfig = TrainConfig(),
) -> tuple[FloorModel, TrainReport]:
    graph = build(train_set, weight_config)
    table, report = train(graph, train_config)
    labels = {r.record_id: r.floor_label for r in train_set}
    clusters = cluster_records(graph, table, labels)
    return FloorModel(weight_config, train_config, graph, table, clusters), report


def keep_macs(model: FloorModel, fraction: float, seed: int) -> set[str]:
    """Random subset holding ``round(fraction * n)`` of the model's known MACs."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("keep fraction must lie in [0, 1]")
    macs = model.graph.mac_labels
    n_keep = int(round(fraction * len(macs)))
    rng = np.random.default_rng(seed)
    return {macs[k] for k in rng.choice(len(macs), size=n_keep, replace=False)}


def run_experiment(
    dataset: Dataset,
    labels_per_floor: int = 4,
    train_fraction: float = 0.7,
    weight_config: WeightConfig = WeightConfig(),
    train_config: TrainConfig = TrainConfig(),
    split_seed: int = 0,
) -> tuple[FloorModel, EvalReport, Dataset]:
    """Split, fit on the train part, score the held-out part through the online path."""
    train_set, test_set = split(dataset, train_fraction, labels_per_floor, split_seed)
    model, _ = fit(train_set, weight_config, train_config)
    return model, model.evaluate(test_set.records), test_set


def label_sweep(
    dataset: Dataset,
    labels_per_floor: Sequence[int],
    train_fraction: float = 0.7,
    weight_config: WeightConfig = WeightConfig(),
    train_config: TrainConfig = TrainConfig(),
    split_seed: int = 0,
) -> dict[int, EvalReport]:
    """Held-out reports for several label budgets from one embedding run.

    The record split and the embeddings do not depend on the label budget,
    so each budget reproduces exactly what :func:`run_experiment` returns.
    """
    splits = {n: split(dataset, train_fraction, n, split_seed) for n in labels_per_floor}
    first = labels_per_floor[0]
    model, _ = fit(splits[first][0], weight_config, train_config)
    test = splits[first][1].records
    embeddings = model.embed_all(test)
    truths = [r.floor_label for r in test]
    reports = {}
    for n, (train_set, _) in splits.items():
        relabeled = model.relabel({r.record_id: r.floor_label for r in train_set})
        reports[n] = score(relabeled.clusters, embeddings, truths)
    return reports
