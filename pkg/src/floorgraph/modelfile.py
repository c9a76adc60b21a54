"""Versioned JSON persistence for trained floor models."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from floorgraph.cluster import Cluster, ClusterModel, LabeledPoint
from floorgraph.eline import EmbeddingTable, TrainConfig
from floorgraph.errors import ModelError, ModelVersionMismatch
from floorgraph.graph import BipartiteGraph, NodeKind, WeightConfig
from floorgraph.pipeline import FloorModel

VERSION = 1


def to_document(model: FloorModel) -> dict:
    g, t = model.graph, model.table
    deg = g.weighted_degree
    nodes = []
    for row in range(g.n_nodes):
        node = g.node_at(row)
        nodes.append(
            {
                "kind": node.kind.value,
                "label": g.label(node),
                "degree": float(deg[row]),
                "ego": t.ego[row].tolist(),
                "context": t.context[row].tolist(),
            }
        )
    clusters = []
    for c in model.clusters.clusters:
        ids = [g.label(p.node) for p in c.members]
        clusters.append(
            {
                "floor_label": c.floor_label,
                "centroid": c.centroid.tolist(),
                "members": ids,
                "labeled_members": [rid for rid, p in zip(ids, c.members) if p.floor_label],
            }
        )
    return {
        "version": VERSION,
        "weight_config": asdict(model.weight_config),
        "train_config": asdict(model.train_config),
        "nodes": nodes,
        "edges": [
            [int(m), int(r), float(w)] for m, r, w in zip(g.edge_mac, g.edge_record, g.edge_weight)
        ],
        "clusters": clusters,
    }


def from_document(doc: dict) -> FloorModel:
    if not isinstance(doc, dict) or doc.get("version") != VERSION:
        raise ModelVersionMismatch(f"expected model version {VERSION}, got {doc.get('version')!r}")
    try:
        nodes = doc["nodes"]
        kinds = [NodeKind(n["kind"]) for n in nodes]
        rows = np.arange(len(nodes))
        is_mac = np.array([k is NodeKind.MAC for k in kinds], dtype=bool)
        edges = np.asarray(doc["edges"], dtype=np.float64).reshape(-1, 3)
        graph = BipartiteGraph(
            mac_labels=tuple(n["label"] for n in nodes if n["kind"] == "mac"),
            record_labels=tuple(n["label"] for n in nodes if n["kind"] == "record"),
            mac_rows=rows[is_mac],
            record_rows=rows[~is_mac],
            edge_mac=edges[:, 0].astype(np.int64),
            edge_record=edges[:, 1].astype(np.int64),
            edge_weight=edges[:, 2].copy(),
        )
        table = EmbeddingTable(
            np.array([n["ego"] for n in nodes], dtype=np.float64),
            np.array([n["context"] for n in nodes], dtype=np.float64),
        )
        stored_deg = np.array([n["degree"] for n in nodes])
        if not np.allclose(stored_deg, graph.weighted_degree, rtol=1e-9, atol=0):
            raise ModelError("node degrees disagree with the edge list")
        clusters = []
        for c in doc["clusters"]:
            labeled = set(c["labeled_members"])
            members = tuple(
                LabeledPoint(
                    node,
                    table.ego[graph.row(node)],
                    c["floor_label"] if rid in labeled else None,
                )
                for rid in c["members"]
                for node in [graph.record_index[rid]]
            )
            clusters.append(Cluster(members, c["floor_label"], np.array(c["centroid"], dtype=np.float64)))
        model = FloorModel(
            WeightConfig(**doc["weight_config"]),
            TrainConfig(**doc["train_config"]),
            graph,
            table,
            ClusterModel(tuple(clusters), table.dim),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ModelError(f"malformed model file: {exc}") from None
    if any(len(c.centroid) != table.dim for c in model.clusters.clusters):
        raise ModelError("centroid dimension does not match the embeddings")
    return model


def save(model: FloorModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_document(model), fh)


def load(path: str | Path) -> FloorModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model {path}: {exc}") from None
    return from_document(doc)
