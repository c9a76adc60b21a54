"""Weighted MAC/record bipartite graph with alias samplers for training.

Nodes live in one global row space (creation order) so an embedding table
built for a graph stays valid for every graph obtained from it by
:func:`extend`. A :class:`NodeId` names a node by kind and per-kind index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Mapping

import numpy as np

from floorgraph.alias import AliasTable
from floorgraph.dataset import Dataset, ScanRecord
from floorgraph.errors import DuplicateRecordId, EmptyGraph, NonPositiveWeight, OutsideBuilding


class NodeKind(str, enum.Enum):
    MAC = "mac"
    RECORD = "record"


@dataclass(frozen=True, order=True)
class NodeId:
    kind: NodeKind
    index: int


@dataclass(frozen=True)
class WeightConfig:
    """Edge weight from RSS: ``rss + alpha`` ("offset") or ``10**(rss/10)`` ("power")."""

    scheme: str = "offset"
    alpha: float = 120.0

    def __post_init__(self):
        if self.scheme not in ("offset", "power"):
            raise ValueError(f"unknown weight scheme {self.scheme!r}")


def weight(rss_dbm: float, config: WeightConfig) -> float:
    if config.scheme == "power":
        w = 10.0 ** (rss_dbm / 10.0)
    else:
        w = rss_dbm + config.alpha
    if not w > 0:
        raise NonPositiveWeight(f"RSS {rss_dbm} gives weight {w} under {config}")
    return float(w)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    mac_labels: tuple[str, ...]
    record_labels: tuple[str, ...]
    mac_rows: np.ndarray  # mac index -> global row
    record_rows: np.ndarray  # record index -> global row
    edge_mac: np.ndarray  # per undirected edge, mac index
    edge_record: np.ndarray  # per undirected edge, record index
    edge_weight: np.ndarray

    @cached_property
    def mac_index(self) -> Mapping[str, NodeId]:
        return {m: NodeId(NodeKind.MAC, k) for k, m in enumerate(self.mac_labels)}

    @cached_property
    def record_index(self) -> Mapping[str, NodeId]:
        return {r: NodeId(NodeKind.RECORD, k) for k, r in enumerate(self.record_labels)}

    @property
    def n_nodes(self) -> int:
        return len(self.mac_labels) + len(self.record_labels)

    @property
    def n_edges(self) -> int:
        return self.edge_weight.shape[0]

    def row(self, node: NodeId) -> int:
        rows = self.mac_rows if node.kind is NodeKind.MAC else self.record_rows
        if not 0 <= node.index < rows.shape[0]:
            raise IndexError(f"{node} not in graph")
        return int(rows[node.index])

    @cached_property
    def row_kind(self) -> np.ndarray:
        kinds = np.zeros(self.n_nodes, dtype=np.int8)
        kinds[self.record_rows] = 1
        return _frozen(kinds)

    @cached_property
    def _row_index(self) -> np.ndarray:
        idx = np.empty(self.n_nodes, dtype=np.int64)
        idx[self.mac_rows] = np.arange(self.mac_rows.shape[0])
        idx[self.record_rows] = np.arange(self.record_rows.shape[0])
        return idx

    def node_at(self, row: int) -> NodeId:
        kind = NodeKind.RECORD if self.row_kind[row] else NodeKind.MAC
        return NodeId(kind, int(self._row_index[row]))

    def label(self, node: NodeId) -> str:
        labels = self.mac_labels if node.kind is NodeKind.MAC else self.record_labels
        return labels[node.index]

    @cached_property
    def directed_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(source rows, target rows, weights); undirected edge k appears at k and k + |E|."""
        m = self.mac_rows[self.edge_mac]
        r = self.record_rows[self.edge_record]
        src = _frozen(np.concatenate([m, r]))
        dst = _frozen(np.concatenate([r, m]))
        w = _frozen(np.concatenate([self.edge_weight, self.edge_weight]))
        return src, dst, w

    @cached_property
    def weighted_degree(self) -> np.ndarray:
        src, _, w = self.directed_edges
        return _frozen(np.bincount(src, weights=w, minlength=self.n_nodes))

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR over rows: (indptr, neighbor rows, weights)."""
        src, dst, w = self.directed_edges
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n_nodes), out=indptr[1:])
        return _frozen(indptr), _frozen(dst[order]), _frozen(w[order])

    def neighbors(self, row: int) -> tuple[np.ndarray, np.ndarray]:
        indptr, nbr, w = self.adjacency
        return nbr[indptr[row] : indptr[row + 1]], w[indptr[row] : indptr[row + 1]]

    def edge_weight_between(self, a: int, b: int) -> float | None:
        nbr, w = self.neighbors(a)
        hit = np.flatnonzero(nbr == b)
        return float(w[hit[0]]) if hit.size else None

    @cached_property
    def edge_sampler(self) -> AliasTable:
        if self.n_edges == 0:
            raise EmptyGraph("graph has no edges")
        return AliasTable(self.directed_edges[2])

    @cached_property
    def noise_sampler(self) -> AliasTable:
        if self.n_nodes == 0:
            raise EmptyGraph("graph has no nodes")
        return AliasTable(self.weighted_degree**0.75)


def build(dataset: Dataset, config: WeightConfig = WeightConfig()) -> BipartiteGraph:
    """One record node per record, one MAC node per distinct MAC.

    Records are visited in record_id order and every node gets the next
    global row when first seen, so the result does not depend on the input
    record order.
    """
    if len(dataset) == 0:
        raise EmptyGraph("cannot build a graph from an empty dataset")
    macs: dict[str, int] = {}
    mac_rows: list[int] = []
    record_rows: list[int] = []
    e_mac: list[int] = []
    e_rec: list[int] = []
    e_w: list[float] = []
    next_row = 0
    records = sorted(dataset.records, key=lambda r: r.record_id)
    for k, record in enumerate(records):
        record_rows.append(next_row)
        next_row += 1
        for entry in record.entries:
            try:
                w = weight(entry.rss_dbm, config)
            except NonPositiveWeight as exc:
                raise NonPositiveWeight(f"record {record.record_id}: {exc}") from None
            if entry.mac not in macs:
                macs[entry.mac] = len(mac_rows)
                mac_rows.append(next_row)
                next_row += 1
            e_mac.append(macs[entry.mac])
            e_rec.append(k)
            e_w.append(w)
    return BipartiteGraph(
        mac_labels=tuple(macs),
        record_labels=tuple(r.record_id for r in records),
        mac_rows=_frozen(np.asarray(mac_rows, dtype=np.int64)),
        record_rows=_frozen(np.asarray(record_rows, dtype=np.int64)),
        edge_mac=_frozen(np.asarray(e_mac, dtype=np.int64)),
        edge_record=_frozen(np.asarray(e_rec, dtype=np.int64)),
        edge_weight=_frozen(np.asarray(e_w, dtype=np.float64)),
    )


def extend(
    graph: BipartiteGraph, record: ScanRecord, config: WeightConfig = WeightConfig()
) -> tuple[BipartiteGraph, NodeId, list[NodeId]]:
    """Return a new graph with ``record`` attached; ``graph`` itself is untouched.

    New rows are appended after the existing ones: the record node first,
    then any unseen MACs in scan order.
    """
    if record.record_id in graph.record_index:
        raise DuplicateRecordId(record.record_id)
    if not any(m in graph.mac_index for m in record.macs):
        raise OutsideBuilding(f"record {record.record_id} shares no MAC with the graph")
    weights = [weight(e.rss_dbm, config) for e in record.entries]

    next_row = graph.n_nodes
    record_row = next_row
    next_row += 1
    mac_labels = list(graph.mac_labels)
    new_mac_rows: list[int] = []
    new_macs: list[NodeId] = []
    e_mac: list[int] = []
    for entry in record.entries:
        node = graph.mac_index.get(entry.mac)
        if node is None:
            node = NodeId(NodeKind.MAC, len(mac_labels))
            mac_labels.append(entry.mac)
            new_mac_rows.append(next_row)
            next_row += 1
            new_macs.append(node)
        e_mac.append(node.index)

    new_record = NodeId(NodeKind.RECORD, len(graph.record_labels))
    extended = BipartiteGraph(
        mac_labels=tuple(mac_labels),
        record_labels=graph.record_labels + (record.record_id,),
        mac_rows=_frozen(np.concatenate([graph.mac_rows, np.asarray(new_mac_rows, dtype=np.int64)])),
        record_rows=_frozen(np.append(graph.record_rows, record_row)),
        edge_mac=_frozen(np.concatenate([graph.edge_mac, np.asarray(e_mac, dtype=np.int64)])),
        edge_record=_frozen(
            np.concatenate([graph.edge_record, np.full(len(e_mac), new_record.index, dtype=np.int64)])
        ),
        edge_weight=_frozen(np.concatenate([graph.edge_weight, np.asarray(weights)])),
    )
    return extended, new_record, new_macs


def sample_edge(graph: BipartiteGraph, rng: np.random.Generator) -> tuple[NodeId, NodeId]:
    k = graph.edge_sampler.sample(rng)
    src, dst, _ = graph.directed_edges
    return graph.node_at(src[k]), graph.node_at(dst[k])


def sample_noise(graph: BipartiteGraph, rng: np.random.Generator) -> NodeId:
    return graph.node_at(graph.noise_sampler.sample(rng))


def dump_tsv(graph: BipartiteGraph, nodes_path: str | Path, edges_path: str | Path) -> None:
    """Debug dump: ``kind index label degree`` nodes and ``mac_index record_index weight`` edges."""
    deg = graph.weighted_degree
    with open(nodes_path, "w", encoding="utf-8") as fh:
        for kind, labels, rows in (
            (NodeKind.MAC, graph.mac_labels, graph.mac_rows),
            (NodeKind.RECORD, graph.record_labels, graph.record_rows),
        ):
            for k, (label, row) in enumerate(zip(labels, rows)):
                fh.write(f"{kind.value}\t{k}\t{label}\t{float(deg[row])!r}\n")
    with open(edges_path, "w", encoding="utf-8") as fh:
        for m, r, w in zip(graph.edge_mac, graph.edge_record, graph.edge_weight):
            fh.write(f"{m}\t{r}\t{float(w)!r}\n")
