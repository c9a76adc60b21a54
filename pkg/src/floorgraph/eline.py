"""E-LINE node embeddings on the bipartite graph.

Every node carries an ego vector (used downstream) and a context vector
(used only by the objective). Training minimises the negative-sampling loss

    -c_ij * ( log[s(u'_j.u_i) s(u_j.u'_i)] + sum_z log[s(-u'_z.u_i) s(-u_z.u'_i)] )

summed over directed edges, where ``s`` is the logistic function and the
``z`` are K nodes drawn with probability proportional to degree**0.75.
``mode="line2"`` keeps only the ego-to-context factors (classic LINE with
second-order proximity).
"""

from __future__ import annotations

import math
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from floorgraph import _kernels
from floorgraph.alias import AliasTable
from floorgraph.errors import EmptyGraph, NotNeighbors, UnknownNode
from floorgraph.graph import BipartiteGraph, NodeId

MODES = ("eline", "line2")


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 8
    learning_rate: float = 0.001
    dropout_rate: float = 0.1
    negatives_k: int = 5
    samples_per_edge: int = 100  # budget = samples_per_edge * |directed edges|
    total_edge_samples: int | None = None  # overrides samples_per_edge
    mode: str = "eline"
    lr_decay: str = "constant"  # or "linear" (down to 10% of the initial rate)
    seed: int = 0
    new_node_passes: int = 200
    threads: int = 0  # 0: deterministic single thread

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.negatives_k < 1:
            raise ValueError("negatives_k must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.lr_decay not in ("constant", "linear"):
            raise ValueError("lr_decay must be 'constant' or 'linear'")

    def budget(self, graph: BipartiteGraph) -> int:
        if self.total_edge_samples is not None:
            return int(self.total_edge_samples)
        return self.samples_per_edge * 2 * graph.n_edges


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    ego: np.ndarray
    context: np.ndarray

    def __post_init__(self):
        if self.ego.shape != self.context.shape or self.ego.ndim != 2:
            raise ValueError("ego and context must be matching (n, d) arrays")
        for a in (self.ego, self.context):
            a.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.ego.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.ego.shape[0]

    def ego_of(self, graph: BipartiteGraph, node: NodeId) -> np.ndarray:
        return self.ego[graph.row(node)]

    def context_of(self, graph: BipartiteGraph, node: NodeId) -> np.ndarray:
        return self.context[graph.row(node)]


@dataclass
class TrainReport:
    loss_trace: list[tuple[int, float]] = field(default_factory=list)
    wall_time: float = 0.0

    def window_mean(self, start: float, stop: float) -> float:
        """Mean traced loss over the fraction window [start, stop) of the run."""
        total = self.loss_trace[-1][0]
        vals = [v for n, v in self.loss_trace if start * total < n <= stop * total]
        return float(np.mean(vals))


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


def _log_softmax_at(scores: np.ndarray, k: int) -> float:
    m = scores.max()
    return float(scores[k] - m - math.log(np.exp(scores - m).sum()))


def softmax_context_given_ego(graph: BipartiteGraph, table: EmbeddingTable, j: NodeId, i: NodeId) -> float:
    """P(context of j | ego of i) under the full softmax over all nodes."""
    scores = table.context @ table.ego[graph.row(i)]
    return math.exp(_log_softmax_at(scores, graph.row(j)))


def softmax_ego_given_context(graph: BipartiteGraph, table: EmbeddingTable, j: NodeId, i: NodeId) -> float:
    """P(ego of j | context of i) under the full softmax over all nodes."""
    scores = table.ego @ table.context[graph.row(i)]
    return math.exp(_log_softmax_at(scores, graph.row(j)))


def empirical_prob(graph: BipartiteGraph, i: NodeId, j: NodeId) -> float:
    ri, rj = graph.row(i), graph.row(j)
    c = graph.edge_weight_between(ri, rj)
    if c is None:
        raise NotNeighbors(f"{i} and {j} are not adjacent")
    return c / float(graph.weighted_degree[ri])


def _edge_weight(graph: BipartiteGraph, i: NodeId, j: NodeId) -> tuple[int, int, float]:
    ri, rj = graph.row(i), graph.row(j)
    c = graph.edge_weight_between(ri, rj)
    if c is None:
        raise NotNeighbors(f"{i} and {j} are not adjacent")
    return ri, rj, c


def _neg_log_sigmoid(x: float) -> float:
    return float(np.logaddexp(0.0, -x))


def loss_term(
    graph: BipartiteGraph,
    table: EmbeddingTable,
    i: NodeId,
    j: NodeId,
    negatives: Sequence[NodeId],
    mode: str = "eline",
) -> float:
    ri, rj, c = _edge_weight(graph, i, j)
    u, uc = table.ego, table.context
    total = _neg_log_sigmoid(uc[rj] @ u[ri])
    if mode == "eline":
        total += _neg_log_sigmoid(u[rj] @ uc[ri])
    for z in negatives:
        rz = graph.row(z)
        total += _neg_log_sigmoid(-(uc[rz] @ u[ri]))
        if mode == "eline":
            total += _neg_log_sigmoid(-(u[rz] @ uc[ri]))
    return c * total


def loss_term_gradients(
    graph: BipartiteGraph,
    table: EmbeddingTable,
    i: NodeId,
    j: NodeId,
    negatives: Sequence[NodeId],
    mode: str = "eline",
) -> dict[tuple[int, str], np.ndarray]:
    """Analytic gradient of :func:`loss_term`, keyed by (row, "ego" | "context")."""
    ri, rj, c = _edge_weight(graph, i, j)
    u, uc = table.ego, table.context
    grads: dict[tuple[int, str], np.ndarray] = {}

    def add(key, g):
        grads[key] = grads.get(key, 0.0) + c * g

    ga = 1.0 - sigmoid(uc[rj] @ u[ri])
    add((ri, "ego"), -ga * uc[rj])
    add((rj, "context"), -ga * u[ri])
    if mode == "eline":
        gb = 1.0 - sigmoid(u[rj] @ uc[ri])
        add((ri, "context"), -gb * u[rj])
        add((rj, "ego"), -gb * uc[ri])
    for z in negatives:
        rz = graph.row(z)
        sp = sigmoid(uc[rz] @ u[ri])
        add((ri, "ego"), sp * uc[rz])
        add((rz, "context"), sp * u[ri])
        if mode == "eline":
            sq = sigmoid(u[rz] @ uc[ri])
            add((ri, "context"), sq * u[rz])
            add((rz, "ego"), sq * uc[ri])
    return grads


def init_vectors(n: int, dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    bound = 0.5 / dim
    return rng.uniform(-bound, bound, (n, dim)), rng.uniform(-bound, bound, (n, dim))


def _thread_count(config: TrainConfig) -> int:
    if config.threads:
        return config.threads
    return int(os.environ.get("FLOORGRAPH_THREADS", "0") or 0)


def _run_sgd(
    ego: np.ndarray,
    ctx: np.ndarray,
    src: np.ndarray,
    dst: np.ndarray,
    edges: AliasTable,
    noise: AliasTable,
    n_samples: int,
    config: TrainConfig,
    trainable: np.ndarray,
    seed: int,
    threads: int = 0,
) -> list[tuple[int, float]]:
    trace_every = max(1, n_samples // 100)
    args = (
        src, dst, edges.prob, edges.alias, noise.prob, noise.alias,
    )
    common = (
        config.negatives_k, config.learning_rate, config.lr_decay == "linear",
        config.dropout_rate, config.mode == "eline", trainable,
    )
    if threads <= 1:
        trace = np.empty(n_samples // trace_every + 1)
        used = _kernels.sgd_loop(
            ego, ctx, *args, n_samples, *common, _kernels.seed_state(seed), trace_every, trace
        )
        return [(min((k + 1) * trace_every, n_samples), float(trace[k])) for k in range(used)]

    # Hogwild: workers race on the shared arrays without locks.
    share = [n_samples // threads + (w < n_samples % threads) for w in range(threads)]
    traces = [np.empty(s // trace_every + 2) for s in share]
    used = [0] * threads

    def work(w: int) -> None:
        used[w] = _kernels.sgd_loop(
            ego, ctx, *args, share[w], *common, _kernels.seed_state(seed + 7919 * (w + 1)),
            trace_every, traces[w],
        )

    pool = [threading.Thread(target=work, args=(w,)) for w in range(threads)]
    for t in pool:
        t.start()
    for t in pool:
        t.join()
    n_slots = min(used)
    return [
        (min((k + 1) * trace_every * threads, n_samples), float(np.mean([tr[k] for tr in traces])))
        for k in range(n_slots)
    ]


def train(graph: BipartiteGraph, config: TrainConfig = TrainConfig()) -> tuple[EmbeddingTable, TrainReport]:
    if graph.n_edges == 0:
        raise EmptyGraph("cannot train on a graph without edges")
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    ego, ctx = init_vectors(graph.n_nodes, config.dim, rng)
    src, dst, _ = graph.directed_edges
    trace = _run_sgd(
        ego, ctx, src, dst, graph.edge_sampler, graph.noise_sampler,
        config.budget(graph), config, np.ones(graph.n_nodes, dtype=np.bool_),
        config.seed, _thread_count(config),
    )
    return EmbeddingTable(ego, ctx), TrainReport(trace, time.perf_counter() - start)


def embed_new(
    graph: BipartiteGraph,
    table: EmbeddingTable,
    new_nodes: Sequence[NodeId],
    config: TrainConfig = TrainConfig(),
) -> EmbeddingTable:
    """Embed nodes added by :func:`~floorgraph.graph.extend`, keeping all others fixed.

    Runs the training loop on the directed edges incident to ``new_nodes``
    for ``config.new_node_passes`` times their count. Negatives come from the
    extended graph's noise distribution; only new rows are ever written.
    """
    if not new_nodes:
        return table
    rows = []
    for node in new_nodes:
        try:
            rows.append(graph.row(node))
        except IndexError:
            raise UnknownNode(f"{node} not in graph") from None
    n_old = table.n_nodes
    if n_old + len(set(rows)) != graph.n_nodes or min(rows) < n_old:
        raise UnknownNode("new_nodes must be exactly the rows appended after the table")

    rng = np.random.default_rng([config.seed, n_old])
    new_ego, new_ctx = init_vectors(graph.n_nodes - n_old, config.dim, rng)
    ego = np.concatenate([table.ego, new_ego])
    ctx = np.concatenate([table.context, new_ctx])
    trainable = np.zeros(graph.n_nodes, dtype=np.bool_)
    trainable[rows] = True

    src, dst, w = graph.directed_edges
    local = np.flatnonzero(trainable[src] | trainable[dst])
    n_samples = config.new_node_passes * local.size
    _run_sgd(
        ego, ctx, src[local], dst[local], AliasTable(w[local]), graph.noise_sampler,
        n_samples, config, trainable, config.seed + n_old,
    )
    return EmbeddingTable(ego, ctx)


def export_tsv(graph: BipartiteGraph, table: EmbeddingTable, path) -> None:
    """``node_kind node_label v1 ... vd`` per node, for external plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in range(graph.n_nodes):
            node = graph.node_at(row)
            vec = "\t".join(repr(float(x)) for x in table.ego[row])
            fh.write(f"{node.kind.value}\t{graph.label(node)}\t{vec}\n")
