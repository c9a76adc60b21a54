"""Average-linkage agglomeration constrained to one floor label per cluster.

Clusters merge closest-first, where the distance between two clusters is
the mean Euclidean distance over all cross pairs. A merge is forbidden if
the union would hold two labeled points, so the process ends with exactly
one cluster per labeled point.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from floorgraph.errors import DimensionMismatch, NoLabels

# Incremental updates and direct recomputation disagree in the last bits, so
# distances this close (relative) to the step minimum count as ties.
TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class LabeledPoint:
    node: object  # record NodeId, or any caller key
    embedding: np.ndarray
    floor_label: str | None = None


@dataclass(frozen=True, eq=False)
class Cluster:
    members: tuple[LabeledPoint, ...]
    floor_label: str
    centroid: np.ndarray


@dataclass(frozen=True)
class Merge:
    left: int  # creation indices
    right: int
    created: int
    distance: float
    allowed_minimum: float  # smallest allowed pair distance at that step, from a full scan


@dataclass(frozen=True, eq=False)
class ClusterModel:
    clusters: tuple[Cluster, ...]
    dim: int
    trace: tuple[Merge, ...] = field(default=(), repr=False)

    @property
    def centroids(self) -> np.ndarray:
        return np.stack([c.centroid for c in self.clusters])

    @property
    def labels(self) -> list[str]:
        return [c.floor_label for c in self.clusters]


def cluster_distance(a, b) -> float:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"{a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("clusters must be non-empty")
    return float(cdist(a, b).mean())


def update_distance_merge(d_ai: float, d_aj: float, size_i: int, size_j: int) -> float:
    """Average-linkage distance from cluster a to the union of i and j."""
    return (size_i * d_ai + size_j * d_aj) / (size_i + size_j)


def agglomerate(points: Sequence[LabeledPoint], audit: bool = False) -> ClusterModel:
    """Cluster ``points``; ties go to the lexicographically smallest creation-index pair.

    Distances within a relative ``TIE_RTOL`` of the step minimum are ties.

    Singletons get creation indices 0..n-1 in input order and every merge
    creates the next index. With ``audit`` each merge also records the
    minimum allowed pair distance found by a full scan (quadratic per step).
    """
    if not points:
        raise NoLabels("no points to cluster")
    vecs = [np.asarray(p.embedding, dtype=np.float64) for p in points]
    if any(v.ndim != 1 or v.shape != vecs[0].shape for v in vecs):
        raise DimensionMismatch("embeddings must be 1-D vectors of one length")
    X = np.stack(vecs)
    n, dim = X.shape
    if not any(p.floor_label for p in points):
        raise NoLabels("at least one labeled point is required")

    cap = 2 * n
    dist = np.full((cap, cap), np.nan)
    dist[:n, :n] = cdist(X, X)
    size = np.zeros(cap, dtype=np.int64)
    size[:n] = 1
    labeled = np.zeros(cap, dtype=np.int64)
    labeled[:n] = [1 if p.floor_label else 0 for p in points]
    members: dict[int, list[int]] = {k: [k] for k in range(n)}
    alive = np.zeros(cap, dtype=np.bool_)
    alive[:n] = True

    heap = [
        (dist[a, b], a, b)
        for a in range(n)
        for b in range(a + 1, n)
        if labeled[a] + labeled[b] <= 1
    ]
    heapq.heapify(heap)
    trace: list[Merge] = []
    created = n
    while heap:
        d, a, b = heapq.heappop(heap)
        if not (alive[a] and alive[b]):
            continue
        deferred = []
        while heap and heap[0][0] <= d + TIE_RTOL * d:
            tie = heapq.heappop(heap)
            if alive[tie[1]] and alive[tie[2]]:
                if tie[1:] < (a, b):
                    deferred.append((d, a, b))
                    d, a, b = tie
                else:
                    deferred.append(tie)
        for entry in deferred:
            heapq.heappush(heap, entry)
        floor = np.nan
        if audit:
            floor = _scan_minimum(dist, alive, labeled)
        k = created
        created += 1
        others = np.flatnonzero(alive)
        others = others[(others != a) & (others != b)]
        dist[k, others] = dist[others, k] = update_distance_merge(
            dist[a, others], dist[b, others], size[a], size[b]
        )
        size[k] = size[a] + size[b]
        labeled[k] = labeled[a] + labeled[b]
        members[k] = members.pop(a) + members.pop(b)
        alive[a] = alive[b] = False
        alive[k] = True
        trace.append(Merge(a, b, k, float(d), floor))
        for o in others[labeled[others] + labeled[k] <= 1]:
            heapq.heappush(heap, (dist[o, k], int(o), k))

    clusters = []
    for k in sorted(members):
        idx = members[k]
        label = next(points[m].floor_label for m in idx if points[m].floor_label)
        clusters.append(
            Cluster(tuple(points[m] for m in idx), label, X[idx].mean(axis=0))
        )
    return ClusterModel(tuple(clusters), dim, tuple(trace))


def _scan_minimum(dist, alive, labeled) -> float:
    live = np.flatnonzero(alive)
    sub = dist[np.ix_(live, live)]
    ok = (labeled[live][:, None] + labeled[live][None, :] <= 1) & ~np.eye(live.size, dtype=bool)
    return float(sub[ok].min()) if ok.any() else np.inf
