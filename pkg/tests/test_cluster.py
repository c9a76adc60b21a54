import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floorgraph.cluster import LabeledPoint, agglomerate, cluster_distance, update_distance_merge
from floorgraph.errors import DimensionMismatch, NoLabels
from oracles import brute_force_constrained_merge


def points(X, labels):
    return [LabeledPoint(k, np.asarray(x, dtype=float), lab) for k, (x, lab) in enumerate(zip(X, labels))]


def partition(model):
    return {frozenset(p.node for p in c.members) for c in model.clusters}


def test_distance_examples():
    assert cluster_distance([[0, 0]], [[3, 4]]) == 5.0
    assert cluster_distance([[1.5, -2]], [[1.5, -2]]) == 0.0
    assert cluster_distance([[0, 0], [2, 0]], [[1, 1]]) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cluster_distance([[0, 0]], [[0, 0, 0]])


def test_update_distance_simple_mean():
    assert update_distance_merge(2.0, 4.0, 1, 1) == 3.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_lance_williams_equals_direct_average(seed, na, ni, nj):
    rng = np.random.default_rng(seed)
    A, I, J = rng.normal(size=(na, 3)), rng.normal(size=(ni, 3)), rng.normal(size=(nj, 3))
    direct = cluster_distance(A, np.vstack([I, J]))
    updated = update_distance_merge(cluster_distance(A, I), cluster_distance(A, J), ni, nj)
    assert abs(direct - updated) < 1e-9


def test_one_dimensional_example():
    model = agglomerate(points([[0], [1], [10], [11]], ["A", None, None, "B"]))
    by_label = {c.floor_label: {p.node for p in c.members} for c in model.clusters}
    assert by_label == {"A": {0, 1}, "B": {2, 3}}
    [first, second] = model.trace
    assert (first.left, first.right, first.distance) == (0, 1, 1.0)
    assert (second.left, second.right, second.distance) == (2, 3, 1.0)


def test_all_labeled_means_no_merges():
    model = agglomerate(points(np.eye(4), ["a", "b", "c", "d"]))
    assert model.trace == ()
    assert len(model.clusters) == 4


def test_forty_eight_samples_three_labels():
    rng = np.random.default_rng(9)
    centres = np.array([[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]])
    X = np.vstack([c + rng.normal(0, 0.7, (16, 2)) for c in centres])
    labels = [None] * 48
    for f in range(3):
        labels[16 * f] = f"F{f + 1}"
    model = agglomerate(points(X, labels))
    assert len(model.clusters) == 3
    for c in model.clusters:
        f = int(c.floor_label[1:]) - 1
        assert {p.node for p in c.members} == set(range(16 * f, 16 * f + 16))


def test_no_labels_raises():
    with pytest.raises(NoLabels):
        agglomerate(points([[0], [1]], [None, None]))


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionMismatch):
        agglomerate([LabeledPoint(0, np.zeros(2), "A"), LabeledPoint(1, np.zeros(3))])


def test_ties_go_to_smallest_creation_pair():
    # unit square: four allowed pairs at distance exactly 1, (0, 1) wins
    X = [[0, 0], [1, 0], [0, 1], [1, 1]]
    model = agglomerate(points(X, ["A", None, None, "B"]))
    assert (model.trace[0].left, model.trace[0].right) == (0, 1)


label_sets = st.lists(st.booleans(), min_size=2, max_size=10).filter(any)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), label_sets, st.booleans())
def test_matches_brute_force_oracle(seed, labeled, on_grid):
    rng = np.random.default_rng(seed)
    n = len(labeled)
    # integer grids create many exact ties, exercising the tie rule
    X = rng.integers(0, 4, (n, 2)).astype(float) if on_grid else rng.normal(size=(n, 3))
    labels = [f"L{k}" if m else None for k, m in enumerate(labeled)]
    model = agglomerate(points(X, labels))
    assert partition(model) == brute_force_constrained_merge(X, labeled)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.integers(1, 5))
def test_model_invariants_and_audit(seed, n, n_floors):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    labels = [f"F{rng.integers(n_floors)}" if rng.random() < 0.3 else None for _ in range(n)]
    if not any(labels):
        labels[0] = "F0"
    model = agglomerate(points(X, labels), audit=True)

    assert Counter(c.floor_label for c in model.clusters) == Counter(l for l in labels if l)
    seen = sorted(p.node for c in model.clusters for p in c.members)
    assert seen == list(range(n))
    for c in model.clusters:
        tagged = [p.floor_label for p in c.members if p.floor_label]
        assert tagged == [c.floor_label]
        np.testing.assert_allclose(c.centroid, np.mean([p.embedding for p in c.members], axis=0), atol=1e-9)

    # replay the trace: constraint safety and merge minimality at every step
    groups = {k: {k} for k in range(n)}
    for m in model.trace:
        assert m.distance <= m.allowed_minimum * (1 + 1e-12)
        left, right = groups.pop(m.left), groups.pop(m.right)
        assert m.distance == pytest.approx(cluster_distance(X[sorted(left)], X[sorted(right)]), abs=1e-9)
        merged = left | right
        assert sum(labels[k] is not None for k in merged) <= 1
        groups[m.created] = merged
    assert len(groups) == len(model.clusters)


def test_several_clusters_share_a_floor():
    X = [[0], [1], [20], [21], [50]]
    model = agglomerate(points(X, ["F1", None, "F1", None, "F2"]))
    assert sorted(model.labels) == ["F1", "F1", "F2"]
    assert model.centroids.shape == (3, 1)


def test_rounding_level_ties_use_the_creation_order_rule():
    # points 3, 4, 5 coincide, so in the last step {5} and {3, 4} are exactly
    # as far from the big cluster; only rounding separates the two values
    X = [[3, 1], [3, 3], [0, 3], [1, 0], [1, 0], [1, 0], [2, 3], [3, 3], [0, 0]]
    labeled = [False, False, False, True, False, True, False, False, True]
    model = agglomerate(points(X, ["L" if m else None for m in labeled]))
    assert partition(model) == {frozenset({0, 1, 2, 5, 6, 7}), frozenset({3, 4}), frozenset({8})}
    assert partition(model) == brute_force_constrained_merge(X, labeled)
