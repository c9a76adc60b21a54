import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floorgraph.cluster import Cluster, ClusterModel, LabeledPoint
from floorgraph.errors import DimensionMismatch, EmptyInput, EmptyModel
from floorgraph.predict_eval import evaluate, predict
from oracles import confusion_metrics


def model_from(centroids, labels):
    clusters = tuple(
        Cluster((LabeledPoint(k, np.asarray(c, float), lab),), lab, np.asarray(c, float))
        for k, (c, lab) in enumerate(zip(centroids, labels))
    )
    return ClusterModel(clusters, len(centroids[0]))


def test_predict_nearest_centroid():
    p = predict([2, 1], model_from([[0, 0], [10, 0]], ["F1", "F2"]), "r")
    assert (p.record_id, p.floor_label) == ("r", "F1")
    assert p.distance == pytest.approx(math.sqrt(5))
    assert p.runner_up_margin == pytest.approx(math.sqrt(65) - math.sqrt(5))


def test_predict_exact_hit_and_tie():
    m = model_from([[0, 0], [10, 0], [10, 0]], ["F1", "F2", "F3"])
    hit = predict([10, 0], m)
    assert (hit.floor_label, hit.distance, hit.runner_up_margin) == ("F2", 0.0, 0.0)


def test_predict_single_cluster_margin():
    assert predict([1, 0], model_from([[0, 0]], ["F1"])).runner_up_margin == 0.0


def test_predict_errors():
    with pytest.raises(EmptyModel):
        predict([0, 0], ClusterModel((), 2))
    with pytest.raises(DimensionMismatch):
        predict([0, 0, 0], model_from([[0, 0]], ["F1"]))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_predict_invariant_to_scaling_and_rotation(seed, scale):
    rng = np.random.default_rng(seed)
    C = rng.normal(size=(5, 3))
    u = rng.normal(size=3)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    labels = [f"F{k}" for k in range(5)]
    base = predict(u, model_from(C, labels))
    d = np.linalg.norm(C - u, axis=1)
    gap = np.sort(d)[1] - d.min()
    if gap < 1e-9:  # near-ties may legitimately flip under rounding
        return
    assert predict(scale * u, model_from(scale * C, labels)).floor_label == base.floor_label
    assert predict(Q @ u, model_from(C @ Q.T, labels)).floor_label == base.floor_label
    assert base.distance == pytest.approx(d.min())
    assert np.all(base.distance <= d + 1e-12)


def example_pairs():
    return (
        [("F1", "F1")] * 3 + [("F2", "F1")] * 2 + [("F2", "F2")] * 4 + [("F1", "F2")]
    )


def test_evaluate_worked_example():
    r = evaluate(example_pairs())
    assert (r.per_floor["F1"].tp, r.per_floor["F1"].fp, r.per_floor["F1"].fn) == (3, 1, 2)
    assert (r.per_floor["F2"].tp, r.per_floor["F2"].fp, r.per_floor["F2"].fn) == (4, 2, 1)
    assert r.micro_p == r.micro_r == r.micro_f == pytest.approx(0.7)
    assert r.macro_p == pytest.approx((0.75 + 4 / 6) / 2)
    assert r.macro_p == pytest.approx(0.70833, abs=1e-5)
    assert r.macro_r == pytest.approx(0.7)
    assert r.macro_f == pytest.approx(0.70415, abs=1e-4)
    assert r.macro_f == pytest.approx(2 * r.macro_p * 0.7 / (r.macro_p + 0.7), rel=1e-12)


def test_evaluate_perfect():
    r = evaluate([("A", "A"), ("B", "B"), ("C", "C")])
    assert (r.micro_p, r.micro_r, r.micro_f, r.macro_p, r.macro_r, r.macro_f) == (1.0,) * 6


def test_evaluate_unused_floor_counts_in_macro():
    r = evaluate([("A", "A"), ("B", "B")], floors=["A", "B", "C"])
    assert r.per_floor["C"].precision == r.per_floor["C"].recall == r.per_floor["C"].f == 0.0
    assert r.macro_p == pytest.approx(2 / 3)
    assert r.micro_f == 1.0


def test_evaluate_empty():
    with pytest.raises(EmptyInput):
        evaluate([])


def test_abstention_is_a_false_negative_only():
    r = evaluate([("A", "A"), (None, "A"), ("B", "B")])
    assert (r.per_floor["A"].tp, r.per_floor["A"].fn, r.per_floor["A"].fp) == (1, 1, 0)
    assert r.n_abstained == 1
    assert r.micro_p == 1.0 and r.micro_r == pytest.approx(2 / 3)


def test_report_serialises():
    d = evaluate(example_pairs()).to_dict()
    assert d["per_floor"]["F1"]["tp"] == 3 and d["n_records"] == 10


labels = st.sampled_from(["F1", "F2", "F3", "F4"])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(labels, labels), min_size=1, max_size=60), st.lists(labels, max_size=4))
def test_evaluate_matches_confusion_matrix_oracle(pairs, extra):
    r = evaluate(pairs, floors=extra)
    pred, truth = zip(*pairs)
    expected = confusion_metrics(pred, truth, extra)
    for key, value in expected.items():
        assert getattr(r, key) == pytest.approx(value, abs=1e-12)

    assert sum(s.tp + s.fn for s in r.per_floor.values()) == len(pairs)
    assert sum(s.fp for s in r.per_floor.values()) == sum(s.fn for s in r.per_floor.values())
    assert r.micro_p == pytest.approx(r.micro_r) == pytest.approx(r.micro_f)
    metrics = [r.micro_p, r.micro_r, r.micro_f, r.macro_p, r.macro_r, r.macro_f]
    assert all(0.0 <= m <= 1.0 for m in metrics)
    assert r.macro_f == pytest.approx(confusion_metrics(pred, truth, extra)["macro_f"], abs=1e-12)
    if r.macro_p + r.macro_r:
        assert r.macro_f == pytest.approx(2 * r.macro_p * r.macro_r / (r.macro_p + r.macro_r), rel=1e-12)


def test_macro_f_is_built_from_macro_p_and_r_not_from_per_floor_f():
    # P_A = 1, R_A = 0.01 and P_B = 0.01, R_B = 1: each F_i is ~0.02 but the
    # harmonic mean of the two averages is 0.505.
    r = evaluate([("A", "A")] + [("B", "A")] * 99 + [("B", "B")])
    assert max(s.f for s in r.per_floor.values()) == pytest.approx(2 / 101)
    assert r.macro_f == pytest.approx(0.505)
