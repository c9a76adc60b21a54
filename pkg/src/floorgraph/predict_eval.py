"""Nearest-centroid floor prediction and micro/macro P, R, F."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from floorgraph.cluster import ClusterModel
from floorgraph.errors import DimensionMismatch, EmptyInput, EmptyModel


@dataclass(frozen=True)
class Prediction:
    record_id: str
    floor_label: str
    distance: float
    runner_up_margin: float


def predict(embedding, model: ClusterModel, record_id: str = "") -> Prediction:
    if not model.clusters:
        raise EmptyModel("model has no clusters")
    u = np.asarray(embedding, dtype=np.float64)
    if u.shape != (model.dim,):
        raise DimensionMismatch(f"embedding shape {u.shape}, model dim {model.dim}")
    d = np.linalg.norm(model.centroids - u, axis=1)
    best = int(np.argmin(d))  # first minimum wins ties
    margin = float(np.partition(d, 1)[1] - d[best]) if d.size > 1 else 0.0
    return Prediction(record_id, model.clusters[best].floor_label, float(d[best]), margin)


@dataclass(frozen=True)
class FloorScore:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f: float


@dataclass(frozen=True)
class EvalReport:
    per_floor: dict[str, FloorScore]
    micro_p: float
    micro_r: float
    micro_f: float
    macro_p: float
    macro_r: float
    macro_f: float
    n_records: int
    n_abstained: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def _f(p: float, r: float) -> float:
    return _ratio(2 * p * r, p + r)


def evaluate(
    pairs: Iterable[tuple[str | None, str]], floors: Sequence[str] | None = None
) -> EvalReport:
    """Score (predicted, truth) pairs.

    ``predicted`` may be None for a record that got no prediction (an
    outside-building scan); it then counts only as a false negative. The
    floor set defaults to every label seen in either column; pass the
    model's floors to fix the macro denominator. Any 0/0 ratio is 0.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("nothing to evaluate")
    seen = {t for _, t in pairs} | {p for p, _ in pairs if p is not None}
    names = sorted(seen | set(floors or ()))
    tp = dict.fromkeys(names, 0)
    fp = dict.fromkeys(names, 0)
    fn = dict.fromkeys(names, 0)
    for pred, truth in pairs:
        if pred == truth:
            tp[truth] += 1
        else:
            fn[truth] += 1
            if pred is not None:
                fp[pred] += 1

    per_floor = {}
    for name in names:
        p = _ratio(tp[name], tp[name] + fp[name])
        r = _ratio(tp[name], tp[name] + fn[name])
        per_floor[name] = FloorScore(tp[name], fp[name], fn[name], p, r, _f(p, r))

    sum_tp = sum(tp.values())
    micro_p = _ratio(sum_tp, sum_tp + sum(fp.values()))
    micro_r = _ratio(sum_tp, sum_tp + sum(fn.values()))
    macro_p = float(np.mean([s.precision for s in per_floor.values()]))
    macro_r = float(np.mean([s.recall for s in per_floor.values()]))
    return EvalReport(
        per_floor=per_floor,
        micro_p=micro_p,
        micro_r=micro_r,
        micro_f=_f(micro_p, micro_r),
        macro_p=macro_p,
        macro_r=macro_r,
        macro_f=_f(macro_p, macro_r),
        n_records=len(pairs),
        n_abstained=sum(p is None for p, _ in pairs),
    )
