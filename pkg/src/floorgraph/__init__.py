"""Semi-supervised floor identification from crowdsourced RF scans.

Scans become a weighted MAC/record bipartite graph, nodes are embedded with
the E-LINE negative-sampling objective, and record embeddings are clustered
around a few floor-labeled samples for nearest-centroid prediction.
"""

from floorgraph.cluster import ClusterModel, LabeledPoint, agglomerate
from floorgraph.dataset import Dataset, ScanEntry, ScanRecord, load_jsonl, split
from floorgraph.eline import EmbeddingTable, TrainConfig, embed_new, train
from floorgraph.graph import BipartiteGraph, NodeId, NodeKind, WeightConfig, build, extend
from floorgraph.predict_eval import EvalReport, Prediction, evaluate, predict
from floorgraph.synthgen import BuildingSpec, generate

__all__ = [
    "BipartiteGraph",
    "BuildingSpec",
    "ClusterModel",
    "Dataset",
    "EmbeddingTable",
    "EvalReport",
    "LabeledPoint",
    "NodeId",
    "NodeKind",
    "Prediction",
    "ScanEntry",
    "ScanRecord",
    "TrainConfig",
    "WeightConfig",
    "agglomerate",
    "build",
    "embed_new",
    "evaluate",
    "extend",
    "generate",
    "load_jsonl",
    "predict",
    "split",
    "train",
]
