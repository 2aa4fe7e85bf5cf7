"""End-to-end training and prediction: router + per-cluster classifiers.

Prediction cost is tracked in vector multiplications (inner products):
a routed instance pays q products for the router plus one per label in its
cluster, against m for the naive scan of every label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .logistic import LinearModel, TrainConfig, score_rows, train_ova
from .partition import BpConfig, Partition, fit_partition
from .sparse import (BinaryLabelMatrix, Dataset, SparseMatrix, column_sums,
                     restrict_columns, take_rows)


@dataclass
class MultCounter:
    """Counts inner products actually executed by score calls."""

    count: int = 0

    def add(self, k: int) -> None:
        self.count += int(k)


@dataclass(frozen=True, eq=False)
class PredictionResult:
    top_labels: tuple[np.ndarray, ...]   # per instance, ranked best first
    scores: tuple[np.ndarray, ...]       # matching scores, descending
    mults_used: np.ndarray               # per-instance vector multiplications

    @property
    def n(self) -> int:
        return len(self.top_labels)


@dataclass(frozen=True, eq=False)
class BpModel:
    """Deployable artifact: router, per-cluster models, and the partition."""

    router: LinearModel
    cluster_models: tuple[LinearModel, ...]
    partition: Partition
    train_label_counts: np.ndarray  # per-label positives in the training set

    def __post_init__(self):
        object.__setattr__(self, "train_label_counts",
                           np.ascontiguousarray(self.train_label_counts, dtype=np.int64))
        if self.router.num_classes != self.partition.q:
            raise ValueError("router classes must match partition.q")
        if len(self.cluster_models) != self.partition.q:
            raise ValueError("need one cluster model per instance cluster")
        for l, mdl in enumerate(self.cluster_models):
            if not np.array_equal(mdl.class_ids, self.partition.label_clusters[l]):
                raise ValueError(f"cluster model {l} classes differ from its label cluster")


def _onehot_labels(assignment: np.ndarray, q: int) -> BinaryLabelMatrix:
    n = assignment.shape[0]
    return BinaryLabelMatrix(n, q, np.arange(n + 1, dtype=np.int64),
                             assignment.astype(np.int64))


def train_with_partition(ds: Dataset, partition: Partition, cfg: TrainConfig) -> BpModel:
    """Train the router and one model per (instance cluster, label cluster) pair."""
    if partition.n != ds.n:
        raise ValueError(f"partition covers {partition.n} instances but dataset has {ds.n}")
    X, Y = ds.features, ds.labels
    assign = partition.instance_cluster_of
    q = partition.q
    router = train_ova(X, _onehot_labels(assign, q), cfg,
                       class_ids=np.arange(q, dtype=np.int64))
    cluster_models = []
    for l in range(q):
        rows = np.nonzero(assign == l)[0]
        labels = partition.label_clusters[l]
        Xl = take_rows(X, rows)
        Yl = restrict_columns(take_rows(Y, rows), labels)
        cluster_models.append(train_ova(Xl, Yl, cfg, class_ids=labels))
    return BpModel(router=router, cluster_models=tuple(cluster_models),
                   partition=partition, train_label_counts=column_sums(Y))


def train_bp(ds: Dataset, bp_cfg: BpConfig, train_cfg: TrainConfig) -> BpModel:
    """Fit the partition, then train router and per-cluster classifiers.

    ``bp_cfg.q`` must be explicit here; resolve "auto" beforehand with
    tuning.search_q.
    """
    partition = fit_partition(ds, bp_cfg)
    return train_with_partition(ds, partition, train_cfg)


def _rank_top_k(label_ids: np.ndarray, scores: np.ndarray, k: int):
    """Top-k by descending score, ties to the smaller label id."""
    order = np.lexsort((label_ids, -scores))[: max(k, 0)]
    return label_ids[order], scores[order]


def predict_bp(model: BpModel, X_test: SparseMatrix, k: int,
               counter: MultCounter | None = None) -> PredictionResult:
    """Route each instance, then rank only its cluster's labels.

    mults_used per instance is q + |label cluster|; if the cluster holds
    fewer than k labels, fewer than k predictions are returned.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    q = model.partition.q
    router_scores = score_rows(model.router, X_test, counter)
    routed = np.argmax(router_scores, axis=1)  # ties -> smallest cluster id
    n = X_test.rows
    top: list[np.ndarray | None] = [None] * n
    sc: list[np.ndarray | None] = [None] * n
    mults = np.zeros(n, dtype=np.int64)
    for l in range(q):
        rows = np.nonzero(routed == l)[0]
        if rows.size == 0:
            continue
        mdl = model.cluster_models[l]
        label_ids = mdl.class_ids
        scores = score_rows(mdl, take_rows(X_test, rows), counter)
        mults[rows] = q + label_ids.size
        for r, row_scores in zip(rows, scores):
            labs, vals = _rank_top_k(label_ids, row_scores, k)
            top[int(r)] = labs
            sc[int(r)] = vals
    return PredictionResult(tuple(top), tuple(sc), mults)


def train_naive(ds: Dataset, cfg: TrainConfig) -> LinearModel:
    """One-vs-all over every label; the speed baseline."""
    m = ds.labels.cols
    return train_ova(ds.features, ds.labels, cfg, class_ids=np.arange(m, dtype=np.int64))


def predict_naive(model: LinearModel, X_test: SparseMatrix, k: int,
                  counter: MultCounter | None = None) -> PredictionResult:
    """Score every label for every instance; m multiplications per instance."""
    if k < 1:
        raise ValueError("k must be at least 1")
    scores = score_rows(model, X_test, counter)
    label_ids = model.class_ids
    top = []
    sc = []
    for row_scores in scores:
        labs, vals = _rank_top_k(label_ids, row_scores, k)
        top.append(labs)
        sc.append(vals)
    mults = np.full(X_test.rows, model.num_classes, dtype=np.int64)
    return PredictionResult(tuple(top), tuple(sc), mults)


def write_predictions(result: PredictionResult, stream) -> None:
    """One line per instance: space-separated ``label:score`` pairs."""
    for labs, vals in zip(result.top_labels, result.scores):
        stream.write(" ".join(f"{int(j)}:{float(v)!r}" for j, v in zip(labs, vals)) + "\n")


def read_predictions(stream):
    """Inverse of write_predictions; returns (top_labels, scores) tuples."""
    top = []
    sc = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        labs: list[int] = []
        vals: list[float] = []
        if line:
            for tok in line.split():
                lab_str, sep, val_str = tok.partition(":")
                if not sep:
                    raise DataFormatError(f"line {lineno}: bad prediction token {tok!r}")
                try:
                    labs.append(int(lab_str))
                    vals.append(float(val_str))
                except ValueError:
                    raise DataFormatError(f"line {lineno}: bad prediction token {tok!r}") from None
        top.append(np.asarray(labs, dtype=np.int64))
        sc.append(np.asarray(vals, dtype=np.float64))
    return tuple(top), tuple(sc)


def write_mults_csv(result: PredictionResult, stream) -> None:
    stream.write("instance,mults_used\n")
    for i, c in enumerate(result.mults_used):
        stream.write(f"{i},{int(c)}\n")


def read_mults_csv(stream) -> np.ndarray:
    it = iter(stream)
    header = next(it, None)
    if header is None or header.strip() != "instance,mults_used":
        raise DataFormatError("mults CSV must start with 'instance,mults_used'")
    vals = []
    for lineno, raw in enumerate(it, start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataFormatError(f"line {lineno}: bad mults row {line!r}")
        vals.append(int(parts[1]))
    return np.asarray(vals, dtype=np.int64)
