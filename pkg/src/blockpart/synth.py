"""Planted block-diagonal data for recovery tests and benchmarks.

Each of q_true blocks owns a run of labels and a group of instances whose
features sit near a block-specific sparse center, so the blocks are linearly
separable by construction.  Optional "popular" labels are tagged across all
blocks, which a correct recovery must place in every label cluster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score

from .partition import Partition
from .sparse import BinaryLabelMatrix, Dataset, SparseMatrix


@dataclass(frozen=True)
class PlantedSpec:
    q_true: int
    instances_per_block: int
    labels_per_block: int
    d: int
    in_block_density: float = 0.8
    off_block_noise: float = 0.01
    popular_labels: int = 0      # labels tagged across every block
    feature_separation: float = 10.0
    seed: int = 0
    num_labels: int | None = None  # pad the label space; None = exactly what blocks need

    def __post_init__(self):
        if min(self.q_true, self.instances_per_block, self.labels_per_block, self.d) < 1:
            raise ValueError("q_true, instances_per_block, labels_per_block, d must be positive")
        if not (0.0 <= self.in_block_density <= 1.0 and 0.0 <= self.off_block_noise <= 1.0):
            raise ValueError("densities must lie in [0, 1]")
        if self.popular_labels < 0:
            raise ValueError("popular_labels must be nonnegative")
        if self.feature_separation <= 0:
            raise ValueError("feature_separation must be positive")

    @property
    def n(self) -> int:
        return self.q_true * self.instances_per_block

    @property
    def m(self) -> int:
        needed = self.q_true * self.labels_per_block + self.popular_labels
        return needed if self.num_labels is None else self.num_labels


def generate(spec: PlantedSpec) -> tuple[Dataset, Partition]:
    """Draw a planted dataset and its ground-truth partition."""
    needed = spec.q_true * spec.labels_per_block + spec.popular_labels
    if needed > spec.m:
        raise ValueError(
            f"blocks plus popular labels need {needed} labels but only {spec.m} requested"
        )
    rng = np.random.default_rng(spec.seed)
    q, ipb, lpb, d = spec.q_true, spec.instances_per_block, spec.labels_per_block, spec.d
    n, m = spec.n, spec.m
    support_size = max(1, round(d / 10))

    # Features: per-block sparse center of norm feature_separation, plus unit noise.
    centers = []
    supports = []
    for _ in range(q):
        sup = np.sort(rng.choice(d, size=support_size, replace=False))
        vec = rng.normal(size=support_size)
        vec *= spec.feature_separation / np.linalg.norm(vec)
        supports.append(sup)
        centers.append(vec)
    feat_cols = np.empty(n * support_size, dtype=np.int64)
    feat_vals = np.empty(n * support_size, dtype=np.float64)
    for b in range(q):
        lo = b * ipb * support_size
        hi = (b + 1) * ipb * support_size
        feat_cols[lo:hi] = np.tile(supports[b], ipb)
        noise = rng.normal(size=(ipb, support_size))
        feat_vals[lo:hi] = (centers[b][None, :] + noise).ravel()
    feat_offsets = np.arange(n + 1, dtype=np.int64) * support_size
    features = SparseMatrix(n, d, feat_offsets, feat_cols, feat_vals)

    popular = np.arange(q * lpb, q * lpb + spec.popular_labels, dtype=np.int64)
    label_rows: list[np.ndarray] = []
    for b in range(q):
        block_labels = np.arange(b * lpb, (b + 1) * lpb, dtype=np.int64)
        draws = rng.random((ipb, m))
        tagged = draws < spec.off_block_noise
        tagged[:, block_labels] = draws[:, block_labels] < spec.in_block_density
        if popular.size:
            tagged[:, popular] = draws[:, popular] < spec.in_block_density
        for i in range(ipb):
            label_rows.append(np.nonzero(tagged[i])[0])
    label_offsets = np.zeros(n + 1, dtype=np.int64)
    label_offsets[1:] = np.cumsum([r.size for r in label_rows])
    label_cols = np.concatenate(label_rows) if label_rows else np.array([], dtype=np.int64)
    labels = BinaryLabelMatrix(n, m, label_offsets, label_cols)

    assignment = np.repeat(np.arange(q, dtype=np.int64), ipb)
    truth_clusters = tuple(
        np.sort(np.concatenate([np.arange(b * lpb, (b + 1) * lpb, dtype=np.int64), popular]))
        for b in range(q)
    )
    truth = Partition(q=q, lam=0.0, instance_cluster_of=assignment,
                      label_clusters=truth_clusters, objective_trace=np.array([]))
    return Dataset(features, labels), truth


@dataclass(frozen=True, eq=False)
class PartitionAgreement:
    ari: float                  # adjusted Rand index on instance assignments
    label_jaccard: np.ndarray   # per truth block, after optimal block matching


def partition_agreement(found: Partition, truth: Partition) -> PartitionAgreement:
    """Score a recovered partition against the planted truth.

    Instance agreement is the adjusted Rand index.  Label recovery matches
    found clusters to truth blocks by maximizing instance overlap (Hungarian
    assignment) and reports the Jaccard similarity of each matched pair;
    truth blocks left unmatched score 0.
    """
    if found.n != truth.n:
        raise ValueError(f"partitions cover {found.n} and {truth.n} instances")
    ari = float(adjusted_rand_score(truth.instance_cluster_of, found.instance_cluster_of))
    overlap = np.zeros((truth.q, found.q), dtype=np.int64)
    np.add.at(overlap, (truth.instance_cluster_of, found.instance_cluster_of), 1)
    t_idx, f_idx = linear_sum_assignment(-overlap)
    jac = np.zeros(truth.q)
    for t, f in zip(t_idx, f_idx):
        a = set(truth.label_clusters[t].tolist())
        b = set(found.label_clusters[f].tolist())
        union = len(a | b)
        jac[t] = len(a & b) / union if union else 1.0
    return PartitionAgreement(ari=ari, label_jaccard=jac)
