"""Joint clustering of instances and labels by alternating minimization.

The objective being minimized over an assignment of instances to q clusters
and q label subsets (one per instance cluster, overlap across clusters
allowed) is

    f = -(ones of Y captured inside the paired clusters) + lam * sum_l |L_l|^2.

Both alternating steps are exact: given fixed instance clusters the optimal
label subset per cluster is a prefix of the labels sorted by in-cluster
count, found by scanning all prefix lengths; given fixed label subsets each
instance moves to the cluster capturing most of its labels.  Neither step
can increase f, so the objective trace is nonincreasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .kmeans import kmeans_assign
from .sparse import BinaryLabelMatrix, Dataset, SparseMatrix, column_sums

# Default candidate grid for the label-size penalty lam.
DEFAULT_LAMBDA_GRID = tuple(float(x) for x in np.logspace(-3.0, 3.0, 13))


@dataclass(frozen=True)
class BpConfig:
    lam: float = 1.0
    q: int | str = "auto"           # explicit count, or "auto" to be resolved by search_q
    max_alt_iters: int = 100
    conv_tol: float = 1e-5
    min_labels_per_cluster: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.conv_tol <= 0:
            raise ValueError("conv_tol must be positive")
        if self.q != "auto" and (not isinstance(self.q, (int, np.integer)) or self.q < 1):
            raise ValueError("q must be a positive integer or 'auto'")
        if self.min_labels_per_cluster < 1:
            raise ValueError("min_labels_per_cluster must be at least 1")


@dataclass(frozen=True)
class ObjectiveValue:
    captured_ones: int   # ones of Y whose label lies in the cluster paired with their row
    penalty: float       # lam * sum of squared label-cluster sizes
    f: float             # penalty - captured_ones


@dataclass(frozen=True, eq=False)
class Partition:
    """Paired instance/label clusters and the trace of the fit that found them."""

    q: int
    lam: float
    instance_cluster_of: np.ndarray          # (n,) entries in [0, q)
    label_clusters: tuple[np.ndarray, ...]   # q sorted, duplicate-free index arrays
    objective_trace: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "instance_cluster_of",
                           np.ascontiguousarray(self.instance_cluster_of, dtype=np.int64))
        object.__setattr__(self, "label_clusters",
                           tuple(np.ascontiguousarray(c, dtype=np.int64) for c in self.label_clusters))
        object.__setattr__(self, "objective_trace",
                           np.ascontiguousarray(self.objective_trace, dtype=np.float64))
        if self.q < 1 or len(self.label_clusters) != self.q:
            raise ValueError("need exactly q label clusters")
        a = self.instance_cluster_of
        if a.size and (a.min() < 0 or a.max() >= self.q):
            raise ValueError("instance cluster ids must lie in [0, q)")
        for l, c in enumerate(self.label_clusters):
            if c.size == 0:
                raise ValueError(f"label cluster {l} is empty")
            if np.any(np.diff(c) <= 0):
                raise ValueError(f"label cluster {l} is not sorted and duplicate-free")

    @property
    def n(self) -> int:
        return int(self.instance_cluster_of.shape[0])

    def instance_cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.instance_cluster_of, minlength=self.q)


def cluster_label_counts(Y: BinaryLabelMatrix, assignment: np.ndarray, q: int) -> np.ndarray:
    """(q x m) matrix of per-cluster label counts; O(nnz(Y))."""
    n = Y.rows
    assignment = np.ascontiguousarray(assignment, dtype=np.int64)
    if assignment.shape != (n,):
        raise ValueError(f"assignment must have {n} entries")
    if n and (assignment.min() < 0 or assignment.max() >= q):
        raise ValueError("assignment entries must lie in [0, q)")
    onehot = sp.csr_matrix(
        (np.ones(n), assignment, np.arange(n + 1)), shape=(n, q)
    )
    counts = (onehot.T @ Y.to_scipy()).toarray()
    return np.rint(counts).astype(np.int64)


def _objective_parts(Y, assignment, label_clusters, lam) -> ObjectiveValue:
    q = len(label_clusters)
    P = cluster_label_counts(Y, assignment, q)
    captured = 0
    for l, cluster in enumerate(label_clusters):
        captured += int(P[l, cluster].sum())
    penalty = lam * float(sum(len(c) ** 2 for c in label_clusters))
    return ObjectiveValue(captured_ones=captured, penalty=penalty, f=penalty - captured)


def objective(Y: BinaryLabelMatrix, partition: Partition) -> ObjectiveValue:
    """Evaluate f for a partition of Y's rows and columns."""
    if partition.n != Y.rows:
        raise ValueError(f"partition covers {partition.n} instances but Y has {Y.rows} rows")
    for c in partition.label_clusters:
        if c.size and c[-1] >= Y.cols:
            raise ValueError("label cluster index out of range")
    return _objective_parts(Y, partition.instance_cluster_of, partition.label_clusters,
                            partition.lam)


def init_instance_clusters(X: SparseMatrix, q: int, seed: int = 0) -> np.ndarray:
    """Seed instance clusters by k-means on the feature rows."""
    return kmeans_assign(X, q, seed)


def select_label_clusters(Y: BinaryLabelMatrix, assignment: np.ndarray, q: int,
                          lam: float, min_labels: int = 1) -> list[np.ndarray]:
    """Optimal label subset per instance cluster, given the assignment fixed.

    Labels are sorted by in-cluster count (descending, ties to the smaller
    label index) and every prefix length J in [min_labels, m] is scored as
    -(prefix count sum) + lam*J^2; the smallest minimizing J wins.  A cluster
    with no instances orders labels by their global counts instead, so it
    receives the min_labels overall most frequent labels.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    m = Y.cols
    P = cluster_label_counts(Y, assignment, q)
    sizes = np.bincount(assignment, minlength=q) if assignment.size else np.zeros(q, int)
    min_l = int(np.clip(min_labels, 0, m))
    label_ids = np.arange(m)
    global_counts = None
    clusters: list[np.ndarray] = []
    for l in range(q):
        counts = P[l]
        key = counts
        if sizes[l] == 0:
            if global_counts is None:
                global_counts = column_sums(Y)
            key = global_counts
        order = np.lexsort((label_ids, -key))
        csum = np.concatenate(([0], np.cumsum(counts[order])))
        lengths = np.arange(min_l, m + 1)
        objs = -csum[lengths].astype(np.float64) + lam * lengths.astype(np.float64) ** 2
        j_star = int(lengths[np.argmin(objs)])  # first occurrence = smallest J on ties
        clusters.append(np.sort(order[:j_star]))
    return clusters


def select_instance_clusters(Y: BinaryLabelMatrix, label_clusters, previous: np.ndarray) -> np.ndarray:
    """Move each instance to the cluster capturing most of its labels.

    Ties go to the smallest cluster index.  An instance whose labels meet no
    cluster at all keeps its previous assignment.
    """
    q = len(label_clusters)
    n, m = Y.shape
    previous = np.ascontiguousarray(previous, dtype=np.int64)
    if previous.shape != (n,):
        raise ValueError(f"previous assignment must have {n} entries")
    lengths = np.array([len(c) for c in label_clusters], dtype=np.int64)
    indptr = np.concatenate(([0], np.cumsum(lengths)))
    indices = np.concatenate(label_clusters) if q else np.array([], dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= m):
        raise ValueError("label cluster index out of range")
    membership = sp.csr_matrix(
        (np.ones(indices.size), indices, indptr), shape=(q, m)
    )
    overlap = (Y.to_scipy() @ membership.T).toarray()
    best = np.argmax(overlap, axis=1)  # first occurrence = smallest cluster on ties
    hit = overlap[np.arange(n), best] > 0
    return np.where(hit, best, previous).astype(np.int64)


def fit_partition(ds: Dataset, cfg: BpConfig) -> Partition:
    """Alternate the two selection steps from a k-means start until converged.

    Records f after every completed pair of half-steps; stops when the change
    in f falls below ``conv_tol``, the assignment and label clusters repeat
    exactly, or ``max_alt_iters`` is reached.
    """
    if cfg.q == "auto":
        raise ValueError("q is 'auto'; resolve it first (see tuning.search_q)")
    q = int(cfg.q)
    n, m = ds.labels.shape
    if q > min(n, m):
        raise ValueError(f"q = {q} exceeds min(n, m) = {min(n, m)}")
    Y = ds.labels
    assign = init_instance_clusters(ds.features, q, cfg.seed)
    trace: list[float] = []
    prev_f = None
    prev_clusters = None
    clusters: list[np.ndarray] = []
    for _ in range(cfg.max_alt_iters):
        clusters = select_label_clusters(Y, assign, q, cfg.lam, cfg.min_labels_per_cluster)
        new_assign = select_instance_clusters(Y, clusters, assign)
        val = _objective_parts(Y, new_assign, clusters, cfg.lam)
        trace.append(val.f)
        fixed = (
            prev_clusters is not None
            and np.array_equal(new_assign, assign)
            and all(np.array_equal(a, b) for a, b in zip(clusters, prev_clusters))
        )
        converged = prev_f is not None and abs(prev_f - val.f) < cfg.conv_tol
        assign = new_assign
        prev_clusters = clusters
        prev_f = val.f
        if fixed or converged:
            break
    return Partition(q=q, lam=cfg.lam, instance_cluster_of=assign,
                     label_clusters=tuple(clusters), objective_trace=np.asarray(trace))


def export_permuted_matrix(Y: BinaryLabelMatrix, partition: Partition,
                           row_limit: int = 400) -> tuple[np.ndarray, str]:
    """Render Y with rows grouped by instance cluster and columns by label cluster.

    Returns (pixels, csv).  Pixels are uint8, 0 (black) where y_ij = 1 and
    255 elsewhere; rows take up to ``row_limit`` instances per cluster in
    their original order; columns concatenate the label clusters, so a label
    shared by several clusters appears once per cluster.  The CSV maps each
    rendered position back to (axis, position, cluster, original index);
    with row_limit = 0 it contains only the header and the image has no rows.
    """
    if row_limit < 0:
        raise ValueError("row_limit must be nonnegative")
    q = partition.q
    assign = partition.instance_cluster_of
    col_groups = partition.label_clusters
    width = int(sum(len(c) for c in col_groups))
    lines = ["axis,position,cluster,original_index"]
    if row_limit == 0:
        return np.full((0, width), 255, dtype=np.uint8), "\n".join(lines) + "\n"

    row_ids: list[np.ndarray] = []
    row_cluster: list[int] = []
    for l in range(q):
        members = np.nonzero(assign == l)[0][:row_limit]
        row_ids.append(members)
        row_cluster.extend([l] * members.size)
    sel = np.concatenate(row_ids) if row_ids else np.array([], dtype=np.int64)
    pixels = np.full((sel.size, width), 255, dtype=np.uint8)
    Ysel = Y.to_scipy()[sel]
    start = 0
    for l in range(q):
        labels = col_groups[l]
        stop = start + labels.size
        block = Ysel[:, labels].toarray() > 0
        pixels[:, start:stop] = np.where(block, 0, 255)
        start = stop

    for pos, (orig, l) in enumerate(zip(sel, row_cluster)):
        lines.append(f"row,{pos},{l},{int(orig)}")
    pos = 0
    for l in range(q):
        for j in col_groups[l]:
            lines.append(f"col,{pos},{l},{int(j)}")
            pos += 1
    return pixels, "\n".join(lines) + "\n"
