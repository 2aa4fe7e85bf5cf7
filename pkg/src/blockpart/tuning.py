"""Model selection: the cluster count q and the label-size penalty lam."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import kfold_split
from .errors import OptimizationError
from .metrics import precision_at_k, speedup
from .partition import BpConfig, Partition, _objective_parts, fit_partition
from .pipeline import predict_bp, train_bp
from .logistic import TrainConfig
from .sparse import Dataset


@dataclass(frozen=True)
class QReport:
    q: int
    captured_proportion: float   # captured ones / nnz(Y)
    any_empty_pair: bool
    instance_cluster_sizes: tuple[int, ...]
    label_cluster_sizes: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class QSearchResult:
    chosen_q: int
    reports: tuple[QReport, ...]
    partition: Partition   # the fit at chosen_q


def search_q(ds: Dataset, lam: float, q_max: int, *, seed: int = 0,
             max_alt_iters: int = 100, conv_tol: float = 1e-5,
             min_labels: int = 1) -> QSearchResult:
    """Scan q = 2, 3, ... and keep the largest q before an empty pair appears.

    For each q the partition is fit and the proportion of label-matrix ones
    captured inside the paired clusters is recorded.  The scan stops at the
    first q whose result contains an empty instance or label cluster; the
    chosen q is the largest earlier value (q_max if none ever empties).
    """
    if q_max < 2:
        raise ValueError("q_max must be at least 2")
    nnz = ds.labels.nnz
    if nnz == 0:
        raise OptimizationError("label matrix has no positive entries")
    reports: list[QReport] = []
    chosen: int | None = None
    best_partition: Partition | None = None
    for q in range(2, q_max + 1):
        cfg = BpConfig(lam=lam, q=q, max_alt_iters=max_alt_iters,
                       conv_tol=conv_tol, min_labels_per_cluster=min_labels, seed=seed)
        part = fit_partition(ds, cfg)
        val = _objective_parts(ds.labels, part.instance_cluster_of,
                               part.label_clusters, lam)
        inst_sizes = part.instance_cluster_sizes()
        lab_sizes = np.array([len(c) for c in part.label_clusters])
        empty = bool((inst_sizes == 0).any() or (lab_sizes == 0).any())
        reports.append(QReport(q=q, captured_proportion=val.captured_ones / nnz,
                               any_empty_pair=empty,
                               instance_cluster_sizes=tuple(int(s) for s in inst_sizes),
                               label_cluster_sizes=tuple(int(s) for s in lab_sizes)))
        if empty:
            break
        chosen = q
        best_partition = part
    if chosen is None or best_partition is None:
        raise OptimizationError(
            "every fit starting at q = 2 produced an empty paired cluster; "
            "no usable q exists below 2"
        )
    return QSearchResult(chosen_q=chosen, reports=tuple(reports), partition=best_partition)


@dataclass(frozen=True)
class SweepRow:
    fold: int
    lam: float
    accuracy: float
    speedup: float


@dataclass(frozen=True, eq=False)
class LambdaSelection:
    admissible: tuple[float, ...]                      # intersection over folds
    per_fold_admissible: tuple[tuple[float, ...], ...]
    per_fold_intervals: tuple[tuple[float, float], ...]
    table: tuple[SweepRow, ...]


def select_lambda(ds: Dataset, lambdas, q: int, train_cfg: TrainConfig, *,
                  tolerance: float = 0.02, n_folds: int = 5, metric_k: int = 1,
                  seed: int = 0, max_alt_iters: int = 100, conv_tol: float = 1e-5,
                  min_labels: int = 1) -> LambdaSelection:
    """Cross-validate lam: keep values whose accuracy loss stays in tolerance.

    Per fold, every candidate runs the full partition/train/predict pipeline
    and the fold admits the candidates whose validation accuracy (P@metric_k)
    is within ``tolerance`` of the fold's best.  The returned admissible set
    is the intersection over folds; an empty intersection raises, reporting
    the per-fold intervals so the caller can widen the grid.
    """
    lambdas = [float(x) for x in lambdas]
    if len(lambdas) < 1:
        raise ValueError("need at least one candidate lam")
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("candidate lams must be sorted ascending and unique")
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    m = ds.labels.cols
    folds = kfold_split(ds, n_folds, seed)
    per_fold_sets: list[tuple[float, ...]] = []
    table: list[SweepRow] = []
    for fold_id, (train, val) in enumerate(folds):
        accs = []
        for lam in lambdas:
            bp_cfg = BpConfig(lam=lam, q=q, max_alt_iters=max_alt_iters,
                              conv_tol=conv_tol, min_labels_per_cluster=min_labels,
                              seed=seed)
            model = train_bp(train, bp_cfg, train_cfg)
            result = predict_bp(model, val.features, k=metric_k)
            acc = precision_at_k(val.labels, result.top_labels, metric_k)
            table.append(SweepRow(fold=fold_id, lam=lam, accuracy=acc,
                                  speedup=speedup(result, m)))
            accs.append(acc)
        best = max(accs)
        ok = tuple(lam for lam, acc in zip(lambdas, accs) if best - acc <= tolerance)
        per_fold_sets.append(ok)
    common = set(per_fold_sets[0])
    for s in per_fold_sets[1:]:
        common &= set(s)
    intervals = tuple((min(s), max(s)) for s in per_fold_sets)
    if not common:
        detail = "; ".join(f"fold {i}: [{lo:g}, {hi:g}]" for i, (lo, hi) in enumerate(intervals))
        raise OptimizationError(
            f"no lam is within tolerance on every fold ({detail}); widen the candidate grid"
        )
    return LambdaSelection(admissible=tuple(sorted(common)),
                           per_fold_admissible=tuple(per_fold_sets),
                           per_fold_intervals=intervals,
                           table=tuple(table))
