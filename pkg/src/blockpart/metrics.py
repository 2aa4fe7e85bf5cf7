"""Ranking metrics: P@k, R@k, propensity-scored P@k, and speedup."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sparse import BinaryLabelMatrix


@dataclass(frozen=True)
class PropensityParams:
    a: float = 0.55
    b: float = 1.5

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError("a must lie in (0, 1)")
        if self.b <= 0:
            raise ValueError("b must be positive")


def _check_alignment(truth: BinaryLabelMatrix, predictions, k: int):
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(predictions) != truth.rows:
        raise ValueError(
            f"{len(predictions)} prediction rows for {truth.rows} truth rows"
        )


def precision_at_k(truth: BinaryLabelMatrix, predictions, k: int) -> float:
    """Mean over instances of |top-k hits| / k.

    Instances with fewer than k predictions still divide by k, i.e. the
    missing slots count as misses.
    """
    _check_alignment(truth, predictions, k)
    total = 0.0
    for i in range(truth.rows):
        top = np.asarray(predictions[i])[:k]
        total += np.isin(top, truth.row(i)).sum() / k
    return float(total / truth.rows) if truth.rows else 0.0


def recall_at_k(truth: BinaryLabelMatrix, predictions, k: int) -> float:
    """Mean over labeled instances of |top-k hits| / |true labels|.

    Rows without any true label are excluded from the mean.
    """
    _check_alignment(truth, predictions, k)
    total = 0.0
    labeled = 0
    for i in range(truth.rows):
        true = truth.row(i)
        if true.size == 0:
            continue
        top = np.asarray(predictions[i])[:k]
        total += np.isin(top, true).sum() / true.size
        labeled += 1
    if labeled == 0:
        raise ValueError("recall undefined: every row is unlabeled")
    return float(total / labeled)


def label_propensities(train_label_counts, n_train: int,
                       params: PropensityParams = PropensityParams()) -> np.ndarray:
    """Per-label propensity p_j = 1 / (1 + c * (N_j + b)^(-a)).

    c = (ln(n) - 1) * (b + 1)^a.  Monotone nondecreasing in N_j.  For n < 3
    the model inverts (c < 0) and values are clamped back to 1.
    """
    if n_train < 2:
        raise ValueError("propensity model needs n_train >= 2")
    counts = np.ascontiguousarray(train_label_counts, dtype=np.float64)
    if counts.size and counts.min() < 0:
        raise ValueError("label counts must be nonnegative")
    c = (np.log(n_train) - 1.0) * (params.b + 1.0) ** params.a
    p = 1.0 / (1.0 + c * (counts + params.b) ** (-params.a))
    return np.minimum(p, 1.0)


def psp_at_k(truth: BinaryLabelMatrix, predictions, propensities, k: int) -> float:
    """Propensity-scored P@k: hits weighted by 1/p_j, unnormalized."""
    _check_alignment(truth, predictions, k)
    p = np.ascontiguousarray(propensities, dtype=np.float64)
    if p.size and (p.min() <= 0.0 or p.max() > 1.0):
        raise ValueError("propensities must lie in (0, 1]")
    total = 0.0
    for i in range(truth.rows):
        top = np.asarray(predictions[i])[:k]
        hits = top[np.isin(top, truth.row(i))]
        total += (1.0 / p[hits]).sum() / k
    return float(total / truth.rows) if truth.rows else 0.0


def speedup(result, naive_cost_per_instance: int) -> float:
    """Prediction-cost ratio: naive per-instance multiplications / mean used."""
    mults = np.ascontiguousarray(result.mults_used, dtype=np.float64)
    if mults.size == 0:
        raise ValueError("empty prediction result")
    return float(naive_cost_per_instance) / float(mults.mean())
