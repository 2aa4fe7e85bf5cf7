"""One-vs-all L2-regularized logistic regression on sparse features.

Each class is a self-contained binary problem
    min_{w,b}  0.5*||w||^2 + C * sum_i s_i * log(1 + exp(-t_i * (w.x_i + b)))
solved by a deterministic full-batch quasi-Newton method (L-BFGS-B with an
analytic gradient).  The bias is not penalized.  Training the classes in
parallel cannot change the result because every solve depends only on its
own column of targets.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.sparse as sp
from scipy.special import expit

from .sparse import SparseMatrix, BinaryLabelMatrix

BIAS_CLAMP = 10.0  # logit of the class prior is clamped to +-10 for degenerate classes


@dataclass(frozen=True)
class TrainConfig:
    reg_strength: float = 1.0   # C, the weight on the data term (inverse regularization)
    tol: float = 1e-4           # stop when the gradient inf-norm drops below this
    max_epochs: int = 100
    seed: int = 0
    prune_threshold: float = 1e-6  # trained weights below this magnitude are dropped
    balance_classes: bool = False  # reweight positives by n_neg/n_pos
    threads: int = 1

    def __post_init__(self):
        if self.reg_strength <= 0:
            raise ValueError("reg_strength must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Per-class weight rows plus bias; rows map to ids via class_ids."""

    weights: SparseMatrix       # num_classes x d, magnitude-pruned
    bias: np.ndarray            # (num_classes,)
    class_ids: np.ndarray       # row -> original label / cluster id, duplicate-free
    constant_mask: np.ndarray   # True for classes that fell back to a constant score

    def __post_init__(self):
        object.__setattr__(self, "bias", np.ascontiguousarray(self.bias, dtype=np.float64))
        object.__setattr__(self, "class_ids", np.ascontiguousarray(self.class_ids, dtype=np.int64))
        object.__setattr__(self, "constant_mask", np.ascontiguousarray(self.constant_mask, dtype=bool))
        k = self.weights.rows
        if not (self.bias.shape == self.class_ids.shape == self.constant_mask.shape == (k,)):
            raise ValueError("bias, class_ids and constant_mask must have one entry per class")
        if np.unique(self.class_ids).size != k:
            raise ValueError("class_ids must be duplicate-free")

    @property
    def num_classes(self) -> int:
        return self.weights.rows

    @property
    def num_features(self) -> int:
        return self.weights.cols


def loss_and_grad(wb: np.ndarray, X: sp.csr_matrix, t: np.ndarray, C: float,
                  sample_weight: np.ndarray | None = None):
    """Objective value and gradient at wb = (w, b) for targets t in {-1,+1}."""
    w, b = wb[:-1], wb[-1]
    z = X @ w + b
    s = t * z
    per_example = np.logaddexp(0.0, -s)
    sig = expit(-s)  # d/ds log(1+exp(-s)) = -expit(-s)
    if sample_weight is not None:
        per_example = per_example * sample_weight
        sig = sig * sample_weight
    loss = 0.5 * float(w @ w) + C * float(per_example.sum())
    coef = -C * t * sig
    grad = np.empty_like(wb)
    grad[:-1] = w + X.T @ coef
    grad[-1] = coef.sum()
    return loss, grad


def _fit_binary(X: sp.csr_matrix, t: np.ndarray, cfg: TrainConfig,
                sample_weight: np.ndarray | None):
    d = X.shape[1]
    x0 = np.zeros(d + 1)
    res = scipy.optimize.minimize(
        loss_and_grad, x0, args=(X, t, cfg.reg_strength, sample_weight),
        method="L-BFGS-B", jac=True,
        options={"maxiter": cfg.max_epochs, "gtol": cfg.tol, "ftol": 0.0,
                 "maxfun": max(200, 20 * cfg.max_epochs)},
    )
    return res.x[:-1], float(res.x[-1])


def _constant_bias(n_pos: int, n: int) -> float:
    if n == 0:
        return -BIAS_CLAMP
    prior = n_pos / n
    if prior <= 0.0:
        return -BIAS_CLAMP
    if prior >= 1.0:
        return BIAS_CLAMP
    return float(np.clip(np.log(prior / (1.0 - prior)), -BIAS_CLAMP, BIAS_CLAMP))


def train_ova(X: SparseMatrix, targets: BinaryLabelMatrix, cfg: TrainConfig,
              class_ids=None) -> LinearModel:
    """Train one binary logistic model per target column.

    A column with no positives or no negatives gets a constant-score model
    (zero weights, bias = clamped logit of the class prior) and is flagged
    in ``constant_mask``.
    """
    if X.rows != targets.rows:
        raise ValueError(f"X has {X.rows} rows but targets have {targets.rows}")
    k = targets.cols
    if k < 1:
        raise ValueError("class set must be non-empty")
    if class_ids is None:
        class_ids = np.arange(k, dtype=np.int64)
    class_ids = np.ascontiguousarray(class_ids, dtype=np.int64)
    if class_ids.shape != (k,):
        raise ValueError("class_ids must have one entry per target column")

    n, d = X.rows, X.cols
    Xsp = X.to_scipy()
    Ycsc = targets.to_scipy().tocsc()

    def solve(c: int):
        pos = np.zeros(n, dtype=bool)
        pos[Ycsc.indices[Ycsc.indptr[c]:Ycsc.indptr[c + 1]]] = True
        n_pos = int(pos.sum())
        if n == 0 or n_pos == 0 or n_pos == n:
            return np.zeros(d), _constant_bias(n_pos, n), True
        t = np.where(pos, 1.0, -1.0)
        sw = None
        if cfg.balance_classes:
            sw = np.where(pos, (n - n_pos) / n_pos, 1.0)
        w, b = _fit_binary(Xsp, t, cfg, sw)
        return w, b, False

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            solved = list(pool.map(solve, range(k)))
    else:
        solved = [solve(c) for c in range(k)]

    W = np.vstack([w for w, _, _ in solved]) if k else np.zeros((0, d))
    W[np.abs(W) < cfg.prune_threshold] = 0.0
    bias = np.array([b for _, b, _ in solved])
    const = np.array([c for _, _, c in solved])
    return LinearModel(SparseMatrix.from_scipy(sp.csr_matrix(W, shape=(k, d))),
                       bias, class_ids, const)


def score_rows(model: LinearModel, X: SparseMatrix, counter=None) -> np.ndarray:
    """Dense (rows x classes) score matrix; one inner product per (row, class)."""
    if X.cols != model.num_features:
        raise ValueError(f"x has dimension {X.cols} but model expects {model.num_features}")
    scores = (X.to_scipy() @ model.weights.to_scipy().T).toarray() + model.bias
    if counter is not None:
        counter.add(X.rows * model.num_classes)
    return scores


def score(model: LinearModel, x: SparseMatrix, counter=None) -> np.ndarray:
    """Scores <w_c, x> + b_c for a single instance (a 1 x d sparse row)."""
    if x.rows != 1:
        raise ValueError("score expects a single row")
    return score_rows(model, x, counter)[0]


def predict_class(model: LinearModel, x: SparseMatrix, counter=None) -> int:
    """Class id with the highest score; ties go to the smallest class id."""
    s = score(model, x, counter)
    best = s == s.max()
    return int(model.class_ids[best].min())
