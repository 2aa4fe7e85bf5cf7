"""The label-size penalty trades prediction accuracy against speed.

Small lam lets every cluster keep many labels (accurate, slow); large lam
shrinks the clusters (fast, eventually lossy).  The cross-validated selector
returns the lams whose accuracy loss stays within a tolerance on every fold
and fails loudly with per-fold intervals when no lam satisfies all folds.
"""

import numpy as np

from blockpart import (BpConfig, OptimizationError, PlantedSpec, TrainConfig, generate,
                       holdout_split, precision_at_k, predict_bp, select_lambda,
                       speedup, train_bp)

spec = PlantedSpec(q_true=4, instances_per_block=80, labels_per_block=12, d=60,
                   in_block_density=0.8, off_block_noise=0.01, popular_labels=2,
                   feature_separation=10.0, seed=1)
ds, truth = generate(spec)
train, test, _, _ = holdout_split(ds, 0.25, seed=1, stratify_by=truth.instance_cluster_of)
cfg = TrainConfig(max_epochs=50)
m = ds.labels.cols

lams = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0]
print(f"{'lambda':>10}{'P@1':>9}{'P@3':>9}{'speedup':>10}   labels/cluster")
for lam in lams:
    model = train_bp(train, BpConfig(lam=lam, q=4, seed=1), cfg)
    res = predict_bp(model, test.features, k=3)
    p1 = precision_at_k(test.labels, res.top_labels, 1)
    p3 = precision_at_k(test.labels, res.top_labels, 3)
    sizes = [c.size for c in model.partition.label_clusters]
    print(f"{lam:>10g}{100 * p1:>9.2f}{100 * p3:>9.2f}"
          f"{speedup(res, m):>9.1f}x   {sizes}")

print("\n5-fold cross-validated selection (2% tolerance on P@1):")
try:
    sel = select_lambda(train, lams[:4], q=4, train_cfg=cfg, tolerance=0.02,
                        n_folds=5, seed=1)
except OptimizationError as exc:
    print("selection failed:", exc)
else:
    print("admissible on every fold:", list(sel.admissible))
    for fold, (lo, hi) in enumerate(sel.per_fold_intervals):
        print(f"  fold {fold}: within tolerance on [{lo:g}, {hi:g}]")
    print(f"speed-driven choice (largest admissible lam): {max(sel.admissible):g}")
