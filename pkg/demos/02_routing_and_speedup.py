"""Train the routed pipeline next to a naive one-vs-all scan and compare.

The routed model answers each test instance with q router products plus one
product per label in the routed cluster; the naive baseline scores all m
labels.  Accuracy stays close while the multiplication count collapses.
"""

import numpy as np

from blockpart import (BpConfig, MultCounter, PlantedSpec, TrainConfig, column_sums,
                       generate, holdout_split, label_propensities, precision_at_k,
                       predict_bp, predict_naive, psp_at_k, recall_at_k, speedup,
                       train_bp, train_naive)

spec = PlantedSpec(q_true=10, instances_per_block=100, labels_per_block=50, d=100,
                   in_block_density=0.8, off_block_noise=0.01,
                   feature_separation=10.0, seed=4)
ds, truth = generate(spec)
train, test, _, _ = holdout_split(ds, 0.2, seed=4, stratify_by=truth.instance_cluster_of)
print(f"train n={train.n}, test n={test.n}, m={ds.labels.cols}")

cfg = TrainConfig(max_epochs=60)
bp = train_bp(train, BpConfig(lam=0.1, q=10, seed=4), cfg)
naive = train_naive(train, cfg)

counter = MultCounter()
bp_res = predict_bp(bp, test.features, k=5, counter=counter)
nv_res = predict_naive(naive, test.features, k=5)
assert counter.count == int(bp_res.mults_used.sum())  # the ledger is exact

props = label_propensities(bp.train_label_counts, train.n)
m = test.labels.cols
print(f"{'':>14}" + "".join(f"{h:>9}" for h in
                            ["P@1", "P@3", "P@5", "PSP@1", "PSP@3", "PSP@5", "R@5", "mults"]))
for name, res in [("routed", bp_res), ("naive", nv_res)]:
    cells = [precision_at_k(test.labels, res.top_labels, k) for k in (1, 3, 5)]
    cells += [psp_at_k(test.labels, res.top_labels, props, k) for k in (1, 3, 5)]
    cells += [recall_at_k(test.labels, res.top_labels, 5)]
    row = "".join(f"{100 * c:>9.2f}" for c in cells)
    print(f"{name:>14}" + row + f"{res.mults_used.mean():>9.1f}")

print(f"\nspeedup: {speedup(bp_res, m):.2f}x "
      f"({m} naive products vs {bp_res.mults_used.mean():.1f} routed)")
