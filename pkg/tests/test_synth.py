import numpy as np
import pytest

from blockpart import (BpConfig, Partition, PlantedSpec, column_sums, fit_partition,
                       generate, partition_agreement, validate)


def test_generate_deterministic():
    spec = PlantedSpec(q_true=3, instances_per_block=15, labels_per_block=4, d=30, seed=5)
    a, _ = generate(spec)
    b, _ = generate(spec)
    assert np.array_equal(a.features.values, b.features.values)
    assert np.array_equal(a.labels.col_indices, b.labels.col_indices)


def test_generate_respects_invariants():
    spec = PlantedSpec(q_true=2, instances_per_block=10, labels_per_block=3, d=25,
                       popular_labels=2, seed=1)
    ds, truth = generate(spec)
    assert validate(ds.features) is None
    assert validate(ds.labels) is None
    assert truth.q == 2
    assert ds.n == 20
    assert ds.labels.cols == 8


def test_generate_pure_blocks_limit_case():
    spec = PlantedSpec(q_true=2, instances_per_block=5, labels_per_block=3, d=20,
                       in_block_density=1.0, off_block_noise=0.0, seed=2)
    ds, truth = generate(spec)
    dense = ds.labels.to_scipy().toarray()
    expect = np.zeros((10, 6))
    expect[:5, :3] = 1
    expect[5:, 3:] = 1
    assert np.array_equal(dense, expect)


def test_generate_popular_labels_most_frequent():
    spec = PlantedSpec(q_true=3, instances_per_block=100, labels_per_block=10, d=40,
                       popular_labels=3, seed=3)
    ds, _ = generate(spec)
    counts = column_sums(ds.labels)
    popular = counts[30:]
    n, dens = 300, spec.in_block_density
    sigma = np.sqrt(n * dens * (1 - dens))
    assert np.all(np.abs(popular - n * dens) <= 3 * sigma)
    assert popular.min() > counts[:30].max()


def test_generate_popular_in_every_truth_cluster():
    spec = PlantedSpec(q_true=3, instances_per_block=10, labels_per_block=4, d=30,
                       popular_labels=2, seed=4)
    _, truth = generate(spec)
    for cluster in truth.label_clusters:
        assert {12, 13} <= set(cluster.tolist())


def test_generate_label_capacity_error():
    with pytest.raises(ValueError):
        generate(PlantedSpec(q_true=2, instances_per_block=3, labels_per_block=4, d=10,
                             num_labels=7))


def test_generate_label_padding():
    spec = PlantedSpec(q_true=2, instances_per_block=3, labels_per_block=2, d=10,
                       num_labels=11, off_block_noise=0.0, seed=0)
    ds, truth = generate(spec)
    assert ds.labels.cols == 11
    assert column_sums(ds.labels)[4:].sum() == 0  # padding labels never tagged


def test_agreement_identical_partitions():
    _, truth = generate(PlantedSpec(q_true=3, instances_per_block=8, labels_per_block=3,
                                    d=20, seed=6))
    ag = partition_agreement(truth, truth)
    assert ag.ari == 1.0
    assert np.all(ag.label_jaccard == 1.0)


def test_agreement_single_cluster_vs_balanced():
    _, truth = generate(PlantedSpec(q_true=3, instances_per_block=8, labels_per_block=3,
                                    d=20, seed=7))
    lumped = Partition(q=1, lam=0.0, instance_cluster_of=np.zeros(truth.n, dtype=np.int64),
                       label_clusters=(np.arange(9),), objective_trace=[])
    ag = partition_agreement(lumped, truth)
    assert ag.ari == pytest.approx(0.0, abs=1e-12)


def test_agreement_invariant_to_cluster_relabeling():
    ds, truth = generate(PlantedSpec(q_true=3, instances_per_block=8, labels_per_block=3,
                                     d=20, seed=8))
    perm = np.array([2, 0, 1])
    relabeled = Partition(q=3, lam=0.0,
                          instance_cluster_of=perm[truth.instance_cluster_of],
                          label_clusters=tuple(truth.label_clusters[i]
                                               for i in np.argsort(perm)),
                          objective_trace=[])
    ag = partition_agreement(relabeled, truth)
    assert ag.ari == 1.0
    assert np.all(ag.label_jaccard == 1.0)


def test_agreement_size_mismatch():
    _, a = generate(PlantedSpec(q_true=2, instances_per_block=4, labels_per_block=2,
                                d=10, seed=9))
    _, b = generate(PlantedSpec(q_true=2, instances_per_block=5, labels_per_block=2,
                                d=10, seed=9))
    with pytest.raises(ValueError):
        partition_agreement(a, b)


def test_noise_free_recovery_is_exact():
    spec = PlantedSpec(q_true=3, instances_per_block=20, labels_per_block=5, d=30,
                       in_block_density=1.0, off_block_noise=0.0, seed=10)
    ds, truth = generate(spec)
    part = fit_partition(ds, BpConfig(lam=0.1, q=3, seed=10))
    ag = partition_agreement(part, truth)
    assert ag.ari == 1.0
    assert np.all(ag.label_jaccard == 1.0)
