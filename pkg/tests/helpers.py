"""Shared constructors for tests."""

import numpy as np

from blockpart import BinaryLabelMatrix, Dataset, SparseMatrix


def labels_to_matrix(rows, m):
    """BinaryLabelMatrix from a list of per-row label lists."""
    rows = [np.asarray(sorted(set(r)), dtype=np.int64) for r in rows]
    offsets = np.zeros(len(rows) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([r.size for r in rows])
    cols = np.concatenate(rows) if rows else np.array([], dtype=np.int64)
    return BinaryLabelMatrix(len(rows), m, offsets, cols)


def dense_to_sparse(arr):
    """SparseMatrix from a dense array (zeros dropped)."""
    arr = np.asarray(arr, dtype=np.float64)
    import scipy.sparse as sp

    return SparseMatrix.from_scipy(sp.csr_matrix(arr))


def random_dataset(rng, n, d, m, feat_density=0.3, label_density=0.2):
    X = rng.random((n, d)) * (rng.random((n, d)) < feat_density)
    Y = rng.random((n, m)) < label_density
    labels = [np.nonzero(Y[i])[0] for i in range(n)]
    return Dataset(dense_to_sparse(X), labels_to_matrix(labels, m))
