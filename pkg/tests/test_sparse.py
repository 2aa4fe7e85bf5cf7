import numpy as np
import pytest

from blockpart import (BinaryLabelMatrix, Dataset, SparseMatrix, column_sums,
                       normalize_rows, restrict_columns, take_rows, validate)
from helpers import dense_to_sparse, labels_to_matrix, random_dataset


def test_validate_ok():
    m = SparseMatrix(2, 3, [0, 2, 3], [0, 2, 1], [1.0, 2.0, 3.0])
    assert validate(m) is None


def test_validate_decreasing_offsets_names_row():
    m = SparseMatrix(3, 3, [0, 2, 1, 3], [0, 1, 2], [1.0, 1.0, 1.0])
    msg = validate(m)
    assert msg is not None and "row 1" in msg


def test_validate_duplicate_column():
    m = SparseMatrix(2, 4, [0, 2, 4], [1, 1, 0, 3], [1.0, 1.0, 1.0, 1.0])
    msg = validate(m)
    assert msg is not None and "row 0" in msg and "duplicate" in msg


def test_validate_unsorted_column():
    m = BinaryLabelMatrix(1, 4, [0, 2], [3, 1])
    msg = validate(m)
    assert msg is not None and "row 0" in msg


def test_validate_out_of_range_column():
    m = BinaryLabelMatrix(2, 2, [0, 1, 2], [0, 5])
    msg = validate(m)
    assert msg is not None and "row 1" in msg


def test_validate_nonfinite_value():
    m = SparseMatrix(2, 2, [0, 1, 2], [0, 1], [1.0, np.inf])
    msg = validate(m)
    assert msg is not None and "row 1" in msg


def test_validate_nnz_mismatch():
    m = SparseMatrix(1, 3, [0, 2], [0, 1, 2], [1.0, 1.0, 1.0])
    assert validate(m) is not None


def test_column_sums_identity_subset():
    Y = labels_to_matrix([[0], [1], [2]], 3)
    assert column_sums(Y, [0, 1]).tolist() == [1, 1, 0]


def test_column_sums_empty_subset():
    Y = labels_to_matrix([[0, 1], [1]], 2)
    assert column_sums(Y, []).tolist() == [0, 0]


def test_column_sums_full_ones():
    Y = labels_to_matrix([[0, 1], [0, 1]], 2)
    assert column_sums(Y, [0, 1]).tolist() == [2, 2]


def test_column_sums_full_equals_nnz_per_column():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n, m = int(rng.integers(1, 30)), int(rng.integers(1, 15))
        Y = random_dataset(rng, n, 3, m).labels
        full = column_sums(Y)
        via_subset = column_sums(Y, np.arange(n))
        assert np.array_equal(full, via_subset)
        dense = Y.to_scipy().toarray()
        assert np.array_equal(full, dense.sum(axis=0))


def test_column_sums_additive_over_disjoint_subsets():
    rng = np.random.default_rng(8)
    for _ in range(20):
        n, m = int(rng.integers(2, 40)), int(rng.integers(1, 12))
        Y = random_dataset(rng, n, 3, m).labels
        perm = rng.permutation(n)
        cut = int(rng.integers(0, n + 1))
        a, b = perm[:cut], perm[cut:]
        assert np.array_equal(column_sums(Y, a) + column_sums(Y, b), column_sums(Y))


def test_column_sums_out_of_range_row():
    Y = labels_to_matrix([[0]], 1)
    with pytest.raises(IndexError):
        column_sums(Y, [3])


def test_dataset_row_mismatch():
    X = dense_to_sparse(np.ones((2, 2)))
    Y = labels_to_matrix([[0]], 1)
    with pytest.raises(ValueError):
        Dataset(X, Y)


def test_take_rows_and_restrict_columns():
    Y = labels_to_matrix([[0, 2], [1], [2, 3]], 4)
    sub = take_rows(Y, [2, 0])
    assert sub.rows == 2
    assert sub.row(0).tolist() == [2, 3]
    assert sub.row(1).tolist() == [0, 2]
    narrowed = restrict_columns(Y, [2, 3])
    assert narrowed.cols == 2
    assert narrowed.row(0).tolist() == [0]
    assert narrowed.row(2).tolist() == [0, 1]


def test_restrict_columns_rejects_unsorted():
    Y = labels_to_matrix([[0]], 3)
    with pytest.raises(ValueError):
        restrict_columns(Y, [2, 1])


def test_normalize_rows_unit_norm():
    X = dense_to_sparse([[3.0, 4.0], [0.0, 0.0], [5.0, 0.0]])
    N = normalize_rows(X).to_scipy().toarray()
    assert np.allclose(np.linalg.norm(N[0]), 1.0)
    assert np.allclose(N[1], 0.0)  # zero rows stay zero
    assert np.allclose(N[2], [1.0, 0.0])
