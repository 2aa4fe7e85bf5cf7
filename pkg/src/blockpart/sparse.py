"""Sparse row-major containers for features and binary labels.

Everything downstream (clustering, classifier training, metrics) works on
these two CSR-style types plus the ``Dataset`` pair.  All indices are
zero-based.  Instances are rows; features or labels are columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


def _index_array(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Real-valued CSR matrix. Immutable after construction."""

    rows: int
    cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        # Cheap shape normalization only; full invariant checks live in validate().
        object.__setattr__(self, "row_offsets", _index_array(self.row_offsets))
        object.__setattr__(self, "col_indices", _index_array(self.col_indices))
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=np.float64))
        if self.row_offsets.shape != (self.rows + 1,):
            raise ValueError("row_offsets must have rows+1 entries")
        if self.col_indices.shape != self.values.shape:
            raise ValueError("col_indices and values must have equal length")

    @property
    def nnz(self) -> int:
        return int(self.col_indices.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and values of row ``i`` (views, do not mutate)."""
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets), shape=self.shape
        )

    @classmethod
    def from_scipy(cls, mat) -> "SparseMatrix":
        mat = sp.csr_matrix(mat)
        mat.sum_duplicates()
        mat.sort_indices()
        return cls(
            rows=mat.shape[0],
            cols=mat.shape[1],
            row_offsets=mat.indptr,
            col_indices=mat.indices,
            values=mat.data,
        )


@dataclass(frozen=True, eq=False)
class BinaryLabelMatrix:
    """CSR pattern matrix; a stored index means the entry is 1.

    No values array is kept: presence is the value, which halves memory for
    the label matrix.
    """

    rows: int
    cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", _index_array(self.row_offsets))
        object.__setattr__(self, "col_indices", _index_array(self.col_indices))
        if self.row_offsets.shape != (self.rows + 1,):
            raise ValueError("row_offsets must have rows+1 entries")

    @property
    def nnz(self) -> int:
        return int(self.col_indices.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> np.ndarray:
        """Label indices present in row ``i`` (a view, do not mutate)."""
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi]

    def to_scipy(self) -> sp.csr_matrix:
        data = np.ones(self.nnz, dtype=np.float64)
        return sp.csr_matrix((data, self.col_indices, self.row_offsets), shape=self.shape)

    @classmethod
    def from_scipy(cls, mat) -> "BinaryLabelMatrix":
        mat = sp.csr_matrix(mat)
        mat.sum_duplicates()
        mat.eliminate_zeros()
        mat.sort_indices()
        return cls(
            rows=mat.shape[0],
            cols=mat.shape[1],
            row_offsets=mat.indptr,
            col_indices=mat.indices,
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix paired with its label matrix (equal row counts)."""

    features: SparseMatrix
    labels: BinaryLabelMatrix

    def __post_init__(self):
        if self.features.rows != self.labels.rows:
            raise ValueError(
                f"features have {self.features.rows} rows but labels have {self.labels.rows}"
            )

    @property
    def n(self) -> int:
        return self.features.rows


def validate(mat) -> str | None:
    """Check structural invariants; return None if valid, else a message.

    The first violation found is reported together with the row it occurs in.
    """
    ro = mat.row_offsets
    ci = mat.col_indices
    values = getattr(mat, "values", None)
    if ro.shape[0] != mat.rows + 1:
        return f"row_offsets has {ro.shape[0]} entries, expected rows+1 = {mat.rows + 1}"
    if ro[0] != 0:
        return f"row_offsets[0] = {ro[0]}, expected 0"
    dec = np.nonzero(np.diff(ro) < 0)[0]
    if dec.size:
        r = int(dec[0])
        return f"row {r}: row_offsets decrease from {ro[r]} to {ro[r + 1]}"
    if ro[-1] != ci.shape[0]:
        return f"row_offsets[-1] = {ro[-1]} does not match nnz = {ci.shape[0]}"
    if ci.size:
        if ci.min() < 0 or ci.max() >= mat.cols:
            bad = int(np.nonzero((ci < 0) | (ci >= mat.cols))[0][0])
            r = int(np.searchsorted(ro, bad, side="right") - 1)
            return f"row {r}: column index {ci[bad]} out of range [0, {mat.cols})"
    for r in range(mat.rows):
        seg = ci[ro[r] : ro[r + 1]]
        if seg.size > 1 and np.any(np.diff(seg) <= 0):
            j = int(np.nonzero(np.diff(seg) <= 0)[0][0])
            if seg[j] == seg[j + 1]:
                return f"row {r}: duplicate column index {seg[j]}"
            return f"row {r}: column indices not strictly increasing"
    if values is not None and values.size and not np.all(np.isfinite(values)):
        bad = int(np.nonzero(~np.isfinite(values))[0][0])
        r = int(np.searchsorted(ro, bad, side="right") - 1)
        return f"row {r}: non-finite value {values[bad]}"
    return None


def column_sums(mat: BinaryLabelMatrix, rows=None) -> np.ndarray:
    """Per-column count of ones, restricted to ``rows`` (all rows if None).

    Cost is linear in the nnz of the selected rows.
    """
    if rows is None:
        return np.bincount(mat.col_indices, minlength=mat.cols).astype(np.int64)
    rows = _index_array(rows)
    if rows.size == 0:
        return np.zeros(mat.cols, dtype=np.int64)
    if rows.min() < 0 or rows.max() >= mat.rows:
        bad = rows[(rows < 0) | (rows >= mat.rows)][0]
        raise IndexError(f"row index {bad} out of range [0, {mat.rows})")
    ro = mat.row_offsets
    starts = ro[rows]
    lengths = ro[rows + 1] - starts
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(mat.cols, dtype=np.int64)
    # Flatten the selected row segments without a Python-level loop.
    ends = np.cumsum(lengths)
    flat = np.arange(total, dtype=np.int64) + np.repeat(starts - (ends - lengths), lengths)
    return np.bincount(mat.col_indices[flat], minlength=mat.cols).astype(np.int64)


def take_rows(mat, rows):
    """Row subset of a SparseMatrix/BinaryLabelMatrix, in the given order."""
    rows = _index_array(rows)
    sub = mat.to_scipy()[rows]
    if isinstance(mat, BinaryLabelMatrix):
        return BinaryLabelMatrix.from_scipy(sub)
    return SparseMatrix.from_scipy(sub)


def take_dataset_rows(ds: Dataset, rows) -> Dataset:
    return Dataset(take_rows(ds.features, rows), take_rows(ds.labels, rows))


def restrict_columns(mat: BinaryLabelMatrix, cols) -> BinaryLabelMatrix:
    """Keep only ``cols`` (sorted, unique) and renumber them 0..len(cols)-1."""
    cols = _index_array(cols)
    if cols.size and (np.any(np.diff(cols) <= 0) or cols[0] < 0 or cols[-1] >= mat.cols):
        raise ValueError("cols must be sorted, unique and within range")
    sub = mat.to_scipy().tocsc()[:, cols]
    return BinaryLabelMatrix.from_scipy(sub.tocsr())


def normalize_rows(mat: SparseMatrix) -> SparseMatrix:
    """Scale every non-empty row to unit L2 norm."""
    m = mat.to_scipy().copy()
    norms = np.sqrt(np.asarray(m.multiply(m).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    m = sp.diags(scale) @ m
    return SparseMatrix.from_scipy(m)
