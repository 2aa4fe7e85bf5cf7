"""Multi-label text corpus reader/writer and dataset splitting.

The on-disk format: a header line ``n d m`` followed by one line per
instance, ``l1,l2,... f1:v1 f2:v2 ...``.  Label and feature indices are
zero-based.  A line whose label list is empty starts with a space.
Files ending in ``.gz`` are transparently (de)compressed.
"""

from __future__ import annotations

import gzip
import math

import numpy as np

from .errors import DataFormatError
from .sparse import BinaryLabelMatrix, Dataset, SparseMatrix, normalize_rows, take_dataset_rows


def _parse_header(line: str) -> tuple[int, int, int]:
    parts = line.split()
    if len(parts) != 3:
        raise DataFormatError(f"line 1: malformed header {line!r}, expected 'n d m'")
    try:
        n, d, m = (int(p) for p in parts)
    except ValueError:
        raise DataFormatError(f"line 1: malformed header {line!r}, expected three integers") from None
    if n <= 0 or d <= 0 or m <= 0:
        raise DataFormatError(f"line 1: header dimensions must be positive, got {n} {d} {m}")
    return n, d, m


def _parse_line(line: str, lineno: int, d: int, m: int):
    if line.startswith(" "):
        label_part, rest = "", line[1:]
    else:
        label_part, _, rest = line.partition(" ")
        if ":" in label_part:
            raise DataFormatError(
                f"line {lineno}: first field {label_part!r} looks like a feature; "
                "a line without labels must start with a space"
            )
    labels = []
    if label_part:
        for tok in label_part.split(","):
            try:
                lab = int(tok)
            except ValueError:
                raise DataFormatError(f"line {lineno}: bad label {tok!r}") from None
            if not 0 <= lab < m:
                raise DataFormatError(f"line {lineno}: label index {lab} out of range [0, {m})")
            labels.append(lab)
    feats: dict[int, float] = {}
    for tok in rest.split():
        idx_str, sep, val_str = tok.partition(":")
        if not sep:
            raise DataFormatError(f"line {lineno}: bad feature token {tok!r}, expected 'index:value'")
        try:
            idx = int(idx_str)
        except ValueError:
            raise DataFormatError(f"line {lineno}: bad feature index {idx_str!r}") from None
        if not 0 <= idx < d:
            raise DataFormatError(f"line {lineno}: feature index {idx} out of range [0, {d})")
        try:
            val = float(val_str)
        except ValueError:
            raise DataFormatError(f"line {lineno}: bad feature value {val_str!r}") from None
        if not math.isfinite(val):
            raise DataFormatError(f"line {lineno}: non-finite feature value {val_str!r}")
        if idx in feats:
            raise DataFormatError(f"line {lineno}: duplicate feature index {idx}")
        feats[idx] = val
    return sorted(set(labels)), sorted(feats.items())


def parse_dataset(stream) -> Dataset:
    """Parse the text format from an iterable of lines into a Dataset."""
    lines = iter(stream)
    header = next(lines, None)
    if header is None:
        raise DataFormatError("line 1: empty input, missing header")
    n, d, m = _parse_header(header)

    feat_offsets = np.zeros(n + 1, dtype=np.int64)
    label_offsets = np.zeros(n + 1, dtype=np.int64)
    feat_cols: list[int] = []
    feat_vals: list[float] = []
    label_cols: list[int] = []
    count = 0
    for lineno, raw in enumerate(lines, start=2):
        line = raw.rstrip("\r\n")
        if count >= n:
            raise DataFormatError(f"line {lineno}: more than the declared {n} instances")
        labels, feats = _parse_line(line, lineno, d, m)
        label_cols.extend(labels)
        for idx, val in feats:
            feat_cols.append(idx)
            feat_vals.append(val)
        count += 1
        feat_offsets[count] = len(feat_cols)
        label_offsets[count] = len(label_cols)
    if count != n:
        raise DataFormatError(f"header declares {n} instances but file has {count}")
    features = SparseMatrix(n, d, feat_offsets, np.asarray(feat_cols, dtype=np.int64),
                            np.asarray(feat_vals, dtype=np.float64))
    labels = BinaryLabelMatrix(n, m, label_offsets, np.asarray(label_cols, dtype=np.int64))
    return Dataset(features, labels)


def write_dataset(ds: Dataset, stream) -> None:
    """Write a Dataset in the text format; inverse of parse_dataset."""
    X, Y = ds.features, ds.labels
    stream.write(f"{X.rows} {X.cols} {Y.cols}\n")
    for i in range(X.rows):
        labels = Y.row(i)
        cols, vals = X.row(i)
        label_str = ",".join(str(int(j)) for j in labels)
        feat_str = " ".join(f"{int(j)}:{float(v)!r}" for j, v in zip(cols, vals))
        if label_str:
            line = f"{label_str} {feat_str}" if feat_str else label_str
        else:
            line = f" {feat_str}"
        stream.write(line + "\n")


def _open_text(path: str, mode: str):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def load_dataset(path: str, normalize: bool = True) -> Dataset:
    """Load a dataset file; rows of X are scaled to unit L2 norm by default."""
    with _open_text(path, "r") as fh:
        ds = parse_dataset(fh)
    if normalize:
        ds = Dataset(normalize_rows(ds.features), ds.labels)
    return ds


def save_dataset(ds: Dataset, path: str) -> None:
    with _open_text(path, "w") as fh:
        write_dataset(ds, fh)


def kfold_split(ds: Dataset, k: int, seed: int = 0) -> list[tuple[Dataset, Dataset]]:
    """Split into k (train, validation) pairs.

    Validation folds are disjoint, cover all instances and differ in size by
    at most one.  Deterministic for a given seed.
    """
    n = ds.n
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if k > n:
        raise ValueError(f"k = {k} exceeds the number of instances n = {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    pairs = []
    for fold in folds:
        val_rows = np.sort(fold)
        mask = np.ones(n, dtype=bool)
        mask[val_rows] = False
        train_rows = np.nonzero(mask)[0]
        pairs.append((take_dataset_rows(ds, train_rows), take_dataset_rows(ds, val_rows)))
    return pairs


def holdout_split(ds: Dataset, test_fraction: float, seed: int = 0, stratify_by=None):
    """Random train/test split; returns (train, test, train_rows, test_rows).

    With ``stratify_by`` (an integer group per instance) the fraction is
    applied within every group, so small groups stay represented.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    n = ds.n
    if stratify_by is None:
        perm = rng.permutation(n)
        n_test = max(1, int(round(n * test_fraction)))
        test_rows = np.sort(perm[:n_test])
    else:
        groups = np.asarray(stratify_by)
        if groups.shape != (n,):
            raise ValueError("stratify_by must have one entry per instance")
        picks = []
        for g in np.unique(groups):
            members = np.nonzero(groups == g)[0]
            perm = rng.permutation(members.size)
            n_test = max(1, int(round(members.size * test_fraction)))
            picks.append(members[perm[:n_test]])
        test_rows = np.sort(np.concatenate(picks))
    mask = np.ones(n, dtype=bool)
    mask[test_rows] = False
    train_rows = np.nonzero(mask)[0]
    return (take_dataset_rows(ds, train_rows), take_dataset_rows(ds, test_rows),
            train_rows, test_rows)
