"""Versioned binary container for models and partitions, plus text exports.

Container layout, little-endian throughout: magic ``BPXM``, format version
(u32), a type tag, then one length-prefixed section per field.  Nested
objects (e.g. the models inside a BpModel) are embedded as whole containers
inside a section.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import DataFormatError
from .logistic import LinearModel
from .partition import Partition
from .pipeline import BpModel
from .sparse import BinaryLabelMatrix, SparseMatrix

MAGIC = b"BPXM"
FORMAT_VERSION = 1

_TAG_SPARSE = "sparse_matrix"
_TAG_BINARY = "binary_label_matrix"
_TAG_PARTITION = "partition"
_TAG_LINEAR = "linear_model"
_TAG_BP_MODEL = "bp_model"


def _section(payload: bytes) -> bytes:
    return struct.pack("<Q", len(payload)) + payload


def _i8(a) -> bytes:
    return np.ascontiguousarray(a, dtype="<i8").tobytes()


def _f8(a) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def section(self) -> bytes:
        if self.pos + 8 > len(self.buf):
            raise DataFormatError("container truncated: missing section length")
        (length,) = struct.unpack_from("<Q", self.buf, self.pos)
        self.pos += 8
        if self.pos + length > len(self.buf):
            raise DataFormatError("container truncated: section shorter than declared")
        out = self.buf[self.pos : self.pos + length]
        self.pos += length
        return out

    def i8(self) -> np.ndarray:
        return np.frombuffer(self.section(), dtype="<i8").astype(np.int64)

    def f8(self) -> np.ndarray:
        return np.frombuffer(self.section(), dtype="<f8").astype(np.float64)

    def done(self) -> bool:
        return self.pos == len(self.buf)


def to_bytes(obj) -> bytes:
    body: list[bytes] = []
    if isinstance(obj, SparseMatrix):
        tag = _TAG_SPARSE
        body.append(_section(struct.pack("<QQ", obj.rows, obj.cols)))
        body.append(_section(_i8(obj.row_offsets)))
        body.append(_section(_i8(obj.col_indices)))
        body.append(_section(_f8(obj.values)))
    elif isinstance(obj, BinaryLabelMatrix):
        tag = _TAG_BINARY
        body.append(_section(struct.pack("<QQ", obj.rows, obj.cols)))
        body.append(_section(_i8(obj.row_offsets)))
        body.append(_section(_i8(obj.col_indices)))
    elif isinstance(obj, Partition):
        tag = _TAG_PARTITION
        body.append(_section(struct.pack("<Qd", obj.q, obj.lam)))
        body.append(_section(_i8(obj.instance_cluster_of)))
        offsets = np.zeros(obj.q + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([c.size for c in obj.label_clusters])
        body.append(_section(_i8(offsets)))
        body.append(_section(_i8(np.concatenate(obj.label_clusters))))
        body.append(_section(_f8(obj.objective_trace)))
    elif isinstance(obj, LinearModel):
        tag = _TAG_LINEAR
        body.append(_section(to_bytes(obj.weights)))
        body.append(_section(_f8(obj.bias)))
        body.append(_section(_i8(obj.class_ids)))
        body.append(_section(obj.constant_mask.astype(np.uint8).tobytes()))
    elif isinstance(obj, BpModel):
        tag = _TAG_BP_MODEL
        body.append(_section(to_bytes(obj.router)))
        body.append(_section(struct.pack("<Q", obj.partition.q)))
        for mdl in obj.cluster_models:
            body.append(_section(to_bytes(mdl)))
        body.append(_section(to_bytes(obj.partition)))
        body.append(_section(_i8(obj.train_label_counts)))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    head = MAGIC + struct.pack("<I", FORMAT_VERSION) + _section(tag.encode("utf-8"))
    return head + b"".join(body)


def from_bytes(buf: bytes):
    if buf[:4] != MAGIC:
        raise DataFormatError("bad magic bytes: not a BPXM container")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported container version {version}")
    r = _Reader(buf[8:])
    tag = r.section().decode("utf-8")
    if tag == _TAG_SPARSE:
        rows, cols = struct.unpack("<QQ", r.section())
        return SparseMatrix(rows, cols, r.i8(), r.i8(), r.f8())
    if tag == _TAG_BINARY:
        rows, cols = struct.unpack("<QQ", r.section())
        return BinaryLabelMatrix(rows, cols, r.i8(), r.i8())
    if tag == _TAG_PARTITION:
        q, lam = struct.unpack("<Qd", r.section())
        assignment = r.i8()
        offsets = r.i8()
        indices = r.i8()
        trace = r.f8()
        clusters = tuple(indices[offsets[l] : offsets[l + 1]] for l in range(q))
        return Partition(q=q, lam=lam, instance_cluster_of=assignment,
                         label_clusters=clusters, objective_trace=trace)
    if tag == _TAG_LINEAR:
        weights = from_bytes(r.section())
        bias = r.f8()
        class_ids = r.i8()
        const = np.frombuffer(r.section(), dtype=np.uint8).astype(bool)
        return LinearModel(weights, bias, class_ids, const)
    if tag == _TAG_BP_MODEL:
        router = from_bytes(r.section())
        (q,) = struct.unpack("<Q", r.section())
        models = tuple(from_bytes(r.section()) for _ in range(q))
        part = from_bytes(r.section())
        counts = r.i8()
        return BpModel(router=router, cluster_models=models, partition=part,
                       train_label_counts=counts)
    raise DataFormatError(f"unknown container type {tag!r}")


def save(obj, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(to_bytes(obj))


def load(path: str):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())


def partition_to_json(partition: Partition) -> str:
    """Human-readable export: cluster sizes, label lists, objective trace."""
    doc = {
        "q": partition.q,
        "lambda": partition.lam,
        "instance_cluster_sizes": [int(s) for s in partition.instance_cluster_sizes()],
        "label_clusters": [[int(j) for j in c] for c in partition.label_clusters],
        "objective_trace": [float(f) for f in partition.objective_trace],
    }
    return json.dumps(doc, indent=2) + "\n"


def write_pgm(pixels: np.ndarray, path: str) -> None:
    """Write a grayscale image as binary PGM (P5, maxval 255)."""
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    if pixels.ndim != 2:
        raise ValueError("pixels must be a 2-D array")
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
