"""Lloyd's k-means over sparse feature rows, used to seed the co-clustering.

Plain k-means++ seeding and Lloyd updates with squared Euclidean distance.
Centroids are kept dense (q x d); distances use the expansion
||x - c||^2 = ||x||^2 - 2<x, c> + ||c||^2 so each sweep costs one sparse
matrix product.  Deterministic for a given seed.
"""

from __future__ import annotations

import numpy as np

from .sparse import SparseMatrix

MAX_LLOYD_ITERS = 50
MOVE_TOL = 1e-6


def _dist_sq(Xsp, x_sq: np.ndarray, centers: np.ndarray) -> np.ndarray:
    c_sq = np.einsum("ij,ij->i", centers, centers)
    d2 = x_sq[:, None] - 2.0 * (Xsp @ centers.T) + c_sq[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def _plus_plus_centers(Xsp, x_sq: np.ndarray, q: int, rng) -> np.ndarray:
    n, d = Xsp.shape
    centers = np.zeros((q, d))
    first = int(rng.integers(n))
    centers[0] = Xsp[first].toarray().ravel()
    d2 = _dist_sq(Xsp, x_sq, centers[:1])[:, 0]
    for j in range(1, q):
        total = float(d2.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))  # all points coincide with chosen centers
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            idx = min(idx, n - 1)
        centers[j] = Xsp[idx].toarray().ravel()
        d2 = np.minimum(d2, _dist_sq(Xsp, x_sq, centers[j : j + 1])[:, 0])
    return centers


def kmeans_assign(X: SparseMatrix, q: int, seed: int = 0,
                  max_iters: int = MAX_LLOYD_ITERS, move_tol: float = MOVE_TOL) -> np.ndarray:
    """Cluster rows of X into q groups; returns the assignment array.

    Stops after ``max_iters`` sweeps or when no centroid moves more than
    ``move_tol``.  A cluster that loses all its points is re-seeded from the
    point currently farthest from its own centroid.
    """
    n = X.rows
    if q < 1:
        raise ValueError("q must be at least 1")
    if q > n:
        raise ValueError(f"q = {q} exceeds the number of instances n = {n}")
    if q == 1:
        return np.zeros(n, dtype=np.int64)
    rng = np.random.default_rng(seed)
    Xsp = X.to_scipy()
    x_sq = np.asarray(Xsp.multiply(Xsp).sum(axis=1)).ravel()

    centers = _plus_plus_centers(Xsp, x_sq, q, rng)
    for _ in range(max_iters):
        d2 = _dist_sq(Xsp, x_sq, centers)
        assign = np.argmin(d2, axis=1)
        counts = np.bincount(assign, minlength=q)
        sums = np.zeros_like(centers)
        for l in np.nonzero(counts)[0]:
            sums[l] = np.asarray(Xsp[assign == l].sum(axis=0)).ravel()
        new_centers = centers.copy()
        nz = counts > 0
        new_centers[nz] = sums[nz] / counts[nz, None]
        empties = np.nonzero(~nz)[0]
        if empties.size:
            # farthest points from their assigned centroid, one per empty cluster
            own = d2[np.arange(n), assign]
            order = np.argsort(-own, kind="stable")
            for slot, l in enumerate(empties):
                new_centers[l] = Xsp[order[slot]].toarray().ravel()
        move = np.sqrt(np.sum((new_centers - centers) ** 2, axis=1)).max()
        centers = new_centers
        if move < move_tol:
            break
    return np.argmin(_dist_sq(Xsp, x_sq, centers), axis=1).astype(np.int64)
