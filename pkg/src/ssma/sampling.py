"""Representative unlabeled samples through bisecting k-means centroids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class CentroidSet:
    points: np.ndarray  # (d, u) centroids
    assignment: np.ndarray  # cluster id of every input column

    @property
    def size(self) -> int:
        return self.points.shape[1]


def _sse(X: np.ndarray) -> float:
    """Within-cluster sum of squares of the rows of ``X``."""
    return float(np.sum((X - X.mean(axis=0)) ** 2))


def two_means(X: np.ndarray, rng: np.random.Generator, restarts: int = 10, max_iter: int = 100) -> np.ndarray:
    """Best-of-``restarts`` Lloyd 2-means on the rows of ``X``.

    Each restart starts from two distinct rows drawn from ``rng``; all
    restarts run together. Returns a boolean mask of the second cluster.
    """
    n = X.shape[0]
    starts = np.array([rng.choice(n, 2, replace=False) for _ in range(restarts)])
    centers = X[starts]  # (R, 2, d)
    total = X.sum(axis=0)
    prev = None
    for _ in range(max_iter):
        # ||x - c||^2 up to the shared ||x||^2 term
        proj = np.einsum("nd,rkd->rkn", X, centers)
        norms = np.einsum("rkd,rkd->rk", centers, centers)
        dist = norms[:, :, None] - 2 * proj
        second = dist[:, 1, :] < dist[:, 0, :]
        if prev is not None and np.array_equal(second, prev):
            break
        prev = second
        cnt1 = second.sum(axis=1)
        cnt0 = n - cnt1
        sum1 = second.astype(float) @ X
        sum0 = total - sum1
        new0 = np.where(cnt0[:, None] > 0, sum0 / np.maximum(cnt0, 1)[:, None], centers[:, 0])
        new1 = np.where(cnt1[:, None] > 0, sum1 / np.maximum(cnt1, 1)[:, None], centers[:, 1])
        centers = np.stack([new0, new1], axis=1)

    best, best_sse = None, np.inf
    for mask in prev:
        if mask.all() or not mask.any():
            continue
        sse = _sse(X[mask]) + _sse(X[~mask])
        if sse < best_sse:
            best, best_sse = mask, sse
    if best is None:
        # every restart collapsed (duplicate starting points): peel off the farthest row
        far = int(np.argmax(np.sum((X - X.mean(axis=0)) ** 2, axis=1)))
        best = np.zeros(n, dtype=bool)
        best[far] = True
    return best


def bisecting_kmeans(features: np.ndarray, u: int, seed: int, restarts: int = 10) -> CentroidSet:
    """Split the highest-SSE cluster with 2-means until ``u`` clusters exist.

    ``features`` is ``(d, n)``. When every cluster has zero SSE (duplicate
    points) the largest cluster is split instead.
    """
    X = np.ascontiguousarray(np.asarray(features, dtype=float).T)
    n = X.shape[0]
    if not 1 <= u <= n:
        raise ParameterError(f"number of clusters u must satisfy 1 <= u <= n ({n}), got {u}")
    rng = np.random.default_rng(seed)
    clusters = [np.arange(n)]
    sses = [_sse(X)]
    while len(clusters) < u:
        if max(sses) > 0:
            t = int(np.argmax(sses))
        else:
            t = int(np.argmax([c.size for c in clusters]))
        idx = clusters[t]
        mask = two_means(X[idx], rng, restarts)
        left, right = idx[~mask], idx[mask]
        clusters[t] = left
        sses[t] = _sse(X[left])
        clusters.append(right)
        sses.append(_sse(X[right]))
    assignment = np.empty(n, dtype=int)
    for c, idx in enumerate(clusters):
        assignment[idx] = c
    points = np.stack([X[idx].mean(axis=0) for idx in clusters], axis=1)
    return CentroidSet(points, assignment)
