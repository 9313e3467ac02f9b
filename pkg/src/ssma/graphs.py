"""Affinity graphs (kNN geometry, class similarity / dissimilarity) and Laplacians."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .data import MultiDomainDataset
from .errors import DataError, ParameterError

_CHUNK = 1024


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Symmetric nonnegative affinity matrix with zero diagonal (CSR storage)."""

    matrix: sp.csr_matrix
    name: str = "W"

    def __post_init__(self):
        W = sp.csr_matrix(self.matrix, dtype=float)
        W.eliminate_zeros()
        W.sort_indices()
        if W.shape[0] != W.shape[1]:
            raise DataError(f"graph {self.name} is not square: {W.shape}")
        if W.nnz and W.data.min() < 0:
            raise DataError(f"graph {self.name} has negative weights")
        if W.diagonal().any():
            raise DataError(f"graph {self.name} has a nonzero diagonal")
        if (W != W.T).nnz:
            raise DataError(f"graph {self.name} is not symmetric")
        object.__setattr__(self, "matrix", W)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def frobenius(self) -> float:
        return float(np.sqrt(np.sum(self.matrix.data**2)))

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def scaled(self, factor: float) -> "SparseGraph":
        return SparseGraph(self.matrix * factor, self.name)


def knn_indices(features: np.ndarray, k: int) -> np.ndarray:
    """``(n, k)`` indices of each column's k nearest other columns (Euclidean).

    Ties in distance go to the lower sample index.
    """
    X = np.asarray(features, dtype=float).T
    n = X.shape[0]
    if not 1 <= k < n:
        raise ParameterError(f"k must satisfy 1 <= k < n_samples ({n}), got {k}")
    out = np.empty((n, k), dtype=int)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        dist = cdist(X[start:stop], X, "sqeuclidean")
        dist[np.arange(stop - start), np.arange(start, stop)] = np.inf
        out[start:stop] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return out


def knn_graph(features: np.ndarray, k: int, name: str = "W_g") -> SparseGraph:
    """Binary kNN graph over the columns of ``features``, symmetrized by union."""
    nbrs = knn_indices(features, k)
    n = nbrs.shape[0]
    rows = np.repeat(np.arange(n), k)
    directed = sp.csr_matrix((np.ones(n * k), (rows, nbrs.ravel())), shape=(n, n))
    union = directed.maximum(directed.T)
    return SparseGraph(union, name)


def class_graphs(ds: MultiDomainDataset):
    """Same-class graph ``W_s`` and different-class graph ``W_d`` over all N joint samples.

    Pairs are formed across and within domains; unlabeled samples are isolated.
    """
    labels = ds.joint_labels()
    labeled = np.flatnonzero(ds.joint_labeled())
    if labeled.size == 0:
        raise DataError("no labeled samples: class graphs are empty")
    y = labels[labeled]
    if np.unique(y).size < 2:
        raise DataError("labeled samples cover fewer than 2 classes; the dissimilarity graph would be empty")
    N = ds.n_samples
    same = y[:, None] == y[None, :]
    np.fill_diagonal(same, False)
    diff = y[:, None] != y[None, :]

    def embed(mask):
        r, c = np.nonzero(mask)
        return sp.csr_matrix((np.ones(r.size), (labeled[r], labeled[c])), shape=(N, N))

    return SparseGraph(embed(same), "W_s"), SparseGraph(embed(diff), "W_d")


def frobenius_rescale(graphs: Sequence[SparseGraph]) -> list[SparseGraph]:
    """Scale every graph to unit Frobenius norm."""
    out = []
    for g in graphs:
        norm = g.frobenius()
        if norm == 0:
            raise DataError(f"graph {g.name} is all zeros and cannot be rescaled")
        out.append(g.scaled(1.0 / norm))
    return out


def block_diag_graphs(graphs: Sequence[SparseGraph], name: str = "W_g") -> SparseGraph:
    return SparseGraph(sp.block_diag([g.matrix for g in graphs], format="csr"), name)


def laplacian(W: SparseGraph) -> sp.csr_matrix:
    """``U - W`` with ``U`` the diagonal degree matrix."""
    degree = np.asarray(W.matrix.sum(axis=1)).ravel()
    return (sp.diags(degree) - W.matrix).tocsr()


def block_diag_geometry_laplacian(per_domain: Sequence, sizes: Sequence[int] | None = None) -> sp.csr_matrix:
    """Joint N x N Laplacian with the per-domain Laplacians on the diagonal."""
    if sizes is not None:
        if len(sizes) != len(per_domain):
            raise DataError(f"{len(per_domain)} Laplacians for {len(sizes)} domains")
        for i, (L, n) in enumerate(zip(per_domain, sizes)):
            if L.shape != (n, n):
                raise DataError(f"Laplacian {i} has shape {L.shape}, domain has {n} samples")
    return sp.block_diag([sp.csr_matrix(L) for L in per_domain], format="csr")

