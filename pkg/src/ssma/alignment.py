"""Semisupervised manifold alignment: per-domain linear projectors into a joint latent space.

The projectors are the generalized eigenvectors of the pencil

    X (mu L_g + L_s) X^T  phi  =  lam  X L_d X^T  phi

where ``X`` is the block-diagonal joint data matrix and ``L_g``, ``L_s``,
``L_d`` are the Laplacians of the within-domain kNN graph, the same-class
graph and the different-class graph. Columns of ``F`` are the eigenvectors in
ascending eigenvalue order, each scaled by ``sqrt(lam)``; the rows of ``F``
split into one block per domain.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from sklearn.model_selection import StratifiedKFold

from . import graphs
from .data import MultiDomainDataset, Standardization, assemble_block_diagonal, standardize
from .eigen import RIDGE_LADDER, solve_generalized
from .errors import DataError, NumericalError, ParameterError

log = logging.getLogger(__name__)

PINV_RCOND = 1e-10
DIMS_TOLERANCE = 0.005


@dataclass(frozen=True)
class AlignmentParams:
    mu: float = 1.0
    k: int = 9
    ridge: tuple = RIDGE_LADDER
    standardize: bool = True
    dims: Optional[int] = None

    def __post_init__(self):
        if not self.mu >= 0:
            raise ParameterError(f"mu must be >= 0, got {self.mu}")
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if self.dims is not None and int(self.dims) < 1:
            raise ParameterError(f"dims must be >= 1, got {self.dims}")
        ridge = (self.ridge,) if np.isscalar(self.ridge) else self.ridge
        if any(r < 0 for r in ridge):
            raise ParameterError("ridge factors must be >= 0")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "ridge", tuple(float(r) for r in ridge))
        object.__setattr__(self, "standardize", bool(self.standardize))
        if self.dims is not None:
            object.__setattr__(self, "dims", int(self.dims))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self) | {"ridge": list(self.ridge)}

    @classmethod
    def from_dict(cls, d: dict) -> "AlignmentParams":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown alignment parameters: {sorted(extra)}")
        return cls(**d)


@dataclass(frozen=True, eq=False)
class AlignmentModel:
    eigenvalues: np.ndarray
    F: np.ndarray
    domain_ids: tuple
    domain_dims: tuple
    standardization: tuple
    params: AlignmentParams
    dims: int
    ridge_used: float = 0.0
    graph_norms: tuple = ()  # Frobenius norms of W_g, W_s, W_d before rescaling

    def __post_init__(self):
        d = int(sum(self.domain_dims))
        if self.F.shape != (d, d) or self.eigenvalues.shape != (d,):
            raise DataError(f"projector shape {self.F.shape} does not match domain dims {self.domain_dims}")
        if not 1 <= self.dims <= d:
            raise ParameterError(f"dims must lie in 1..{d}, got {self.dims}")

    @property
    def dim(self) -> int:
        return self.F.shape[0]

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.domain_dims)])

    def index(self, domain_id) -> int:
        try:
            return self.domain_ids.index(str(domain_id))
        except ValueError:
            raise DataError(f"unknown domain {domain_id!r}; model has {list(self.domain_ids)}") from None

    def block(self, domain_id) -> np.ndarray:
        """The ``(d_m, d)`` projector rows of one domain."""
        m = self.index(domain_id)
        lo, hi = self.offsets[m], self.offsets[m + 1]
        return self.F[lo:hi]

    def with_dims(self, dims: int) -> "AlignmentModel":
        return dataclasses.replace(self, dims=int(dims))

    def __eq__(self, other):
        if not isinstance(other, AlignmentModel):
            return NotImplemented
        return (
            np.array_equal(self.eigenvalues, other.eigenvalues)
            and np.array_equal(self.F, other.F)
            and self.domain_ids == other.domain_ids
            and self.domain_dims == other.domain_dims
            and all(
                np.array_equal(a.mean, b.mean) and np.array_equal(a.scale, b.scale)
                for a, b in zip(self.standardization, other.standardization)
            )
            and self.params == other.params
            and self.dims == other.dims
            and self.ridge_used == other.ridge_used
            and tuple(self.graph_norms) == tuple(other.graph_norms)
        )


@dataclass(frozen=True)
class QuotientMatrices:
    """The d x d forms ``X L X^T`` of the three graphs and the pencil ``(A, B)``."""

    G: np.ndarray
    S: np.ndarray
    D: np.ndarray
    A: np.ndarray
    B: np.ndarray
    X: np.ndarray
    W_g: graphs.SparseGraph
    W_s: graphs.SparseGraph
    W_d: graphs.SparseGraph
    norms: tuple


def _gram(X: np.ndarray, L) -> np.ndarray:
    M = X @ (L @ X.T)
    return (M + M.T) / 2


def quotient_matrices(ds: MultiDomainDataset, mu: float, k: int) -> QuotientMatrices:
    """Graphs, Laplacians and quotient matrices for already-preprocessed data."""
    for dom in ds.domains:
        if dom.n_samples < k + 1:
            raise DataError(f"domain {dom.id!r} has {dom.n_samples} samples; kNN with k={k} needs at least {k + 1}")
    ds.check_class_coverage()
    per_domain = [graphs.knn_graph(dom.features, k, name=f"W_g[{dom.id}]") for dom in ds.domains]
    W_g = graphs.block_diag_graphs(per_domain)
    W_s, W_d = graphs.class_graphs(ds)
    norms = tuple(g.frobenius() for g in (W_g, W_s, W_d))
    W_g, W_s, W_d = graphs.frobenius_rescale([W_g, W_s, W_d])
    X = assemble_block_diagonal(ds)
    G = _gram(X, graphs.laplacian(W_g))
    S = _gram(X, graphs.laplacian(W_s))
    D = _gram(X, graphs.laplacian(W_d))
    A = mu * G + S
    return QuotientMatrices(G, S, D, A, D, X, W_g, W_s, W_d, norms)


def projector_from_eigen(eigenvalues: np.ndarray, eigenvectors: np.ndarray) -> np.ndarray:
    """Scale eigenvector columns by ``sqrt(lam)``, negative eigenvalues clamped to 0."""
    return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def fit(ds: MultiDomainDataset, params: AlignmentParams = AlignmentParams()) -> AlignmentModel:
    """Learn the joint projector from labeled and unlabeled training samples."""
    ds_std, stats = standardize(ds, params.standardize)
    q = quotient_matrices(ds_std, params.mu, params.k)
    sol = solve_generalized(q.A, q.B, params.ridge)
    if sol.ridge > 0:
        log.info("dissimilarity form is singular; used ridge %.3g", sol.ridge)
    d = ds.dim
    dims = params.dims if params.dims is not None else d
    if dims > d:
        raise ParameterError(f"dims={dims} exceeds the latent dimension {d}")
    return AlignmentModel(
        eigenvalues=sol.eigenvalues,
        F=projector_from_eigen(sol.eigenvalues, sol.eigenvectors),
        domain_ids=tuple(ds.ids),
        domain_dims=tuple(ds.dims),
        standardization=tuple(stats),
        params=params,
        dims=dims,
        ridge_used=sol.ridge,
        graph_norms=q.norms,
    )


def project(model: AlignmentModel, domain_id, X, dims: Optional[int] = None) -> np.ndarray:
    """Latent coordinates ``f^m.T @ X`` (first ``dims`` rows) of samples from one domain."""
    m = model.index(domain_id)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != model.domain_dims[m]:
        raise DataError(f"domain {domain_id!r} expects {model.domain_dims[m]} features per sample, got shape {X.shape}")
    r = model.dims if dims is None else int(dims)
    if not 1 <= r <= model.dim:
        raise ParameterError(f"dims must lie in 1..{model.dim}, got {r}")
    Z = model.block(domain_id).T @ model.standardization[m].apply(X)
    return Z[:r]


def synthesize(model: AlignmentModel, src, dst, X) -> np.ndarray:
    """Map samples of domain ``src`` into the feature space of ``dst`` through the latent space."""
    latent = project(model, src, X, dims=model.dim)
    f_dst = model.block(dst).T
    if np.linalg.norm(f_dst, 2) <= np.finfo(float).tiny:
        raise NumericalError(f"projector of domain {dst!r} is numerically zero; cannot invert")
    back = np.linalg.pinv(f_dst, rcond=PINV_RCOND) @ latent
    return model.standardization[model.index(dst)].invert(back)


def labeled_latent(model: AlignmentModel, ds: MultiDomainDataset, dims: Optional[int] = None):
    """Pooled latent coordinates ``(r, n_labeled)`` and labels of every labeled sample."""
    r = model.dim if dims is None else dims
    Z, y = [], []
    for dom in ds.domains:
        if dom.n_labeled:
            Z.append(project(model, dom.id, dom.features[:, dom.labeled], r))
            y.append(dom.labels[dom.labeled])
    if not Z:
        raise DataError("dataset has no labeled samples")
    return np.hstack(Z), np.concatenate(y)


@dataclass(frozen=True)
class DimSelection:
    dims: int
    scores: np.ndarray  # cross-validated kappa for r = 1..d


def select_dims(
    model: AlignmentModel,
    Z: np.ndarray,
    y: np.ndarray,
    classifier_factory: Optional[Callable] = None,
    folds: int = 5,
    seed: int = 0,
) -> DimSelection:
    """Cross-validate the latent dimension on labeled latent samples.

    ``Z`` holds the full ``(d, n)`` latent coordinates. Every ``r`` in
    ``1..d`` is scored by the kappa of out-of-fold predictions; the smallest
    ``r`` within ``DIMS_TOLERANCE`` of the best score wins.
    """
    from .evaluate import LinearClassifier, kappa_score

    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y)
    if Z.shape[0] != model.dim:
        raise DataError(f"expected {model.dim} latent rows, got {Z.shape[0]}")
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise DataError("dimension selection needs at least 2 classes")
    if folds > counts.min():
        raise ParameterError(f"folds={folds} exceeds the smallest class count {counts.min()}")
    factory = classifier_factory or LinearClassifier
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed % 2**32)
    splits = list(splitter.split(Z.T, y))
    scores = np.empty(model.dim)
    for r in range(1, model.dim + 1):
        pred = np.empty_like(y)
        for tr, te in splits:
            clf = factory().fit(Z[:r, tr], y[tr])
            pred[te] = clf.predict(Z[:r, te])
        scores[r - 1] = kappa_score(y, pred, classes)
    best = int(np.flatnonzero(scores >= scores.max() - DIMS_TOLERANCE)[0]) + 1
    return DimSelection(best, scores)


def fit_and_select(
    ds: MultiDomainDataset,
    params: AlignmentParams = AlignmentParams(),
    classifier_factory: Optional[Callable] = None,
    folds: int = 5,
    seed: int = 0,
) -> AlignmentModel:
    """``fit`` followed by ``select_dims`` on the training labels unless ``params.dims`` is set."""
    model = fit(ds, params)
    if params.dims is not None:
        return model
    Z, y = labeled_latent(model, ds)
    return model.with_dims(select_dims(model, Z, y, classifier_factory, folds, seed).dims)
