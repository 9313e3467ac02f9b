"""Joint linear classification in the latent space, Cohen's kappa and experiment runs."""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import clarabel
import numpy as np
import scipy.sparse as sp
from sklearn.model_selection import StratifiedKFold

from .alignment import AlignmentParams, fit_and_select, project
from .data import DomainDataset, MultiDomainDataset, derive_seed, split_train_test, subsample_labeled
from .errors import ConfigError, DataError, NumericalError
from .eigen import RIDGE_LADDER
from .sampling import bisecting_kmeans

log = logging.getLogger(__name__)

DEFAULT_C_GRID = (100.0, 250.0, 500.0, 750.0, 1000.0)
METHODS = ("none", "ssma", "pca")
RESULT_COLUMNS = ("leading", "domain", "role", "budget", "method", "realization", "kappa", "accuracy", "dims")


# -- kappa ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts with rows = true class and columns = predicted class."""

    counts: np.ndarray
    classes: tuple = ()

    def __post_init__(self):
        cm = np.asarray(self.counts)
        if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
            raise DataError(f"confusion matrix must be square, got shape {cm.shape}")
        if cm.size and (np.any(cm < 0) or not np.all(np.equal(np.mod(cm, 1), 0))):
            raise DataError("confusion matrix entries must be nonnegative integers")
        object.__setattr__(self, "counts", cm.astype(np.int64))
        classes = tuple(self.classes) or tuple(range(1, cm.shape[0] + 1))
        if len(classes) != cm.shape[0]:
            raise DataError("one class name per row is required")
        object.__setattr__(self, "classes", classes)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total


def confusion_matrix(y_true, y_pred, classes: Optional[Sequence] = None) -> ConfusionMatrix:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if classes is None:
        classes = np.union1d(y_true, y_pred)
    classes = list(classes)
    pos = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true.tolist(), y_pred.tolist()):
        cm[pos[t], pos[p]] += 1
    return ConfusionMatrix(cm, tuple(classes))


def cohen_kappa(cm: ConfusionMatrix) -> float:
    """``(p_o - p_e) / (1 - p_e)``; 1 for the single-class perfect case."""
    counts = cm.counts.astype(float)
    total = counts.sum()
    if total <= 0:
        raise DataError("kappa of an empty confusion matrix is undefined")
    p_o = np.trace(counts) / total
    p_e = float(counts.sum(axis=1) @ counts.sum(axis=0)) / total**2
    if p_e == 1.0:
        return 1.0
    return float((p_o - p_e) / (1.0 - p_e))


def kappa_score(y_true, y_pred, classes=None) -> float:
    return cohen_kappa(confusion_matrix(y_true, y_pred, classes))


# -- classifier ----------------------------------------------------------------


def hinge_svm(X: np.ndarray, y: np.ndarray, C: float):
    """Exact binary soft-margin SVM in the primal; rows of ``X`` are samples, ``y`` is +-1.

    Solves ``min 1/2 |w|^2 + C sum(xi)`` subject to ``y_i (w.x_i + b) >= 1 - xi_i``
    and ``xi >= 0`` with the Clarabel interior-point solver. Returns ``(w, b)``.
    """
    n, r = X.shape
    P = sp.diags(np.r_[np.ones(r), np.zeros(1 + n)]).tocsc()
    q = np.r_[np.zeros(r + 1), np.full(n, float(C))]
    margin = -sp.hstack([sp.csr_matrix(y[:, None] * X), sp.csr_matrix(y[:, None]), sp.eye(n)])
    slack = sp.hstack([sp.csr_matrix((n, r + 1)), -sp.eye(n)])
    A = sp.vstack([margin, slack]).tocsc()
    b = np.r_[-np.ones(n), np.zeros(n)]
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    sol = clarabel.DefaultSolver(P, q, A, b, [clarabel.NonnegativeConeT(2 * n)], settings).solve()
    if str(sol.status) not in ("Solved", "AlmostSolved"):
        raise NumericalError(f"SVM quadratic program did not converge: {sol.status}")
    x = np.asarray(sol.x)
    return x[:r], float(x[r])


class LinearClassifier:
    """One-vs-rest L2-regularized hinge-loss linear classifier.

    Samples are columns. ``C`` is picked from ``c_grid`` by stratified k-fold
    kappa (ties to the smallest C). Features are standardized with training
    statistics before the solver sees them. Prediction ties go to the
    lowest class.
    """

    def __init__(self, c_grid: Sequence[float] = DEFAULT_C_GRID, folds: int = 5, seed: int = 0):
        self.c_grid = tuple(sorted(float(c) for c in c_grid))
        self.folds = folds
        self.seed = seed

    @staticmethod
    def _train(Z: np.ndarray, y: np.ndarray, classes: np.ndarray, C: float):
        """Weights ``(n_classes, r)`` and intercepts for rows-as-samples ``Z``."""
        fits = [hinge_svm(Z, np.where(y == c, 1.0, -1.0), C) for c in classes]
        return np.array([w for w, _ in fits]), np.array([b for _, b in fits])

    def _cv_score(self, Z, y, C, splits) -> float:
        pred = np.empty_like(y)
        for tr, te in splits:
            W, b = self._train(Z[tr], y[tr], self.classes_, C)
            pred[te] = self.classes_[np.argmax(Z[te] @ W.T + b, axis=1)]
        return kappa_score(y, pred, self.classes_)

    def fit(self, Z, y) -> "LinearClassifier":
        Z = np.asarray(Z, dtype=float).T
        y = np.asarray(y)
        self.classes_, counts = np.unique(y, return_counts=True)
        if self.classes_.size < 2:
            raise DataError("a classifier needs at least 2 classes in the training labels")
        self.mean_ = Z.mean(axis=0)
        scale = Z.std(axis=0)
        self.scale_ = np.where(scale > 0, scale, 1.0)
        Zs = (Z - self.mean_) / self.scale_
        folds = min(self.folds, int(counts.min()))
        if len(self.c_grid) > 1 and folds >= 2:
            splits = list(StratifiedKFold(folds, shuffle=True, random_state=self.seed % 2**32).split(Zs, y))
            self.cv_scores_ = np.array([self._cv_score(Zs, y, C, splits) for C in self.c_grid])
            self.C_ = self.c_grid[int(np.argmax(self.cv_scores_))]
        else:
            self.cv_scores_ = None
            self.C_ = self.c_grid[0]
        self.coef_, self.intercept_ = self._train(Zs, y, self.classes_, self.C_)
        return self

    def decision_function(self, Z) -> np.ndarray:
        """``(n, n_classes)`` one-vs-rest scores."""
        Zs = (np.asarray(Z, dtype=float).T - self.mean_) / self.scale_
        return Zs @ self.coef_.T + self.intercept_

    def predict(self, Z) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_function(Z), axis=1)]


def train_linear(Z, y, c_grid: Sequence[float] = DEFAULT_C_GRID, folds: int = 5, seed: int = 0) -> LinearClassifier:
    return LinearClassifier(c_grid, folds, seed).fit(Z, y)


# -- baselines -----------------------------------------------------------------


@dataclass(frozen=True)
class PCAProjector:
    """Per-domain principal components truncated to a common dimension."""

    means: dict
    components: dict  # domain id -> (d_m, q)

    @classmethod
    def fit(cls, ds: MultiDomainDataset, q: Optional[int] = None) -> "PCAProjector":
        q = min(ds.dims) if q is None else q
        means, comps = {}, {}
        for dom in ds.domains:
            mu = dom.features.mean(axis=1)
            U, _, _ = np.linalg.svd(dom.features - mu[:, None], full_matrices=False)
            U = U[:, :q]
            pivots = np.argmax(np.abs(U), axis=0)
            U = U * np.sign(U[pivots, np.arange(U.shape[1])])
            means[dom.id], comps[dom.id] = mu, U
        return cls(means, comps)

    def transform(self, domain_id, X) -> np.ndarray:
        return self.components[domain_id].T @ (np.asarray(X, dtype=float) - self.means[domain_id][:, None])


# -- experiments ---------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Everything ``run_experiment`` needs; JSON-serializable via ``to_dict``."""

    dataset: Optional[str] = None
    toy: Optional[dict] = None
    leading: Optional[list] = None
    leading_budget: int = 20
    budgets: list = field(default_factory=lambda: [0, 5, 10, 15, 20])
    unlabeled: int = 300
    methods: list = field(default_factory=lambda: ["none", "ssma"])
    realizations: int = 5
    seed: int = 0
    test_fraction: float = 0.5
    mu: float = 1.0
    k: int = 9
    dims: Optional[int] = None
    standardize: bool = True
    ridge: list = field(default_factory=lambda: list(RIDGE_LADDER))
    folds: int = 5
    c_grid: list = field(default_factory=lambda: list(DEFAULT_C_GRID))

    def __post_init__(self):
        problems = []
        if (self.dataset is None) == (self.toy is None):
            problems.append("dataset/toy: exactly one of 'dataset' (path) or 'toy' (recipe) must be given")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            problems.append(f"methods: unknown {bad}; choose from {list(METHODS)}")
        if any(int(b) != b or b < 0 for b in self.budgets) or not self.budgets:
            problems.append("budgets: need a non-empty list of nonnegative integers")
        if int(self.leading_budget) != self.leading_budget or self.leading_budget < 1:
            problems.append("leading_budget: must be a positive integer")
        if self.unlabeled < 0:
            problems.append("unlabeled: must be >= 0")
        if self.realizations < 1:
            problems.append("realizations: must be >= 1")
        if not 0 < self.test_fraction < 1:
            problems.append("test_fraction: must lie in (0, 1)")
        if self.mu < 0:
            problems.append("mu: must be >= 0")
        if self.k < 1:
            problems.append("k: must be >= 1")
        if self.dims is not None and self.dims < 1:
            problems.append("dims: must be >= 1 or null")
        if self.folds < 2:
            problems.append("folds: must be >= 2")
        if not self.c_grid or any(c <= 0 for c in self.c_grid):
            problems.append("c_grid: need positive values")
        if problems:
            raise ConfigError("invalid experiment config:\n  " + "\n  ".join(problems))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError(f"invalid experiment config:\n  unknown fields {extra}")
        return cls(**d)

    def alignment_params(self) -> AlignmentParams:
        return AlignmentParams(mu=self.mu, k=self.k, ridge=tuple(self.ridge), standardize=self.standardize, dims=self.dims)


@dataclass(frozen=True)
class ResultRow:
    leading: str
    domain: str
    role: str
    budget: int
    method: str
    realization: int
    kappa: float
    accuracy: float
    dims: int
    seconds: float = field(default=0.0, compare=False)


@dataclass
class ExperimentResult:
    rows: list

    def mean_kappa(self, method: str, role: Optional[str] = None, budget: Optional[int] = None, domain=None) -> float:
        vals = [
            r.kappa
            for r in self.rows
            if r.method == method
            and (role is None or r.role == role)
            and (budget is None or r.budget == budget)
            and (domain is None or r.domain == str(domain))
        ]
        if not vals:
            raise DataError(f"no results for method={method} role={role} budget={budget}")
        return float(np.mean(vals))

    def summary(self) -> list:
        """``(method, role, budget, mean kappa)`` for every cell, in first-seen order."""
        keys = list(dict.fromkeys((r.method, r.role, r.budget) for r in self.rows))
        return [(m, role, b, self.mean_kappa(m, role, b)) for m, role, b in keys]


def load_config_dataset(config: ExperimentConfig) -> MultiDomainDataset:
    if config.toy is not None:
        from .synth import toy_dataset

        return toy_dataset(**config.toy)
    from .io import read_dataset

    return read_dataset(config.dataset)


def _fit_set(lab: MultiDomainDataset, centroids: dict) -> MultiDomainDataset:
    """Labeled samples of every domain followed by that domain's unlabeled centroids."""
    out = []
    for dom in lab.domains:
        X = np.hstack([dom.features[:, dom.labeled], centroids[dom.id]])
        y = dom.labels[dom.labeled].tolist() + [None] * centroids[dom.id].shape[1]
        out.append(DomainDataset(dom.id, X, y, dom.name))
    return lab.replace(out)


def _run_method(method, fitset, config, seed):
    """Fit one method; returns ``(transform(domain_id, X), dims)``."""
    if method == "none":
        return (lambda dom_id, X: np.asarray(X, dtype=float)), fitset.dims[0]
    if method == "pca":
        pca = PCAProjector.fit(fitset)
        return pca.transform, min(fitset.dims)
    # dims are scored at a single C; the full C grid is searched afterwards at the chosen dims
    factory = lambda: LinearClassifier((min(config.c_grid),), config.folds, seed)  # noqa: E731
    model = fit_and_select(fitset, config.alignment_params(), factory, config.folds, seed)
    return (lambda dom_id, X: project(model, dom_id, X)), model.dims


def run_experiment(config: ExperimentConfig, ds: Optional[MultiDomainDataset] = None) -> ExperimentResult:
    """Labeled-budget sweep: for each realization and budget, fit every method,
    train one pooled classifier on the projected labeled samples and score the
    held-out samples of every domain.
    """
    if ds is None:
        ds = load_config_dataset(config)
    if "none" in config.methods and len(set(ds.dims)) > 1:
        raise ConfigError(f"method 'none' needs equal feature dimensions across domains, got {ds.dims}")
    leading_ids = [str(x) for x in (config.leading or [ds.ids[0]])]
    for lead in leading_ids:
        ds.index(lead)
    rows = []
    kmeans_cache = {}
    for rep in range(config.realizations):
        rep_seed = derive_seed(config.seed, "realization", rep)
        train, test = split_train_test(ds, config.test_fraction, rep_seed)
        for dom in train.domains:
            if config.unlabeled:
                cs = bisecting_kmeans(dom.features, config.unlabeled, derive_seed(rep_seed, "unlabeled", dom.id))
                kmeans_cache[dom.id] = cs.points
            else:
                kmeans_cache[dom.id] = np.zeros((dom.dim, 0))
        for lead in leading_ids:
            for budget in config.budgets:
                counts = {dom_id: (config.leading_budget if dom_id == lead else int(budget)) for dom_id in ds.ids}
                lab = subsample_labeled(train, counts, derive_seed(rep_seed, "labels"))
                fitset = _fit_set(lab, kmeans_cache)
                cell_seed = derive_seed(rep_seed, "cell", lead, budget) % 2**32
                for method in config.methods:
                    t0 = time.perf_counter()
                    transform, dims = _run_method(method, fitset, config, cell_seed)
                    Z = np.hstack([transform(d.id, d.features[:, d.labeled]) for d in fitset.domains])
                    y = np.concatenate([d.labels[d.labeled] for d in fitset.domains])
                    clf = train_linear(Z, y, config.c_grid, config.folds, cell_seed)
                    for dom in test.domains:
                        pred = clf.predict(transform(dom.id, dom.features))
                        cm = confusion_matrix(dom.labels, pred, range(1, ds.class_count + 1))
                        rows.append(
                            ResultRow(
                                leading=lead,
                                domain=dom.id,
                                role="source" if dom.id == lead else "target",
                                budget=int(budget),
                                method=method,
                                realization=rep,
                                kappa=cohen_kappa(cm),
                                accuracy=cm.accuracy(),
                                dims=int(dims),
                                seconds=time.perf_counter() - t0,
                            )
                        )
                    log.debug("rep %d lead %s budget %s %s done", rep, lead, budget, method)
    return ExperimentResult(rows)
