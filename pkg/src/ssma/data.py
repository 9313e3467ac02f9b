"""Datasets, joint sample indexing and block-diagonal data assembly.

Features are stored column-per-sample: a domain with ``d_m`` features and
``n_m`` samples holds a ``(d_m, n_m)`` array. Labels are 1-based class ids;
unlabeled samples are tracked by the boolean ``labeled`` mask and never
carry a class id.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DataError, ParameterError


def derive_seed(seed: int, *coords) -> int:
    """Seed for one cell of an experiment: ``seed`` plus a stable hash of ``coords``."""
    digest = hashlib.blake2b(repr(tuple(coords)).encode(), digest_size=8).digest()
    return (int(seed) + int.from_bytes(digest, "little")) % 2**64


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _parse_labels(labels, n: int):
    """Return (values, mask) from a sequence that may contain ``None``."""
    if isinstance(labels, np.ma.MaskedArray):
        mask = ~np.ma.getmaskarray(labels)
        raw = np.asarray(labels.filled(0))
    else:
        seq = list(labels)
        mask = np.array([v is not None for v in seq], dtype=bool)
        raw = np.array([0 if v is None else v for v in seq])
    if raw.shape != (n,):
        raise DataError(f"labels vector has length {raw.size}, expected {n}")
    if raw.size and not np.all(np.equal(np.mod(raw[mask], 1), 0)):
        raise DataError("labels must be integers")
    values = raw.astype(np.int64)
    if np.any(values[mask] < 1):
        raise DataError("class ids are 1-based; use None for unlabeled samples")
    values[~mask] = 0
    return values, mask


@dataclass(frozen=True, eq=False)
class DomainDataset:
    """One domain: a ``(d_m, n_m)`` feature matrix with partially observed labels.

    ``labels`` accepts a sequence of ints with ``None`` marking unlabeled
    samples (or a masked array). After construction ``labels`` is an int
    array whose unlabeled positions are meaningless; always consult
    ``labeled``.
    """

    id: str
    features: np.ndarray
    labels: np.ndarray
    name: str = ""
    labeled: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim != 2:
            raise DataError(f"domain {self.id!r}: features must be a 2-D (d_m, n_m) array")
        d, n = X.shape
        if d < 1 or n < 1:
            raise DataError(f"domain {self.id!r}: empty feature matrix of shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DataError(f"domain {self.id!r}: features contain non-finite values")
        values, mask = _parse_labels(self.labels, n)
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(values))
        object.__setattr__(self, "labeled", _frozen(mask))
        if not self.name:
            object.__setattr__(self, "name", self.id)

    @classmethod
    def from_arrays(cls, id, features, labels, labeled, name=""):
        """Build from an int label array plus an explicit labeled mask."""
        labels = np.asarray(labels)
        labeled = np.asarray(labeled, dtype=bool)
        return cls(id, features, np.ma.masked_array(labels, mask=~labeled), name)

    @property
    def dim(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    @property
    def n_labeled(self) -> int:
        return int(self.labeled.sum())

    def label_list(self) -> list[Optional[int]]:
        return [int(v) if m else None for v, m in zip(self.labels, self.labeled)]

    def class_indices(self, c: int) -> np.ndarray:
        """Indices of the samples labeled with class ``c``, ascending."""
        return np.flatnonzero(self.labeled & (self.labels == c))

    def subset(self, idx, keep_labels=None) -> "DomainDataset":
        """Columns ``idx``; ``keep_labels`` (bool per selected column) hides labels."""
        idx = np.asarray(idx, dtype=int)
        mask = self.labeled[idx]
        if keep_labels is not None:
            mask = mask & np.asarray(keep_labels, dtype=bool)
        return DomainDataset.from_arrays(self.id, self.features[:, idx], self.labels[idx], mask, self.name)

    def with_features(self, features) -> "DomainDataset":
        return DomainDataset.from_arrays(self.id, features, self.labels, self.labeled, self.name)

    def __eq__(self, other):
        if not isinstance(other, DomainDataset):
            return NotImplemented
        return (
            self.id == other.id
            and self.name == other.name
            and self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labeled, other.labeled)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True, eq=False)
class MultiDomainDataset:
    """Ordered domains sharing the class set ``{1..class_count}``."""

    domains: tuple
    class_count: int
    joint_offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        domains = tuple(self.domains)
        if not domains:
            raise DataError("a dataset needs at least one domain")
        ids = [dom.id for dom in domains]
        if len(set(ids)) != len(ids):
            raise DataError(f"duplicate domain ids: {ids}")
        C = int(self.class_count)
        if C < 1:
            raise DataError("class_count must be >= 1")
        for dom in domains:
            present = dom.labels[dom.labeled]
            if present.size and present.max() > C:
                raise DataError(f"domain {dom.id!r} has label {present.max()} outside 1..{C}")
        sizes = [dom.n_samples for dom in domains]
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "class_count", C)
        object.__setattr__(self, "joint_offsets", _frozen(offsets))

    def __len__(self):
        return len(self.domains)

    def __iter__(self):
        return iter(self.domains)

    def __eq__(self, other):
        if not isinstance(other, MultiDomainDataset):
            return NotImplemented
        return self.class_count == other.class_count and self.domains == other.domains

    @property
    def ids(self) -> list[str]:
        return [dom.id for dom in self.domains]

    @property
    def dims(self) -> list[int]:
        return [dom.dim for dom in self.domains]

    @property
    def sizes(self) -> list[int]:
        return [dom.n_samples for dom in self.domains]

    @property
    def n_samples(self) -> int:
        return sum(self.sizes)

    @property
    def dim(self) -> int:
        return sum(self.dims)

    def index(self, domain_id) -> int:
        try:
            return self.ids.index(str(domain_id))
        except ValueError:
            raise DataError(f"unknown domain {domain_id!r}; known: {self.ids}") from None

    def domain(self, domain_id) -> DomainDataset:
        return self.domains[self.index(domain_id)]

    def joint_labels(self) -> np.ndarray:
        return np.concatenate([dom.labels for dom in self.domains])

    def joint_labeled(self) -> np.ndarray:
        return np.concatenate([dom.labeled for dom in self.domains])

    def joint_domain(self) -> np.ndarray:
        """Owning domain position for every joint sample index."""
        return np.repeat(np.arange(len(self.domains)), self.sizes)

    def replace(self, domains) -> "MultiDomainDataset":
        return MultiDomainDataset(tuple(domains), self.class_count)

    def check_class_coverage(self) -> None:
        """Every class in 1..C must be labeled somewhere."""
        seen = set(self.joint_labels()[self.joint_labeled()].tolist())
        missing = [c for c in range(1, self.class_count + 1) if c not in seen]
        if missing:
            raise DataError(f"classes {missing} have no labeled sample in any domain")


def assemble_block_diagonal(ds: MultiDomainDataset) -> np.ndarray:
    """The ``(d, N)`` block-diagonal joint data matrix."""
    return scipy.linalg.block_diag(*[np.asarray(dom.features) for dom in ds.domains])


def split_train_test(ds: MultiDomainDataset, test_fraction: float, seed: int):
    """Stratified per-domain, per-class hold-out of labeled samples.

    A class with ``n`` labeled samples in a domain sends ``floor(fraction*n)``
    of them (clamped to ``1..n-1``) to the test side. Unlabeled samples stay
    in train.
    """
    if not 0 < test_fraction < 1:
        raise ParameterError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    train, test = [], []
    for dom in ds.domains:
        if dom.n_labeled == 0:
            raise DataError(f"domain {dom.id!r} has no labeled samples to hold out")
        test_idx = []
        for c in range(1, ds.class_count + 1):
            idx = dom.class_indices(c)
            if idx.size == 0:
                continue
            if idx.size < 2:
                raise DataError(f"class {c} in domain {dom.id!r} has {idx.size} labeled sample; need >= 2 to split")
            rng = np.random.default_rng(derive_seed(seed, "split", dom.id, c))
            n_test = min(max(int(np.floor(test_fraction * idx.size)), 1), idx.size - 1)
            test_idx.append(rng.permutation(idx)[:n_test])
        test_idx = np.sort(np.concatenate(test_idx))
        keep = np.ones(dom.n_samples, dtype=bool)
        keep[test_idx] = False
        train.append(dom.subset(np.flatnonzero(keep)))
        test.append(dom.subset(test_idx))
    return ds.replace(train), ds.replace(test)


def subsample_labeled(ds: MultiDomainDataset, per_class_counts: Mapping[str, int], seed: int) -> MultiDomainDataset:
    """Keep exactly ``count`` labels per class in each listed domain.

    Draws are nested: for a fixed seed the samples kept at count ``c`` are a
    subset of those kept at any larger count. Domains absent from the map are
    left untouched. Samples are never dropped, only unlabeled.
    """
    unknown = set(map(str, per_class_counts)) - set(ds.ids)
    if unknown:
        raise DataError(f"unknown domains in per-class counts: {sorted(unknown)}")
    counts = {str(k): int(v) for k, v in per_class_counts.items()}
    shortfalls = []
    out = []
    for dom in ds.domains:
        if dom.id not in counts:
            out.append(dom)
            continue
        want = counts[dom.id]
        if want < 0:
            raise ParameterError(f"negative label count for domain {dom.id!r}")
        keep = np.zeros(dom.n_samples, dtype=bool)
        for c in range(1, ds.class_count + 1):
            idx = dom.class_indices(c)
            if want > idx.size:
                shortfalls.append(f"domain {dom.id!r} class {c}: requested {want}, available {idx.size}")
                continue
            rng = np.random.default_rng(derive_seed(seed, "subsample", dom.id, c))
            keep[rng.permutation(idx)[:want]] = True
        out.append(dom.subset(np.arange(dom.n_samples), keep_labels=keep))
    if shortfalls:
        raise DataError("insufficient labeled samples: " + "; ".join(shortfalls))
    return ds.replace(out)


@dataclass(frozen=True)
class Standardization:
    """Per-feature mean and scale of one domain (scale 1 for constant features)."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "Standardization":
        X = np.asarray(features, dtype=float)
        mean = X.mean(axis=1)
        scale = X.std(axis=1)
        scale[scale <= np.finfo(float).eps * np.maximum(1.0, np.abs(mean))] = 1.0
        return cls(_frozen(mean), _frozen(scale))

    @classmethod
    def identity(cls, dim: int) -> "Standardization":
        return cls(_frozen(np.zeros(dim)), _frozen(np.ones(dim)))

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean[:, None]) / self.scale[:, None]

    def invert(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.scale[:, None] + self.mean[:, None]


def standardize(ds: MultiDomainDataset, enabled: bool = True):
    """Standardize each domain with its own statistics.

    Returns the transformed dataset and the per-domain ``Standardization``
    list (identity transforms when ``enabled`` is false).
    """
    stats = [Standardization.fit(dom.features) if enabled else Standardization.identity(dom.dim) for dom in ds.domains]
    out = ds.replace(dom.with_features(st.apply(dom.features)) for dom, st in zip(ds.domains, stats))
    return out, stats
