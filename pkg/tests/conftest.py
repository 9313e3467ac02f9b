import numpy as np
import pytest

from ssma.data import DomainDataset, MultiDomainDataset

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# -- independent oracles --------------------------------------------------------


def brute_knn(points, k):
    """For every column, the k nearest other columns by an all-pairs sort (ties: lower index)."""
    P = np.asarray(points, dtype=float)
    n = P.shape[1]
    out = []
    for i in range(n):
        cand = []
        for j in range(n):
            if j != i:
                cand.append((float(np.sum((P[:, i] - P[:, j]) ** 2)), j))
        cand.sort()
        out.append([j for _, j in cand[:k]])
    return out


def brute_knn_adjacency(points, k):
    nbrs = brute_knn(points, k)
    n = len(nbrs)
    W = np.zeros((n, n))
    for i, row in enumerate(nbrs):
        for j in row:
            W[i, j] = W[j, i] = 1.0
    return W


def pair_sum(W, Y):
    """Literal sum over all ordered pairs of W_ij * ||y_i - y_j||^2 (columns of Y)."""
    W = np.asarray(W.toarray() if hasattr(W, "toarray") else W, dtype=float)
    Y = np.asarray(Y, dtype=float)
    diff = Y[:, :, None] - Y[:, None, :]
    return float(np.sum(W * np.sum(diff**2, axis=0)))


def random_spd(rng, d, jitter=0.5):
    G = rng.standard_normal((d, d))
    return G @ G.T / d + jitter * np.eye(d)


def pencil_oracle(A, B):
    """Eigenvalues of B^-1/2 A B^-1/2, via the eigendecomposition of B."""
    w, V = np.linalg.eigh(B)
    S = V @ np.diag(1 / np.sqrt(w)) @ V.T
    M = S @ A @ S
    return np.linalg.eigvalsh((M + M.T) / 2)


def random_dataset(rng, dims=(2, 1), n=20, classes=3, labeled_frac=0.6, shift=1.0):
    """Gaussian class blobs per domain with a random subset of labels hidden."""
    domains = []
    for m, d in enumerate(dims):
        y = rng.integers(1, classes + 1, size=n)
        y[:classes] = np.arange(1, classes + 1)
        centers = rng.standard_normal((d, classes)) * 2
        X = centers[:, y - 1] + 0.5 * rng.standard_normal((d, n)) + shift * m
        keep = rng.random(n) < labeled_frac
        keep[:classes] = True
        labels = [int(c) if kp else None for c, kp in zip(y, keep)]
        domains.append(DomainDataset(str(m + 1), X, labels))
    return MultiDomainDataset(tuple(domains), classes)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
