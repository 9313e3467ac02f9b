import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ssma.errors import ParameterError
from ssma.sampling import bisecting_kmeans


def total_sse(X, cs):
    return sum(np.sum((X[:, cs.assignment == c] - cs.points[:, [c]]) ** 2) for c in range(cs.size))


def test_single_cluster_is_mean(rng):
    X = rng.standard_normal((3, 40))
    cs = bisecting_kmeans(X, 1, seed=0)
    np.testing.assert_allclose(cs.points[:, 0], X.mean(axis=1), atol=1e-15)
    assert np.all(cs.assignment == 0)


def test_two_blobs_recover_means(rng):
    sd, n = 0.3, 200
    means = np.array([[0.0, 0.0], [10.0, 5.0]]).T
    X = np.hstack([means[:, [i]] + sd * rng.standard_normal((2, n)) for i in range(2)])
    cs = bisecting_kmeans(X, 2, seed=1)
    # oracle: per-blob sample means
    oracle = np.stack([X[:, :n].mean(axis=1), X[:, n:].mean(axis=1)], axis=1)
    order = np.argsort(cs.points[0])
    np.testing.assert_allclose(cs.points[:, order], oracle, atol=1e-12)
    assert np.all(np.abs(cs.points[:, order] - means) <= 3 * sd / np.sqrt(n))


def test_u_equals_n_singletons(rng):
    X = rng.standard_normal((2, 17))
    cs = bisecting_kmeans(X, 17, seed=3)
    assert sorted(cs.assignment.tolist()) == list(range(17))
    np.testing.assert_allclose(cs.points[:, cs.assignment], X, atol=0)


def test_duplicates_still_split():
    X = np.zeros((2, 6))
    X[:, 3:] = 1.0
    cs = bisecting_kmeans(X, 5, seed=0)
    assert cs.size == 5
    assert np.bincount(cs.assignment).min() >= 1


def test_bad_u():
    with pytest.raises(ParameterError):
        bisecting_kmeans(np.zeros((2, 3)), 4, seed=0)
    with pytest.raises(ParameterError):
        bisecting_kmeans(np.zeros((2, 3)), 0, seed=0)


def test_deterministic(rng):
    X = rng.standard_normal((4, 120))
    a, b = bisecting_kmeans(X, 15, seed=9), bisecting_kmeans(X, 15, seed=9)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.assignment, b.assignment)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 40), dim=st.integers(1, 3))
def test_count_consistency_and_monotone_sse(seed, n, dim):
    X = np.random.default_rng(seed).standard_normal((dim, n)).round(1)
    prev = np.inf
    for u in range(1, min(n, 8) + 1):
        cs = bisecting_kmeans(X, u, seed=seed)
        assert cs.size == u
        assert set(cs.assignment.tolist()) == set(range(u))
        for c in range(u):
            np.testing.assert_allclose(cs.points[:, c], X[:, cs.assignment == c].mean(axis=1), atol=1e-10)
        sse = total_sse(X, cs)
        assert sse <= prev + 1e-10
        prev = sse
