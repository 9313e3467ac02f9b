import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import subspace_angles

from conftest import pencil_oracle, random_spd
from ssma.eigen import RIDGE_LADDER, fix_signs, solve_generalized
from ssma.errors import DataError, SingularPencilError


def test_diagonal_pencil():
    sol = solve_generalized(np.diag([2.0, 1.0]), np.eye(2), ridge=0.0)
    np.testing.assert_array_equal(sol.eigenvalues, [1.0, 2.0])
    np.testing.assert_array_equal(sol.eigenvectors, [[0.0, 1.0], [1.0, 0.0]])
    assert sol.ridge == 0.0


def test_identical_pencil_has_unit_eigenvalues(rng):
    M = random_spd(rng, 7)
    sol = solve_generalized(M, M)
    np.testing.assert_allclose(sol.eigenvalues, 1.0, atol=1e-12)


def test_dense_oracle_d6(rng):
    A, B = random_spd(rng, 6), random_spd(rng, 6)
    np.testing.assert_allclose(solve_generalized(A, B).eigenvalues, pencil_oracle(A, B), atol=1e-8)


def _check_solution(A, B, sol):
    lam, Phi = sol.eigenvalues, sol.eigenvectors
    assert np.all(np.diff(lam) >= 0)
    np.testing.assert_allclose(Phi.T @ B @ Phi, np.eye(len(lam)), atol=1e-8)
    res = np.linalg.norm(A @ Phi - B @ Phi * lam, axis=0)
    assert np.all(res <= 1e-8 * (np.linalg.norm(A) + np.abs(lam) * np.linalg.norm(B)))


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 20), seed=st.integers(0, 2**32 - 1), indefinite=st.booleans())
def test_pencil_invariants(d, seed, indefinite):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, d)
    if indefinite:
        A = A - 1.5 * np.eye(d)
    B = random_spd(rng, d)
    sol = solve_generalized(A, B)
    _check_solution(A, B, sol)
    np.testing.assert_allclose(sol.eigenvalues, pencil_oracle(A, B), atol=1e-8 * max(1, np.abs(sol.eigenvalues).max()))
    # trace identity
    Phi, lam = sol.eigenvectors, sol.eigenvalues
    lhs = np.sum(lam * np.einsum("ij,ik,kj->j", Phi, B, Phi))
    np.testing.assert_allclose(lhs, np.trace(Phi.T @ A @ Phi), rtol=1e-9, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(d=st.integers(2, 12), seed=st.integers(0, 2**32 - 1), c=st.floats(0.01, 100))
def test_scale_equivariance(d, seed, c):
    rng = np.random.default_rng(seed)
    A, B = random_spd(rng, d), random_spd(rng, d)
    s1, s2 = solve_generalized(A, B), solve_generalized(c * A, B)
    np.testing.assert_allclose(s2.eigenvalues, c * s1.eigenvalues, rtol=1e-9, atol=1e-12)
    gaps = np.diff(s1.eigenvalues)
    for i in range(d):
        # well-separated eigenvalues only; directions inside a cluster are not unique
        near = [g for g in (gaps[i - 1] if i else np.inf, gaps[i] if i < d - 1 else np.inf)]
        if min(near) > 1e-3:
            ang = subspace_angles(s1.eigenvectors[:, [i]], s2.eigenvectors[:, [i]])
            assert ang.max() <= 1e-8


def test_signs_deterministic(rng):
    A, B = random_spd(rng, 9), random_spd(rng, 9)
    s1, s2 = solve_generalized(A, B), solve_generalized(A.copy(), B.copy())
    assert np.array_equal(s1.eigenvectors, s2.eigenvectors)
    V = s1.eigenvectors
    assert np.all(V[np.argmax(np.abs(V), axis=0), np.arange(9)] > 0)


def test_fix_signs():
    V = np.array([[1.0, -3.0], [-2.0, 1.0]])
    np.testing.assert_array_equal(fix_signs(V), [[-1.0, 3.0], [2.0, -1.0]])


def test_singular_B_uses_ridge(rng):
    G = rng.standard_normal((5, 2))
    B = G @ G.T  # rank 2
    A = random_spd(rng, 5)
    sol = solve_generalized(A, B)
    assert sol.ridge > 0
    unit = np.trace(B) / 5
    assert any(np.isclose(sol.ridge, f * unit) for f in RIDGE_LADDER[1:])
    Be = B + sol.ridge * np.eye(5)
    _check_solution(A, Be, sol)


def test_singular_B_without_ladder_fails():
    B = np.diag([1.0, 0.0])
    with pytest.raises(SingularPencilError) as exc:
        solve_generalized(np.eye(2), B, ridge=0.0)
    assert exc.value.ladder == (0.0,)


def test_asymmetric_input_rejected():
    A = np.array([[1.0, 0.1], [0.0, 1.0]])
    with pytest.raises(DataError, match="symmetric"):
        solve_generalized(A, np.eye(2))
    # round-off asymmetry within tolerance is accepted
    A = np.array([[1.0, 0.5], [0.5 + 1e-14, 1.0]])
    solve_generalized(A, np.eye(2))


def test_shape_mismatch():
    with pytest.raises(DataError):
        solve_generalized(np.eye(2), np.eye(3))
