"""Dense symmetric-definite generalized eigensolver with a ridge ladder."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.linalg as sla

from .errors import DataError, SingularPencilError

# Ridge factors, relative to trace(B) / d, tried in order.
RIDGE_LADDER = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)

SYMMETRY_TOL = 1e-10
# Largest accepted condition number of the regularized right-hand matrix.
# B-orthonormality degrades roughly like cond * machine eps, so this keeps it
# near 1e-8.
MAX_CONDITION = 1e8


@dataclass(frozen=True)
class EigenSolution:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray
    ridge: float
    ladder: tuple

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


def _check_symmetric(M: np.ndarray, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DataError(f"{name} has non-finite entries")
    scale = max(np.abs(M).max(), np.finfo(float).tiny)
    asym = np.abs(M - M.T).max() / scale
    if asym > SYMMETRY_TOL:
        raise DataError(f"{name} is not symmetric (relative asymmetry {asym:.2e})")
    return (M + M.T) / 2


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive."""
    V = np.array(V, dtype=float)
    pivots = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivots, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def solve_generalized(A, B, ridge: Union[float, Sequence[float]] = RIDGE_LADDER) -> EigenSolution:
    """Solve ``A phi = lam (B + eps I) phi`` for all pairs, eigenvalues ascending.

    ``ridge`` holds relative ridge factors (a scalar is a one-rung ladder);
    the absolute ridge is ``factor * trace(B) / d``. The first rung whose
    regularized ``B`` is positive definite with condition number at most
    ``MAX_CONDITION`` is used. Eigenvectors are B-orthonormal.
    """
    A = _check_symmetric(A, "A")
    B = _check_symmetric(B, "B")
    if A.shape != B.shape:
        raise DataError(f"A {A.shape} and B {B.shape} differ in shape")
    d = A.shape[0]
    ladder = (float(ridge),) if np.isscalar(ridge) else tuple(float(r) for r in ridge)
    unit = np.trace(B) / d
    attempted = []
    for factor in ladder:
        eps = factor * unit
        attempted.append(eps)
        Be = B + eps * np.eye(d) if eps else B
        try:
            R = sla.cholesky(Be, lower=False)
        except sla.LinAlgError:
            continue
        if np.linalg.cond(Be) > MAX_CONDITION:
            continue
        break
    else:
        raise SingularPencilError(
            f"B + eps*I is not well-conditioned positive definite for any eps in {attempted}", tuple(attempted)
        )
    # C = R^-T A R^-1
    tmp = sla.solve_triangular(R, A, trans="T", lower=False)
    C = sla.solve_triangular(R, tmp.T, trans="T", lower=False).T
    C = (C + C.T) / 2
    lam, W = np.linalg.eigh(C)
    Phi = sla.solve_triangular(R, W, lower=False)
    Phi = fix_signs(Phi)
    res = np.linalg.norm(A @ Phi - (Be @ Phi) * lam, axis=0)
    return EigenSolution(lam, Phi, res, eps, tuple(attempted))
