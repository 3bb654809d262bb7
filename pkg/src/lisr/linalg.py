"""
Dense symmetric matrix kernels
------------------------------
Cholesky solves, low-rank inverse maintenance (generalized Sherman-Morrison)
and top-k diagonal selection. Every function is pure: inputs are never
modified in place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite, SingularCorrection

SINGULAR_RTOL = 1e-12


def symmetrize(A: np.ndarray) -> np.ndarray:
    """Return ``(A + A^T) / 2``; the result is exactly symmetric."""
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class DirectionSet:
    """A ``d x k`` block of update directions.

    When ``basis_indices`` is given the columns are the standard basis vectors
    ``e_j`` for ``j`` in ``basis_indices`` and ``columns`` is built from them.
    """

    dim: int
    columns: np.ndarray
    basis_indices: Optional[tuple] = None

    @classmethod
    def from_indices(cls, dim: int, indices: Sequence[int]) -> "DirectionSet":
        idx = tuple(int(i) for i in indices)
        cols = np.zeros((dim, len(idx)))
        cols[idx, np.arange(len(idx))] = 1.0
        return cls(dim, cols, idx)

    @classmethod
    def from_columns(cls, columns) -> "DirectionSet":
        cols = np.asarray(columns, dtype=float)
        if cols.ndim == 1:
            cols = cols[:, None]
        return cls(cols.shape[0], cols, None)

    @property
    def count(self) -> int:
        return self.columns.shape[1]

    def is_full_rank(self, rtol: float = SINGULAR_RTOL) -> bool:
        if self.basis_indices is not None:
            return len(set(self.basis_indices)) == len(self.basis_indices)
        s = np.linalg.svd(self.columns, compute_uv=False)
        return s.size > 0 and s[-1] > rtol * s[0]


def _as_columns(U) -> np.ndarray:
    if isinstance(U, DirectionSet):
        return U.columns
    U = np.asarray(U, dtype=float)
    return U[:, None] if U.ndim == 1 else U


def cholesky(A: np.ndarray):
    try:
        return scipy.linalg.cho_factor(A, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def spd_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive definite ``A``."""
    return scipy.linalg.cho_solve(cholesky(A), b)


def spd_inverse(A: np.ndarray) -> np.ndarray:
    inv = scipy.linalg.cho_solve(cholesky(A), np.eye(A.shape[0]))
    return symmetrize(inv)


def update_inverse(A_inv: np.ndarray, U, V, W) -> np.ndarray:
    """Inverse of ``A - U W^{-1} V^T`` given ``A^{-1}``.

    Computes ``A^{-1} + A^{-1} U (W - V^T A^{-1} U)^{-1} V^T A^{-1}`` in
    ``O(k d^2)``. With ``U = V`` (the only case the solvers use) the middle
    term is ``W - U^T A^{-1} V`` and the output is symmetrized.

    Raises :class:`SingularCorrection` when the middle matrix has relative
    smallest singular value below ``1e-12``.
    """
    U = _as_columns(U)
    V = _as_columns(V)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if not np.any(U) or not np.any(V):
        return A_inv.copy()
    AU = A_inv @ U
    VA = V.T @ A_inv
    middle = W - V.T @ AU
    s = np.linalg.svd(middle, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= SINGULAR_RTOL * s[0]:
        raise SingularCorrection(f"middle matrix singular values {s[0]:.3e}..{s[-1]:.3e}")
    out = A_inv + AU @ np.linalg.solve(middle, VA)
    if U is V or np.array_equal(U, V):
        out = symmetrize(out)
    return out


def top_k_diagonal(A: np.ndarray, k: int) -> DirectionSet:
    """Basis vectors for the ``k`` largest diagonal entries of ``A``.

    Ties go to the lowest index; indices come out sorted by descending
    diagonal value.
    """
    d = A.shape[0]
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in [1, {d}], got {k}")
    return DirectionSet.from_indices(d, top_k_indices(np.diag(A), k))


def top_k_indices(diag: np.ndarray, k: int) -> np.ndarray:
    # stable sort on the negated values keeps lower indices first among ties
    return np.argsort(-np.asarray(diag), kind="stable")[:k]
