"""
Hessian-estimator updates
-------------------------
Broyden-family updates of an estimator ``G`` toward a target ``A`` along a
direction ``u``, the block symmetric rank-k update, greedy direction
selection, and the trace-gap error measures.

All updates assume ``G >= A`` (Loewner order); this is not checked here.
"""

from __future__ import annotations

from typing import Tuple, Union

import numpy as np

from .errors import RankDeficientDirections, ZeroDirection
from .linalg import SINGULAR_RTOL, DirectionSet, symmetrize, top_k_diagonal

DEGENERATE_RTOL = 1e-12

BroydenParam = Union[float, str]


def _check_direction(u):
    u = np.asarray(u, dtype=float).ravel()
    if not np.any(u):
        raise ZeroDirection("update direction must be non-zero")
    return u


def _is_fixed_point(D, u):
    # G u == A u up to roundoff
    return np.linalg.norm(D @ u) <= DEGENERATE_RTOL * np.linalg.norm(D, 2) * np.linalg.norm(u)


def dfp_update(G, A, u):
    u = _check_direction(u)
    Au, Gu = A @ u, G @ u
    uAu, uGu = u @ Au, u @ Gu
    out = G - (np.outer(Au, Gu) + np.outer(Gu, Au)) / uAu + (uGu / uAu + 1.0) * np.outer(Au, Au) / uAu
    return symmetrize(out)


def bfgs_update(G, A, u):
    u = _check_direction(u)
    Au, Gu = A @ u, G @ u
    out = G - np.outer(Gu, Gu) / (u @ Gu) + np.outer(Au, Au) / (u @ Au)
    return symmetrize(out)


def _sr1_term(G, D, u):
    Du = D @ u
    denom = u @ Du
    if abs(denom) <= DEGENERATE_RTOL * np.linalg.norm(D, 2) * (u @ u):
        return None
    return symmetrize(G - np.outer(Du, Du) / denom)


def sr1_update(G, A, u):
    """Symmetric rank-1 update ``G - (G-A)uu^T(G-A) / u^T(G-A)u``.

    Returns ``G`` unchanged when the denominator is negligible.
    """
    u = _check_direction(u)
    out = _sr1_term(G, G - A, u)
    return G.copy() if out is None else out


def broyden_update(G, A, u, tau: BroydenParam):
    """Broyden family member blending the DFP (``tau=1``) and SR1 (``tau=0``) terms.

    ``tau`` may also be one of ``"DFP"``, ``"BFGS"``, ``"SR1"``; ``"BFGS"``
    resolves to ``tau = u^T A u / u^T G u``.
    """
    u = _check_direction(u)
    D = G - A
    if _is_fixed_point(D, u):
        return G.copy()
    if isinstance(tau, str):
        name = tau.upper()
        if name == "DFP":
            tau = 1.0
        elif name == "SR1":
            tau = 0.0
        elif name == "BFGS":
            tau = (u @ A @ u) / (u @ G @ u)
        else:
            raise ValueError(f"unknown Broyden selector {tau!r}")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    sr1 = _sr1_term(G, D, u)
    if sr1 is None:
        sr1 = G
    if tau == 0.0:
        return symmetrize(sr1)
    return symmetrize(tau * dfp_update(G, A, u) + (1.0 - tau) * sr1)


def srk_update(G, A, U):
    """Symmetric rank-k update ``G - (G-A)U (U^T(G-A)U)^+ U^T(G-A)``.

    The pseudoinverse drops singular values below ``1e-12`` relative to the
    largest. ``U`` may be a :class:`DirectionSet` or a ``d x k`` array.
    """
    if not isinstance(U, DirectionSet):
        U = DirectionSet.from_columns(U)
    if not U.is_full_rank():
        raise RankDeficientDirections("direction block is not of full column rank")
    D = G - A
    if U.basis_indices is not None:
        DU = D[:, list(U.basis_indices)]
    else:
        DU = D @ U.columns
    if np.linalg.norm(DU) <= DEGENERATE_RTOL * np.linalg.norm(D) * np.linalg.norm(U.columns):
        return G.copy()
    middle = symmetrize(U.columns.T @ DU)
    pinv = np.linalg.pinv(middle, rcond=SINGULAR_RTOL, hermitian=True)
    return symmetrize(G - DU @ pinv @ DU.T)


def gap_threshold(G, A) -> float:
    """Diagonal gaps at or below this value are treated as roundoff."""
    scale = max(np.max(np.abs(np.diag(G))), np.max(np.abs(np.diag(A))))
    return DEGENERATE_RTOL * scale


def greedy_direction(G, A) -> Tuple[np.ndarray, bool]:
    """Standard basis vector maximizing ``u^T (G-A) u``.

    Returns ``(u, exhausted)``. ``exhausted`` is set when every diagonal entry
    of ``G - A`` is non-positive up to roundoff, in which case ``u = e_1``.
    """
    gap = np.diag(G) - np.diag(A)
    j = int(np.argmax(gap))  # argmax returns the first maximizer
    exhausted = gap[j] <= gap_threshold(G, A)
    u = np.zeros(G.shape[0])
    u[0 if exhausted else j] = 1.0
    return u, bool(exhausted)


def greedy_directions_k(G, A, k: int) -> DirectionSet:
    return top_k_diagonal(G - A, k)


def tau_measure(G, A) -> float:
    return float(np.trace(G) - np.trace(A))


def nu_measure(G, A, mu: float, L: float) -> float:
    """``d * (L/mu) * tr(G-A) / tr(A)``; negative when ``G`` does not dominate ``A``."""
    d = A.shape[0]
    return d * (L / mu) * tau_measure(G, A) / float(np.trace(A))
