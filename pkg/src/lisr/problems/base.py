from __future__ import annotations

from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from ..errors import MissingConstants


class ProblemConstants(NamedTuple):
    mu: float
    L: float
    L_tilde: Optional[float]
    kappa: float
    M: Optional[float]


class ObjectiveOracle:
    """Component-wise access to ``f(x) = (1/n) sum_i f_i(x)``.

    Subclasses implement the per-component methods. Full-objective methods
    have naive defaults that loop over components; subclasses override them
    with vectorized versions. Oracles are immutable after construction.
    """

    n: int
    d: int
    mu: float
    L: float
    L_tilde: Optional[float] = None

    def value_i(self, i: int, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad_i(self, i: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess_i(self, i: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess_diag_i(self, i: int, x: np.ndarray) -> np.ndarray:
        return np.diag(self.hess_i(i, x)).copy()

    def hess_col_i(self, i: int, x: np.ndarray, cols: Union[int, Sequence[int]]) -> np.ndarray:
        """Columns ``cols`` of the i-th Hessian, shape ``(d,)`` or ``(d, len(cols))``."""
        return self.hess_i(i, x)[:, cols]

    def value(self, x):
        return sum(self.value_i(i, x) for i in range(self.n)) / self.n

    def grad(self, x):
        return sum(self.grad_i(i, x) for i in range(self.n)) / self.n

    def hess(self, x):
        return sum(self.hess_i(i, x) for i in range(self.n)) / self.n

    def closed_form_minimizer(self) -> Optional[np.ndarray]:
        return None


def problem_constants(oracle: ObjectiveOracle, require_lipschitz_hessian: bool = False) -> ProblemConstants:
    """Return ``(mu, L, L_tilde, kappa, M)`` with ``M = L_tilde * mu^{-3/2}``.

    ``L_tilde`` and ``M`` are ``None`` when the oracle cannot bound the Hessian
    Lipschitz constant, unless ``require_lipschitz_hessian`` is set, in which
    case :class:`MissingConstants` is raised.
    """
    mu, L = float(oracle.mu), float(oracle.L)
    if not (np.isfinite(mu) and mu > 0):
        raise MissingConstants(f"strong convexity constant must be positive, got {mu}")
    if not (np.isfinite(L) and L >= mu):
        raise MissingConstants(f"smoothness constant must be >= mu, got {L}")
    Lt = oracle.L_tilde
    if Lt is None:
        if require_lipschitz_hessian:
            raise MissingConstants("oracle has no Hessian Lipschitz bound; supply the scaling constants")
        return ProblemConstants(mu, L, None, L / mu, None)
    Lt = float(Lt)
    return ProblemConstants(mu, L, Lt, L / mu, Lt * mu ** -1.5)
