"""L2-regularized binary logistic regression as a finite sum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import ObjectiveOracle

# max |l'''(m)| for l(m) = log(1 + exp(-m)); attained where s(m) = 1/2 -+ 1/(2 sqrt 3)
LOGISTIC_THIRD_DERIV_BOUND = 1.0 / (6.0 * math.sqrt(3.0))


def sigmoid(m):
    """Overflow-safe logistic sigmoid ``1 / (1 + exp(-m))``."""
    m = np.asarray(m, dtype=float)
    e = np.exp(-np.abs(m))
    return np.where(m >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def log1pexp(m):
    """``log(1 + exp(m))`` without overflow."""
    m = np.asarray(m, dtype=float)
    return np.maximum(m, 0.0) + np.log1p(np.exp(-np.abs(m)))


@dataclass(frozen=True)
class LogisticProblem:
    features: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,), values in {-1, +1}
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"regularization must be positive, got {self.lam}")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on n")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")


def synthetic_logistic(n: int, d: int, seed: int, lam: float, max_norm: float = 2.0) -> LogisticProblem:
    """Gaussian features rescaled so the largest row norm is ``max_norm``.

    Labels come from a random linear model with logistic noise, so the data
    is not separable. Uses numpy's PCG64 seeded directly with ``seed``.
    """
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, d))
    Z *= max_norm / np.linalg.norm(Z, axis=1).max()
    w = rng.standard_normal(d) * 2.0
    p = sigmoid(Z @ w)
    y = np.where(rng.uniform(size=n) < p, 1.0, -1.0)
    return LogisticProblem(Z, y, float(lam))


class LogisticOracle(ObjectiveOracle):
    """``f_i(x) = log(1 + exp(-y_i <x, z_i>)) + lam/2 ||x||^2``.

    Constants: ``mu = lam``, ``L = lam + max ||z_i||^2 / 4`` and
    ``L_tilde = max ||z_i||^3 / (6 sqrt 3)``.
    """

    def __init__(self, problem: LogisticProblem):
        self.problem = problem
        self._Z = np.ascontiguousarray(problem.features, dtype=float)
        self._y = np.asarray(problem.labels, dtype=float)
        self.lam = float(problem.lam)
        self.n, self.d = self._Z.shape
        sq = np.einsum("ij,ij->i", self._Z, self._Z)
        self._sqnorm = sq
        self.mu = self.lam
        self.L = self.lam + float(sq.max()) / 4.0
        self.L_tilde = float(sq.max()) ** 1.5 * LOGISTIC_THIRD_DERIV_BOUND

    def _curv(self, i, x):
        # l''(m) at m = y_i <x, z_i>
        s = sigmoid(self._y[i] * (self._Z[i] @ x))
        return s * (1.0 - s)

    def value_i(self, i, x):
        m = self._y[i] * (self._Z[i] @ x)
        return float(log1pexp(-m)) + 0.5 * self.lam * float(x @ x)

    def grad_i(self, i, x):
        y, z = self._y[i], self._Z[i]
        return -y * sigmoid(-y * (z @ x)) * z + self.lam * x

    def hess_i(self, i, x):
        z = self._Z[i]
        H = self._curv(i, x) * np.outer(z, z)
        H[np.diag_indices_from(H)] += self.lam
        return H

    def hess_diag_i(self, i, x):
        z = self._Z[i]
        return self._curv(i, x) * z * z + self.lam

    def hess_col_i(self, i, x, cols):
        z = self._Z[i]
        scalar = np.ndim(cols) == 0
        idx = np.atleast_1d(cols)
        out = self._curv(i, x) * np.outer(z, z[idx])
        out[idx, np.arange(idx.size)] += self.lam
        return out[:, 0] if scalar else out

    def value(self, x):
        m = self._y * (self._Z @ x)
        return float(np.mean(log1pexp(-m))) + 0.5 * self.lam * float(x @ x)

    def grad(self, x):
        m = self._y * (self._Z @ x)
        coef = -self._y * sigmoid(-m)
        return self._Z.T @ coef / self.n + self.lam * x

    def hess(self, x):
        s = sigmoid(self._y * (self._Z @ x))
        w = s * (1.0 - s)
        H = (self._Z * w[:, None]).T @ self._Z / self.n
        H[np.diag_indices_from(H)] += self.lam
        return 0.5 * (H + H.T)


def logistic_oracle(problem: LogisticProblem) -> LogisticOracle:
    return LogisticOracle(problem)
