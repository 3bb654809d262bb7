"""Separable quadratics ``f_i(x) = 0.5 <x, A_i x> + <b_i, x>`` with diagonal ``A_i``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InvalidDimension
from .base import ObjectiveOracle

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class QuadraticProblem:
    diagonals: np.ndarray  # (n, d): diagonal of each A_i
    b: np.ndarray  # (n, d)
    seed: int
    xi: float

    @property
    def n(self):
        return self.diagonals.shape[0]

    @property
    def d(self):
        return self.diagonals.shape[1]

    def minimizer(self) -> np.ndarray:
        # diagonal system: x* = -(sum A_i)^{-1} sum b_i
        return -self.b.sum(axis=0) / self.diagonals.sum(axis=0)

    def save(self, path):
        np.savez(path, version=SNAPSHOT_VERSION, diagonals=self.diagonals, b=self.b, seed=self.seed, xi=self.xi)

    @classmethod
    def load(cls, path) -> "QuadraticProblem":
        with np.load(Path(path)) as data:
            if int(data["version"]) != SNAPSHOT_VERSION:
                raise ValueError(f"unsupported snapshot version {int(data['version'])}")
            return cls(data["diagonals"].copy(), data["b"].copy(), int(data["seed"]), float(data["xi"]))


def generate_quadratic(n: int, d: int, xi: float, seed: int) -> QuadraticProblem:
    """Sample a random quadratic problem.

    The first ``ceil(d/2)`` diagonal entries of each ``A_i`` are uniform on
    ``[1, 10^{xi/2}]``, the rest uniform on ``[10^{-xi/2}, 1]``; entries of
    ``b_i`` are uniform on ``[0, 1000]``.

    Randomness comes from numpy's PCG64 generator. The seed is expanded with
    ``SeedSequence(seed).spawn(2)``: the first child stream draws the
    diagonals (row-major, upper block then lower block), the second draws ``b``.
    """
    if d < 2:
        raise InvalidDimension(f"need d >= 2, got {d}")
    if n < 1:
        raise InvalidDimension(f"need n >= 1, got {n}")
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi}")
    diag_ss, b_ss = np.random.SeedSequence(seed).spawn(2)
    rng_diag = np.random.Generator(np.random.PCG64(diag_ss))
    rng_b = np.random.Generator(np.random.PCG64(b_ss))
    half = math.ceil(d / 2)
    hi = 10.0 ** (xi / 2)
    upper = rng_diag.uniform(1.0, hi, size=(n, half))
    lower = rng_diag.uniform(1.0 / hi, 1.0, size=(n, d - half))
    diagonals = np.hstack([upper, lower])
    b = rng_b.uniform(0.0, 1e3, size=(n, d))
    return QuadraticProblem(diagonals, b, int(seed), float(xi))


class QuadraticOracle(ObjectiveOracle):
    def __init__(self, problem: QuadraticProblem):
        self.problem = problem
        self.n, self.d = problem.diagonals.shape
        self._diag = problem.diagonals
        self._b = problem.b
        self.mu = float(self._diag.min())
        self.L = float(self._diag.max())
        self.L_tilde = 0.0

    def value_i(self, i, x):
        return 0.5 * float(x @ (self._diag[i] * x)) + float(self._b[i] @ x)

    def grad_i(self, i, x):
        return self._diag[i] * x + self._b[i]

    def hess_i(self, i, x):
        return np.diag(self._diag[i])

    def hess_diag_i(self, i, x):
        return self._diag[i].copy()

    def hess_col_i(self, i, x, cols):
        scalar = np.ndim(cols) == 0
        idx = np.atleast_1d(cols)
        out = np.zeros((self.d, idx.size))
        out[idx, np.arange(idx.size)] = self._diag[i, idx]
        return out[:, 0] if scalar else out

    def value(self, x):
        return float(np.mean(0.5 * (self._diag * x) @ x + self._b @ x))

    def grad(self, x):
        return self._diag.mean(axis=0) * x + self._b.mean(axis=0)

    def hess(self, x):
        return np.diag(self._diag.mean(axis=0))

    def closed_form_minimizer(self):
        return self.problem.minimizer()


def quadratic_oracle(problem: QuadraticProblem) -> QuadraticOracle:
    return QuadraticOracle(problem)
