"""Exception types raised across the package."""

import numpy as np


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Cholesky factorization met a non-positive pivot."""


class SingularCorrection(np.linalg.LinAlgError):
    """The k-by-k middle matrix of a low-rank inverse update is numerically singular."""


class ZeroDirection(ValueError):
    pass


class RankDeficientDirections(ValueError):
    pass


class InvalidDimension(ValueError):
    pass


class MissingConstants(ValueError):
    """An oracle cannot bound a constant that the caller needs."""


class NonConvergence(RuntimeError):
    pass


class ParseError(ValueError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class SolverError(RuntimeError):
    """Wraps a failure inside a solver run with the iteration it happened at."""

    def __init__(self, iteration, cause, method=None):
        self.iteration = iteration
        self.cause = cause
        self.method = method
        super().__init__(iteration, cause, method)

    def __str__(self):
        # method may be attached after construction by the harness
        prefix = f"{self.method}: " if self.method else ""
        return f"{prefix}iteration {self.iteration}: {self.cause}"
