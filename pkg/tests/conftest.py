import numpy as np
import pytest


def random_spd(rng, d, cond=10.0):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eig = np.geomspace(1.0, cond, d)
    A = (Q * eig) @ Q.T
    return 0.5 * (A + A.T)


def random_psd_between(rng, A, eta):
    """Random G with A <= G <= eta * A."""
    d = A.shape[0]
    R = np.linalg.cholesky(A)
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    lam = 1.0 + (eta - 1.0) * rng.uniform(size=d)
    # G = R (Q diag(lam) Q^T) R^T has generalized eigenvalues lam in [1, eta]
    G = R @ ((Q * lam) @ Q.T) @ R.T
    return 0.5 * (G + G.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
