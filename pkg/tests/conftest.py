import numpy as np
import pytest

from ssvkit import gp, kernels


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_regression(rng, n=50, d=4, noise=0.1):
    """Smooth synthetic regression data."""
    X = rng.normal(size=(n, d))
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1] - 0.25 * X[:, 2] ** 2 + noise * rng.normal(size=n)
    return gp.Dataset(X=X, y=y)


def fit_synthetic_posterior(rng, n=50, d=4, n_inducing=30, noise=0.1):
    data = make_regression(rng, n=n, d=d)
    params = kernels.KernelParams(
        variance=1.0, lengthscales=kernels.median_heuristic(data.X)
    )
    idx = gp.select_inducing(data, n_inducing, "farthest_point", seed=0)
    return gp.fit_exact(data, params, noise, idx), data


def random_psd(rng, n, scale=1.0):
    M = rng.normal(size=(n, n))
    return scale * (M @ M.T) / n
