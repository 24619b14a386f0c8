"""Exact Gaussian-process regression evaluated at a designated inducing set.

The explainers never see the training data directly: they consume the
posterior mean vector and covariance matrix at the inducing rows, so any
model producing that interface is interchangeable.  Here the posterior is
computed by exact Gaussian conditioning on the full training set and the
inducing rows are a subset of the training inputs, selected either
uniformly at random or by greedy farthest-point traversal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels, numerics
from .errors import CountOutOfRange
from .kernels import FeatureSubset, KernelParams


@dataclass(frozen=True)
class Dataset:
    """A regression dataset: features, targets, optional feature names."""

    X: np.ndarray
    y: np.ndarray
    feature_names: Optional[list[str]] = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y row counts differ")
        if X.shape[0] < 1:
            raise ValueError("dataset must contain at least one row")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite entries")
        if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
            raise ValueError("feature_names length does not match feature count")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class GPPosterior:
    """Posterior mean and covariance of a GP at its inducing rows."""

    inducing_points: np.ndarray
    mean_at_inducing: np.ndarray
    cov_at_inducing: np.ndarray
    kernel: KernelParams
    noise: float

    @property
    def n_inducing(self) -> int:
        return self.inducing_points.shape[0]

    @property
    def d(self) -> int:
        return self.inducing_points.shape[1]

    def to_json(self) -> str:
        doc = {
            "inducing_points": self.inducing_points.tolist(),
            "mean_at_inducing": self.mean_at_inducing.tolist(),
            "cov_at_inducing": self.cov_at_inducing.tolist(),
            "kernel": {
                "variance": self.kernel.variance,
                "lengthscales": self.kernel.lengthscales.tolist(),
            },
            "noise": self.noise,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GPPosterior":
        doc = json.loads(text)
        return cls(
            inducing_points=np.asarray(doc["inducing_points"], dtype=float),
            mean_at_inducing=np.asarray(doc["mean_at_inducing"], dtype=float),
            cov_at_inducing=np.asarray(doc["cov_at_inducing"], dtype=float),
            kernel=KernelParams(
                variance=float(doc["kernel"]["variance"]),
                lengthscales=np.asarray(doc["kernel"]["lengthscales"], dtype=float),
            ),
            noise=float(doc["noise"]),
        )


def select_inducing(data: Dataset, count: int, strategy: str = "all",
                    seed: int = 0) -> np.ndarray:
    """Pick inducing rows from the training set.

    ``all`` returns every index, ``uniform`` samples without replacement,
    ``farthest_point`` greedily maximizes the minimum Euclidean distance
    starting from the point nearest the data mean.
    """
    n = data.n
    if not (1 <= count <= n):
        raise CountOutOfRange(f"count must be in [1, {n}], got {count}")
    if strategy == "all":
        return np.arange(n)
    if strategy == "uniform":
        rng = np.random.default_rng(seed)
        return np.sort(rng.choice(n, size=count, replace=False))
    if strategy == "farthest_point":
        center = data.X.mean(axis=0)
        start = int(np.argmin(np.linalg.norm(data.X - center, axis=1)))
        chosen = [start]
        min_dist = np.linalg.norm(data.X - data.X[start], axis=1)
        while len(chosen) < count:
            nxt = int(np.argmax(min_dist))
            chosen.append(nxt)
            min_dist = np.minimum(min_dist, np.linalg.norm(data.X - data.X[nxt], axis=1))
        return np.array(chosen, dtype=int)
    raise ValueError(f"unknown strategy {strategy!r}")


def fit_exact(data: Dataset, kernel: KernelParams, noise: float,
              inducing: Optional[np.ndarray] = None) -> GPPosterior:
    """Exact GP regression, evaluated at the selected inducing rows.

    Posterior mean m(x) = k(x, X)(K + noise*I)^-1 y and covariance
    k(x, x') - k(x, X)(K + noise*I)^-1 k(X, x'), both restricted to the
    inducing rows.
    """
    if noise <= 0:
        raise ValueError("noise must be positive")
    full = FeatureSubset.full(data.d)
    if inducing is None:
        inducing = np.arange(data.n)
    inducing = np.asarray(inducing, dtype=int)
    Xi = data.X[inducing]

    K = kernels.gram(kernel, full, data.X, data.X)
    K_ix = kernels.gram(kernel, full, Xi, data.X)
    K_ii = kernels.gram(kernel, full, Xi, Xi)

    solve = numerics.solve_regularized
    alpha = solve(K, noise, data.y)
    mean = K_ix @ alpha
    cov = K_ii - K_ix @ solve(K, noise, K_ix.T)
    cov = numerics.symmetrize(cov)
    return GPPosterior(
        inducing_points=Xi,
        mean_at_inducing=mean,
        cov_at_inducing=cov,
        kernel=kernel,
        noise=float(noise),
    )


def log_marginal_likelihood(data: Dataset, kernel: KernelParams, noise: float) -> float:
    """Exact GP log marginal likelihood of the training targets."""
    full = FeatureSubset.full(data.d)
    K = kernels.gram(kernel, full, data.X, data.X)
    factor = numerics.cholesky_psd(K + noise * np.eye(data.n))
    alpha = factor.solve(data.y)
    return float(
        -0.5 * data.y @ alpha - 0.5 * factor.logdet() - 0.5 * data.n * np.log(2.0 * np.pi)
    )


def select_hyperparameters(
    data: Dataset, grid: Sequence[tuple[KernelParams, float]]
) -> tuple[KernelParams, float]:
    """Grid search maximizing the exact log marginal likelihood.

    Ties break toward the earliest grid position.
    """
    if not grid:
        raise ValueError("hyperparameter grid must be non-empty")
    best, best_ll = None, -np.inf
    for params, noise in grid:
        ll = log_marginal_likelihood(data, params, noise)
        if ll > best_ll:
            best, best_ll = (params, noise), ll
    return best


def default_grid(data: Dataset) -> list[tuple[KernelParams, float]]:
    """Median-heuristic lengthscale multiples crossed with a noise grid."""
    base = kernels.median_heuristic(data.X)
    var_y = float(np.var(data.y))
    if var_y <= 0.0:
        var_y = 1.0
    grid = []
    for mult in (0.25, 0.5, 1.0, 2.0, 4.0):
        params = KernelParams(variance=1.0, lengthscales=mult * base)
        for noise_frac in (1e-3, 1e-2, 1e-1, 1.0):
            grid.append((params, noise_frac * var_y))
    return grid
