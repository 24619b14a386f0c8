"""Conditional-mean-embedding weights linking the GP posterior to the game.

For each coalition S and explained instance x, the weight vector
b(x, S) = (K_S + lambda*I)^-1 k_S(X_inducing, x) turns posterior values at
the inducing rows into the estimated conditional expectation of the model
given the features in S.  The per-coalition factorization is computed once
and shared across all explained instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels, numerics
from .coalition import CoalitionDesign, StochasticGame
from .errors import DesignMismatch
from .gp import GPPosterior
from .kernels import FeatureSubset


def default_lambda(n_inducing: int) -> float:
    """Regularizer scaled with the embedding sample size."""
    return 1e-3 * n_inducing


@dataclass(frozen=True)
class EmbeddingWeights:
    """Per-coalition CME weights, one column per explained instance."""

    coalition: FeatureSubset
    lam: float
    weights: np.ndarray  # n_inducing x n_instances


@dataclass(frozen=True)
class EmbeddingBatch:
    """Embedding weights for every coalition of a design, in design order."""

    design: CoalitionDesign
    X_explain: np.ndarray
    per_coalition: tuple[EmbeddingWeights, ...]
    lam: float

    @property
    def n_instances(self) -> int:
        return self.X_explain.shape[0]

    @property
    def n_inducing(self) -> int:
        return self.per_coalition[0].weights.shape[0]

    def tensor(self) -> np.ndarray:
        """Stacked weights, shape (n_coalitions, n_inducing, n_instances)."""
        return np.stack([w.weights for w in self.per_coalition])


def embedding_weights(posterior: GPPosterior, subset: FeatureSubset,
                      X_explain: np.ndarray, lam: float) -> EmbeddingWeights:
    """CME weight columns for one coalition at a batch of instances."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    X_explain = np.atleast_2d(np.asarray(X_explain, dtype=float))
    Xi = posterior.inducing_points
    K_s = kernels.gram(posterior.kernel, subset, Xi, Xi)
    k_sx = kernels.gram(posterior.kernel, subset, Xi, X_explain)
    factor = numerics.cholesky_psd(K_s + lam * np.eye(Xi.shape[0]))
    return EmbeddingWeights(coalition=subset, lam=lam, weights=factor.solve(k_sx))


def embedding_batch(posterior: GPPosterior, design: CoalitionDesign,
                    X_explain: np.ndarray, lam: float | None = None) -> EmbeddingBatch:
    """Embedding weights for every coalition in a design."""
    X_explain = np.atleast_2d(np.asarray(X_explain, dtype=float))
    if X_explain.shape[1] != design.d:
        raise DesignMismatch(
            f"instances have {X_explain.shape[1]} features, design expects {design.d}"
        )
    if posterior.d != design.d:
        raise DesignMismatch("posterior and design disagree on feature count")
    if lam is None:
        lam = default_lambda(posterior.n_inducing)
    per = tuple(
        embedding_weights(posterior, c, X_explain, lam) for c in design.coalitions
    )
    return EmbeddingBatch(design=design, X_explain=X_explain, per_coalition=per, lam=lam)


def game_moments(posterior: GPPosterior, batch: EmbeddingBatch) -> list[StochasticGame]:
    """Per-instance stochastic games: payoff means and covariances.

    payoff_mean[j] = b(x, S_j)^T m and payoff_cov[j, j'] =
    b(x, S_j)^T K b(x, S_j') with m, K the posterior moments at the
    inducing rows.
    """
    if batch.n_inducing != posterior.n_inducing:
        raise DesignMismatch("embedding batch and posterior disagree on inducing size")
    B = batch.tensor()                      # ell x n_I x n
    E = np.einsum("jik,i->jk", B, posterior.mean_at_inducing)
    games = []
    for k in range(batch.n_instances):
        Bk = B[:, :, k]
        cov = numerics.symmetrize(Bk @ posterior.cov_at_inducing @ Bk.T)
        games.append(
            StochasticGame(design=batch.design, payoff_mean=E[:, k], payoff_cov=cov)
        )
    return games
