"""Exploratory summaries of stochastic explanations.

Because each instance's attributions are jointly Gaussian, their absolute
values follow a folded Gaussian: global importance can either average the
folded-normal marginal means (uncertainty-aware) or the absolute values of
the means (uncertainty-blind).  The covariance additionally supports
correlation matrices and a partial-correlation graphical model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import numerics
from .explain import ExplanationBatch


@dataclass(frozen=True)
class GlobalImportance:
    """Uncertainty-aware vs uncertainty-blind global feature importance."""

    mean_abs_ssv: np.ndarray
    abs_mean_ssv: np.ndarray


def folded_mean(mu: float, sigma: float) -> float:
    """Mean of |N(mu, sigma^2)|; reduces to |mu| when sigma == 0."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0.0:
        return abs(mu)
    return float(
        sigma * np.sqrt(2.0 / np.pi) * np.exp(-mu * mu / (2.0 * sigma * sigma))
        + mu * (1.0 - 2.0 * stats.norm.cdf(-mu / sigma))
    )


def global_importance(batch: ExplanationBatch) -> GlobalImportance:
    """Average folded-normal means and absolute means across instances."""
    sds = batch.stds()
    folded = np.array(
        [
            [folded_mean(batch.means[k, i], sds[k, i]) for i in range(batch.d)]
            for k in range(batch.n_instances)
        ]
    )
    return GlobalImportance(
        mean_abs_ssv=folded.mean(axis=0),
        abs_mean_ssv=np.abs(batch.means).mean(axis=0),
    )


def correlation_matrix(cov: np.ndarray) -> np.ndarray:
    """Normalize a covariance to correlations; degenerate rows become isolated."""
    cov = np.asarray(cov, dtype=float)
    diag = np.diag(cov).copy()
    degenerate = diag < 1e-12
    safe = np.where(degenerate, 1.0, diag)
    corr = cov / np.sqrt(np.outer(safe, safe))
    corr[degenerate, :] = 0.0
    corr[:, degenerate] = 0.0
    np.fill_diagonal(corr, 1.0)
    return numerics.symmetrize(corr)


def precision_graph(cov: np.ndarray, sparsity: float = 0.9,
                    jitter: float = 1e-8) -> list[tuple[int, int, float]]:
    """Edges of the Gaussian graphical model after sparsity thresholding.

    Computes partial correlations from the (jittered) precision matrix and
    keeps the edges whose magnitude is nonzero and at least the sparsity
    quantile of all off-diagonal magnitudes; sparsity 0.9 keeps roughly the
    top 10 percent.
    """
    if not (0.0 <= sparsity < 1.0):
        raise ValueError("sparsity must lie in [0, 1)")
    cov = np.asarray(cov, dtype=float)
    d = cov.shape[0]
    P = numerics.cholesky_psd(cov + jitter * np.eye(d)).solve(np.eye(d))
    denom = np.sqrt(np.outer(np.diag(P), np.diag(P)))
    rho = -P / denom
    np.fill_diagonal(rho, 1.0)
    iu = np.triu_indices(d, k=1)
    mags = np.abs(rho[iu])
    if mags.size == 0:
        return []
    cutoff = float(np.quantile(mags, sparsity))
    edges = []
    for i, j, r in zip(iu[0], iu[1], rho[iu]):
        if abs(r) > 0.0 and abs(r) >= cutoff:
            edges.append((int(i), int(j), float(r)))
    return edges


def beeswarm_export(batch: ExplanationBatch, X_explain: np.ndarray) -> list[dict]:
    """Rows for a beeswarm-style plot, features ranked by mean span.

    Each row carries the instance, feature, mean, sd, raw feature value and
    its midpoint-convention quantile within the explained batch.  Rows are
    grouped by feature in decreasing order of (max - min) of the means.
    """
    X_explain = np.atleast_2d(np.asarray(X_explain, dtype=float))
    n, d = X_explain.shape
    if (n, d) != batch.means.shape:
        raise ValueError("explanation batch and instance matrix shapes disagree")
    names = batch.feature_names or [f"x_{i + 1}" for i in range(d)]
    sds = batch.stds()
    ranks = np.stack(
        [(stats.rankdata(X_explain[:, i]) - 0.5) / n for i in range(d)], axis=1
    )
    spans = batch.means.max(axis=0) - batch.means.min(axis=0)
    order = np.argsort(-spans, kind="stable")
    rows = []
    for rank_pos, i in enumerate(order):
        for k in range(n):
            rows.append(
                {
                    "instance": k,
                    "feature": names[i],
                    "feature_rank": rank_pos,
                    "mean": float(batch.means[k, i]),
                    "sd": float(sds[k, i]),
                    "feature_value": float(X_explain[k, i]),
                    "feature_value_quantile": float(ranks[k, i]),
                }
            )
    return rows
