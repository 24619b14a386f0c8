"""Matrix-valued explanation kernel and multi-output GP over explanations.

A GP prior on the underlying model induces, through conditional
expectations and the projection matrix A, a vector-valued GP prior over
the explanation function itself.  Fitting that prior to previously
computed explanations (from any SHAP-style source) yields predictive
explanations with uncertainty for unseen inputs, without access to the
underlying model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels, numerics
from .coalition import CoalitionDesign
from .kernels import KernelParams
from .numerics import CholeskyFactor

MAX_SYSTEM_SIZE = 4000


@dataclass(frozen=True)
class ExplanationDataset:
    """Inputs paired with their explanation vectors."""

    X: np.ndarray
    Phi: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Phi = np.atleast_2d(np.asarray(self.Phi, dtype=float))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Phi", Phi)
        if X.shape != Phi.shape:
            raise ValueError("X and Phi must have identical shapes")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Phi))):
            raise ValueError("explanation dataset contains non-finite entries")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class ShapleyPriorModel:
    """Fitted multi-output GP over explanation functions.

    ``alpha`` holds the dual coefficients in instance-major d-blocks:
    block a occupies entries [a*d, (a+1)*d).
    """

    anchors: np.ndarray
    kernel: KernelParams
    design: CoalitionDesign
    lam: float
    noise: float
    alpha: np.ndarray
    training_X: np.ndarray
    _gram_factor: Optional[CholeskyFactor] = None
    _anchor_gram: Optional[np.ndarray] = None
    _training_maps: Optional[tuple[np.ndarray, ...]] = None

    @property
    def n(self) -> int:
        return self.training_X.shape[0]

    @property
    def d(self) -> int:
        return self.design.d


def _embedding_map(anchors: np.ndarray, kernel: KernelParams,
                   design: CoalitionDesign, lam: float, x: np.ndarray) -> np.ndarray:
    """Projected embedding map M(x) = A B(x), shape d x n_anchors.

    Row products M(x) K M(x')^T realize the explanation kernel.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n_anchor = anchors.shape[0]
    B = np.empty((design.n_coalitions, n_anchor))
    eye = lam * np.eye(n_anchor)
    for j, subset in enumerate(design.coalitions):
        K_s = kernels.gram(kernel, subset, anchors, anchors)
        k_sx = kernels.gram(kernel, subset, anchors, x)
        B[j] = numerics.cholesky_psd(K_s + eye).solve(k_sx)[:, 0]
    return design.A @ B


def kappa(model: ShapleyPriorModel, x: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Matrix-valued explanation kernel between two inputs, shape d x d."""
    Mx = _embedding_map(model.anchors, model.kernel, model.design, model.lam, x)
    Mx2 = _embedding_map(model.anchors, model.kernel, model.design, model.lam, x2)
    K = _anchor_gram(model)
    return Mx @ K @ Mx2.T


def _anchor_gram(model: ShapleyPriorModel) -> np.ndarray:
    if model._anchor_gram is not None:
        return model._anchor_gram
    full = kernels.FeatureSubset.full(model.d)
    return kernels.gram(model.kernel, full, model.anchors, model.anchors)


def fit(data: ExplanationDataset, anchors: np.ndarray, kernel: KernelParams,
        design: CoalitionDesign, lam: float, noise: float) -> ShapleyPriorModel:
    """Fit the multi-output GP: solve (gram + noise*I) alpha = vec(Phi)."""
    if noise <= 0:
        raise ValueError("noise must be positive")
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    n, d = data.n, data.d
    if n * d > MAX_SYSTEM_SIZE:
        raise ValueError(
            f"system size n*d = {n * d} exceeds {MAX_SYSTEM_SIZE}; subsample the "
            "explanations before fitting"
        )
    full = kernels.FeatureSubset.full(d)
    K_anchor = kernels.gram(kernel, full, anchors, anchors)
    if n == 0:
        return ShapleyPriorModel(
            anchors=anchors, kernel=kernel, design=design, lam=lam, noise=noise,
            alpha=np.zeros(0), training_X=np.zeros((0, d)), _anchor_gram=K_anchor,
        )
    maps = [_embedding_map(anchors, kernel, design, lam, data.X[a]) for a in range(n)]
    big = np.empty((n * d, n * d))
    for a in range(n):
        rowa = maps[a] @ K_anchor
        for b in range(a, n):
            block = rowa @ maps[b].T
            big[a * d:(a + 1) * d, b * d:(b + 1) * d] = block
            if b != a:
                big[b * d:(b + 1) * d, a * d:(a + 1) * d] = block.T
    big = numerics.symmetrize(big)
    factor = numerics.cholesky_psd(big + noise * np.eye(n * d))
    alpha = factor.solve(data.Phi.reshape(-1))
    return ShapleyPriorModel(
        anchors=anchors, kernel=kernel, design=design, lam=lam, noise=noise,
        alpha=alpha, training_X=data.X, _gram_factor=factor, _anchor_gram=K_anchor,
        _training_maps=tuple(maps),
    )


def _training_map(model: ShapleyPriorModel, a: int) -> np.ndarray:
    if model._training_maps is not None:
        return model._training_maps[a]
    return _embedding_map(model.anchors, model.kernel, model.design, model.lam,
                          model.training_X[a])


def _cross_kernel(model: ShapleyPriorModel, x_new: np.ndarray) -> np.ndarray:
    """kappa(x_new, X_train) laid out as a d x (n*d) matrix."""
    Mx = _embedding_map(model.anchors, model.kernel, model.design, model.lam, x_new)
    K = _anchor_gram(model)
    d, n = model.d, model.n
    out = np.empty((d, n * d))
    left = Mx @ K
    for a in range(n):
        out[:, a * d:(a + 1) * d] = left @ _training_map(model, a).T
    return out


def predict(model: ShapleyPriorModel, x_new: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predictive mean and covariance of the explanation at a new input."""
    prior_cov = kappa(model, x_new, x_new)
    if model.n == 0:
        return np.zeros(model.d), prior_cov
    cross = _cross_kernel(model, x_new)
    mean = cross @ model.alpha
    solved = model._gram_factor.solve(cross.T)
    cov = numerics.symmetrize(prior_cov - cross @ solved)
    return mean, cov


def induced_payoff(model: ShapleyPriorModel, x_new: np.ndarray) -> np.ndarray:
    """Payoff vector whose projection under A is the predictive mean.

    v_tilde = B(x_new) K * sum_a B(x_a)^T A^T alpha_a, so
    A @ v_tilde == predict(model, x_new)[0].
    """
    n, d = model.n, model.d
    if n == 0:
        return np.zeros(model.design.n_coalitions)
    x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
    # raw (un-projected) embedding of x_new over coalitions
    anchors, kernel, design, lam = model.anchors, model.kernel, model.design, model.lam
    n_anchor = anchors.shape[0]
    B_new = np.empty((design.n_coalitions, n_anchor))
    eye = lam * np.eye(n_anchor)
    for j, subset in enumerate(design.coalitions):
        K_s = kernels.gram(kernel, subset, anchors, anchors)
        k_sx = kernels.gram(kernel, subset, anchors, x_new)
        B_new[j] = numerics.cholesky_psd(K_s + eye).solve(k_sx)[:, 0]
    K = _anchor_gram(model)
    acc = np.zeros(n_anchor)
    for a in range(n):
        acc += _training_map(model, a).T @ model.alpha[a * d:(a + 1) * d]
    return B_new @ K @ acc


def farthest_point_anchors(X: np.ndarray, count: int) -> np.ndarray:
    """Greedy farthest-point subset of X, for use as CME anchors."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    count = min(count, X.shape[0])
    center = X.mean(axis=0)
    start = int(np.argmin(np.linalg.norm(X - center, axis=1)))
    chosen = [start]
    min_dist = np.linalg.norm(X - X[start], axis=1)
    while len(chosen) < count:
        nxt = int(np.argmax(min_dist))
        chosen.append(nxt)
        min_dist = np.minimum(min_dist, np.linalg.norm(X - X[nxt], axis=1))
    return X[np.array(chosen, dtype=int)]
