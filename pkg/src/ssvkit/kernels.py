"""ARD radial basis function kernel and its coalition-restricted variants.

A coalition of features induces a kernel on the corresponding sub-feature
space: distances are accumulated over the active features only.  The empty
coalition uses the empty-product convention k == 1, which makes the
conditional-mean-embedding weight for the empty coalition a plain average
and recovers the marginal expectation of the integrand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, TooFewPoints

MAX_MASK_WIDTH = 30


@dataclass(frozen=True)
class KernelParams:
    """Output scale and per-feature lengthscales of an ARD RBF kernel."""

    variance: float
    lengthscales: np.ndarray

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "lengthscales", ls)
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise ValueError("variance must be positive and finite")
        if not np.all(np.isfinite(ls)) or np.any(ls <= 0):
            raise ValueError("lengthscales must be positive and finite")

    @property
    def dim(self) -> int:
        return self.lengthscales.shape[0]


@dataclass(frozen=True)
class FeatureSubset:
    """A coalition of features encoded as a bitmask over ``d`` features."""

    mask: int
    d: int

    def __post_init__(self):
        if not (1 <= self.d <= MAX_MASK_WIDTH):
            raise ValueError(f"feature count must be in [1, {MAX_MASK_WIDTH}]")
        if not (0 <= self.mask < (1 << self.d)):
            raise ValueError("mask out of range for feature count")

    @classmethod
    def empty(cls, d: int) -> "FeatureSubset":
        return cls(0, d)

    @classmethod
    def full(cls, d: int) -> "FeatureSubset":
        return cls((1 << d) - 1, d)

    @classmethod
    def from_indices(cls, indices, d: int) -> "FeatureSubset":
        mask = 0
        for i in indices:
            mask |= 1 << int(i)
        return cls(mask, d)

    def indices(self) -> np.ndarray:
        return np.array([i for i in range(self.d) if self.mask >> i & 1], dtype=int)

    def size(self) -> int:
        return int(self.mask).bit_count()

    def contains(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def binary_vector(self) -> np.ndarray:
        return np.array([(self.mask >> i) & 1 for i in range(self.d)], dtype=float)


def gram(params: KernelParams, subset: FeatureSubset, A: np.ndarray,
         B: np.ndarray) -> np.ndarray:
    """Coalition-restricted ARD RBF gram matrix between rows of A and B.

    Entry (i, j) is ``variance * exp(-0.5 * sum_{u in subset}
    (A[i,u]-B[j,u])^2 / ls[u]^2)``; the empty coalition yields the all-ones
    matrix (times nothing: the output scale is deliberately dropped there so
    the empty-coalition weights reduce to a plain average).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != params.dim or B.shape[1] != params.dim:
        raise DimensionMismatch(
            f"inputs have {A.shape[1]}/{B.shape[1]} columns, kernel expects {params.dim}"
        )
    if subset.d != params.dim:
        raise DimensionMismatch("subset and kernel disagree on feature count")
    idx = subset.indices()
    if idx.size == 0:
        return np.ones((A.shape[0], B.shape[0]))
    As = A[:, idx] / params.lengthscales[idx]
    Bs = B[:, idx] / params.lengthscales[idx]
    sq = (
        np.sum(As**2, axis=1)[:, None]
        - 2.0 * As @ Bs.T
        + np.sum(Bs**2, axis=1)[None, :]
    )
    np.maximum(sq, 0.0, out=sq)
    return params.variance * np.exp(-0.5 * sq)


def median_heuristic(X: np.ndarray) -> np.ndarray:
    """Per-dimension median of pairwise absolute differences.

    Dimensions whose median distance is zero (constant or near-constant
    columns) fall back to a lengthscale of 1.0.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, d = X.shape
    if n < 2:
        raise TooFewPoints("median heuristic needs at least two points")
    iu = np.triu_indices(n, k=1)
    out = np.empty(d)
    for u in range(d):
        diffs = np.abs(X[iu[0], u] - X[iu[1], u])
        med = float(np.median(diffs))
        out[u] = med if med > 0.0 else 1.0
    return out
