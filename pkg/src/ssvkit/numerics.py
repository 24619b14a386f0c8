"""Dense symmetric linear algebra shared by every module.

All gram and covariance matrices in this package are symmetric and at
least positive semi-definite up to floating point noise, so every solve
routes through a jittered Cholesky factorization by default.  A plain
conjugate gradient is available as an opt-in path for large systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky

from .errors import JitterExceeded, NonFinite

INITIAL_JITTER = 1e-12
JITTER_GROWTH = 10.0
DEFAULT_MAX_JITTER = 1e-4


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor of a (possibly jittered) symmetric matrix."""

    lower: np.ndarray
    jitter_used: float

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve (L L^T) x = rhs."""
        return cho_solve((self.lower, True), rhs)

    def logdet(self) -> float:
        """Log-determinant of the factored matrix."""
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))


def cholesky_psd(m: np.ndarray, max_jitter: float = DEFAULT_MAX_JITTER) -> CholeskyFactor:
    """Cholesky-factor a symmetric PSD matrix, escalating diagonal jitter.

    Jitter starts at 1e-12 and grows by a factor of 10 until the
    factorization succeeds; the first attempt uses no jitter at all.

    Raises
    ------
    JitterExceeded
        If no factorization succeeds with jitter <= ``max_jitter``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")

    jitter = 0.0
    eye = np.eye(m.shape[0])
    while True:
        try:
            lower = cholesky(m + jitter * eye, lower=True)
            return CholeskyFactor(lower=lower, jitter_used=jitter)
        except np.linalg.LinAlgError:
            pass
        except Exception:
            # scipy raises LinAlgError too, but guard against dlascl issues
            pass
        jitter = INITIAL_JITTER if jitter == 0.0 else jitter * JITTER_GROWTH
        if jitter > max_jitter:
            raise JitterExceeded(
                f"Cholesky failed for {m.shape[0]}x{m.shape[0]} matrix at jitter cap {max_jitter:g}"
            )


def solve_regularized(m: np.ndarray, lam: float, rhs: np.ndarray,
                      max_jitter: float = DEFAULT_MAX_JITTER) -> np.ndarray:
    """Solve (m + lam*I) x = rhs through the jittered Cholesky path."""
    m = np.asarray(m, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != m.shape[0]:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, expected {m.shape[0]}")
    factor = cholesky_psd(m + lam * np.eye(m.shape[0]), max_jitter=max_jitter)
    return factor.solve(rhs)


def conjugate_gradient(m: np.ndarray, rhs: np.ndarray, tol: float = 1e-10,
                       max_iter: int = 1000) -> tuple[np.ndarray, bool]:
    """Plain conjugate gradient for SPD systems.

    Returns the best iterate together with a convergence flag; convergence
    means ``|m x - rhs| <= tol * |rhs|``.

    Raises
    ------
    NonFinite
        If the iterates diverge to non-finite values.
    """
    m = np.asarray(m, dtype=float)
    b = np.asarray(rhs, dtype=float)
    x = np.zeros_like(b)
    r = b - m @ x
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x, True
    p = r.copy()
    rs = float(r @ r)
    best_x, best_res = x.copy(), np.linalg.norm(r)
    for _ in range(max_iter):
        if best_res <= tol * bnorm:
            return best_x, True
        mp = m @ p
        denom = float(p @ mp)
        if denom <= 0.0:
            break  # lost positive definiteness; return best iterate
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * mp
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(r))):
            raise NonFinite("conjugate gradient iterates became non-finite")
        res = np.linalg.norm(r)
        if res < best_res:
            best_x, best_res = x.copy(), res
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return best_x, bool(best_res <= tol * bnorm)


def is_psd(m: np.ndarray, tol_jitter: float = 1e-8) -> bool:
    """True iff the jittered Cholesky succeeds with jitter <= ``tol_jitter``."""
    try:
        cholesky_psd(np.asarray(m, dtype=float), max_jitter=tol_jitter)
        return True
    except JitterExceeded:
        return False


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Average a matrix with its transpose so entries match exactly."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)
