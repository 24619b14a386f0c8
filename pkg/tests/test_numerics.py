import numpy as np
import pytest

from ssvkit import numerics
from ssvkit.errors import JitterExceeded, NonFinite


class TestCholeskyPsd:
    def test_identity_needs_no_jitter(self):
        factor = numerics.cholesky_psd(np.eye(3))
        assert factor.jitter_used == 0.0
        np.testing.assert_allclose(factor.lower, np.eye(3))

    def test_zero_matrix_gets_first_jitter_level(self):
        factor = numerics.cholesky_psd(np.zeros((2, 2)), max_jitter=1e-6)
        assert factor.jitter_used == pytest.approx(1e-12)
        np.testing.assert_allclose(factor.lower, np.sqrt(1e-12) * np.eye(2))

    def test_hand_cholesky_2x2(self):
        factor = numerics.cholesky_psd(np.array([[4.0, 2.0], [2.0, 3.0]]))
        np.testing.assert_allclose(
            factor.lower, [[2.0, 0.0], [1.0, np.sqrt(2.0)]], atol=1e-12
        )

    def test_jitter_exceeded(self):
        m = np.array([[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(JitterExceeded):
            numerics.cholesky_psd(m, max_jitter=1e-6)

    def test_deterministic(self, rng):
        m = rng.normal(size=(5, 5))
        m = m @ m.T
        f1 = numerics.cholesky_psd(m)
        f2 = numerics.cholesky_psd(m)
        assert f1.jitter_used == f2.jitter_used
        np.testing.assert_array_equal(f1.lower, f2.lower)

    def test_reconstruction(self, rng):
        m = rng.normal(size=(6, 6))
        m = m @ m.T
        factor = numerics.cholesky_psd(m)
        rel = np.linalg.norm(factor.lower @ factor.lower.T - m) / np.linalg.norm(m)
        assert rel < 1e-8


class TestSolveRegularized:
    def test_zero_matrix_is_identity_solve(self):
        b = np.array([1.0, -2.0])
        np.testing.assert_allclose(
            numerics.solve_regularized(np.zeros((2, 2)), 1.0, b), b, atol=1e-10
        )

    def test_identity_halves(self):
        b = np.array([3.0, 4.0])
        np.testing.assert_allclose(
            numerics.solve_regularized(np.eye(2), 1.0, b), b / 2, atol=1e-12
        )

    def test_hand_2x2(self):
        # (m + 0.5 I)^-1 [1, 0]^T with m = [[2,1],[1,2]]: det = 5.25, so the
        # solution is [2.5, -1] / 5.25 = [10/21, -4/21]
        m = np.array([[2.0, 1.0], [1.0, 2.0]])
        x = numerics.solve_regularized(m, 0.5, np.array([1.0, 0.0]))
        np.testing.assert_allclose(x, [10.0 / 21.0, -4.0 / 21.0], atol=1e-12)

    def test_residual_and_symmetry(self, rng):
        m = rng.normal(size=(7, 7))
        m = m @ m.T
        inv = numerics.solve_regularized(m, 0.3, np.eye(7))
        assert np.max(np.abs(inv - inv.T)) < 1e-10
        np.testing.assert_allclose((m + 0.3 * np.eye(7)) @ inv, np.eye(7), atol=1e-8)


class TestConjugateGradient:
    def test_identity_one_iteration(self):
        b = np.array([1.0, 2.0, 3.0])
        x, ok = numerics.conjugate_gradient(np.eye(3), b, tol=1e-12, max_iter=1)
        assert ok
        np.testing.assert_allclose(x, b, atol=1e-12)

    def test_zero_rhs(self):
        x, ok = numerics.conjugate_gradient(np.eye(3), np.zeros(3))
        assert ok
        np.testing.assert_array_equal(x, np.zeros(3))

    def test_matches_direct_solve(self, rng):
        m = rng.normal(size=(4, 4))
        m = m @ m.T + 0.5 * np.eye(4)
        b = rng.normal(size=4)
        x, ok = numerics.conjugate_gradient(m, b, tol=1e-10, max_iter=100)
        assert ok
        direct = numerics.solve_regularized(m - 0.5 * np.eye(4), 0.5, b)
        np.testing.assert_allclose(x, direct, atol=1e-6)

    def test_agrees_within_10x_tol(self, rng):
        for _ in range(10):
            m = rng.normal(size=(8, 8))
            m = m @ m.T + np.eye(8)
            b = rng.normal(size=8)
            tol = 1e-8
            x, ok = numerics.conjugate_gradient(m, b, tol=tol, max_iter=200)
            assert ok
            direct = np.linalg.solve(m, b)
            assert np.linalg.norm(x - direct) <= 10 * tol * np.linalg.norm(b) + 1e-12

    def test_nonfinite_raises(self):
        m = np.array([[1.0, 0.0], [0.0, np.inf]])
        with np.errstate(invalid="ignore"):
            with pytest.raises((NonFinite, ValueError)):
                numerics.conjugate_gradient(m, np.array([1.0, 1.0]))
