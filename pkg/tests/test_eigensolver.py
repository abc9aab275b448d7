import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenpro.eigensolver import EigenSystem, exact_eigensystem, kernel_eigensystem, nsvd, rsvd
from eigenpro.errors import DegenerateInputError, InvalidInputError
from eigenpro.kernels import KernelSpec, kernel_matrix


def dense_top(H, k):
    return np.linalg.eigvalsh(H)[::-1][: k + 1]


def diag_design(M, d, diag):
    """M x d matrix whose covariance X^T X / M is diag(diag, 0, ...)."""
    X = np.zeros((M, d))
    for i, lam in enumerate(diag):
        X[i, i] = np.sqrt(lam * M)
    return X


class TestEigenSystem:
    def test_rejects_nonorthonormal(self):
        with pytest.raises(InvalidInputError):
            EigenSystem(np.array([[1.0], [1.0]]), np.array([1.0]), 0.5, 2)

    def test_rejects_unsorted(self):
        with pytest.raises(InvalidInputError):
            EigenSystem(np.eye(3)[:, :2], np.array([1.0, 2.0]), 0.5, 3)

    def test_rejects_nonpositive(self):
        with pytest.raises(DegenerateInputError):
            EigenSystem(np.eye(3)[:, :2], np.array([1.0, 0.0]), 0.0, 3)

    def test_rejects_tail_above(self):
        with pytest.raises(InvalidInputError):
            EigenSystem(np.eye(3)[:, :1], np.array([1.0]), 2.0, 3)

    def test_truncate(self):
        es = EigenSystem(np.eye(4)[:, :3], np.array([4.0, 3.0, 2.0]), 1.0, 4)
        t = es.truncate(1)
        assert t.k == 1 and t.tail == 3.0


class TestRsvd:
    def test_diagonal_covariance(self):
        X = diag_design(10, 6, (3.0, 2.0, 1.0))
        es = rsvd(X, 2, 10, seed=0)
        np.testing.assert_allclose(es.values, [3.0, 2.0], rtol=1e-10)
        assert es.tail == pytest.approx(1.0, rel=1e-10)
        np.testing.assert_allclose(np.abs(es.vectors), np.eye(6)[:, :2], atol=1e-10)

    def test_rank_one(self, rng):
        v = rng.standard_normal(7)
        X = np.tile(v, (12, 1))
        es = rsvd(X, 1, 12, seed=0)
        assert es.values[0] == pytest.approx(v @ v, rel=1e-12)
        assert es.tail == pytest.approx(0.0, abs=1e-10 * (v @ v))
        assert abs(es.vectors[:, 0] @ v) / np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_random_matches_dense(self, rng):
        X = rng.standard_normal((500, 50))
        es = rsvd(X, 10, 500, seed=0)
        ref = dense_top(X.T @ X / 500, 10)
        np.testing.assert_allclose(es.values, ref[:10], rtol=1e-6)
        assert es.tail == pytest.approx(ref[10], rel=1e-6)

    def test_orthonormal_and_sorted(self, rng):
        es = rsvd(rng.standard_normal((200, 30)), 12, 150, seed=4)
        np.testing.assert_allclose(es.vectors.T @ es.vectors, np.eye(12), atol=1e-8)
        assert np.all(np.diff(es.values) <= 0) and es.values[-1] >= es.tail

    def test_deterministic(self, rng):
        X = rng.standard_normal((100, 20))
        a, b = rsvd(X, 5, 60, seed=9), rsvd(X, 5, 60, seed=9)
        np.testing.assert_array_equal(a.vectors, b.vectors)
        np.testing.assert_array_equal(a.values, b.values)

    def test_too_large_k(self, rng):
        with pytest.raises(InvalidInputError):
            rsvd(rng.standard_normal((10, 5)), 5, 10)
        with pytest.raises(InvalidInputError):
            rsvd(rng.standard_normal((10, 5)), 2, 11)

    def test_zero_data(self):
        with pytest.raises(DegenerateInputError):
            rsvd(np.zeros((10, 5)), 2, 10)

    @given(c=st.floats(1e-3, 1e3))
    @settings(max_examples=15, deadline=None)
    def test_ratio_scale_invariance(self, c):
        X = np.random.default_rng(0).standard_normal((80, 12))
        a = rsvd(X, 4, 80, seed=1)
        b = rsvd(c * X, 4, 80, seed=1)
        np.testing.assert_allclose(a.tail / a.values, b.tail / b.values, rtol=1e-10)


class TestNsvd:
    def test_rank_one_matches_rsvd(self, rng):
        v = rng.standard_normal(5)
        X = np.tile(v, (9, 1))
        a, b = rsvd(X, 1, 9), nsvd(X, 1, 9)
        assert a.values[0] == pytest.approx(b.values[0], rel=1e-12)
        assert abs(a.vectors[:, 0] @ b.vectors[:, 0]) == pytest.approx(1.0, abs=1e-12)

    def test_full_subsample_matches_rsvd(self, rng):
        X = rng.standard_normal((300, 40))
        a, b = rsvd(X, 8, 300, seed=0), nsvd(X, 8, 300, seed=0)
        np.testing.assert_allclose(b.values, a.values, rtol=1e-6)

    def test_partial_subsample_close_to_rsvd(self, rng):
        X = rng.standard_normal((300, 40))
        a, b = rsvd(X, 8, 100, seed=3), nsvd(X, 8, 100, seed=3)
        np.testing.assert_allclose(b.values, a.values, rtol=0.05)

    def test_orthonormal(self, rng):
        es = nsvd(rng.standard_normal((120, 25)), 10, 60, seed=1)
        np.testing.assert_allclose(es.vectors.T @ es.vectors, np.eye(10), atol=1e-8)


class TestKernelEigensystem:
    def test_full_matches_dense(self, rng):
        X = rng.standard_normal((50, 3))
        spec = KernelSpec("gaussian", 1.0)
        es = kernel_eigensystem(spec, X, 10, 50, seed=0)
        ref = dense_top(kernel_matrix(spec, X) / 50, 10)
        np.testing.assert_allclose(es.values, ref[:10], rtol=0, atol=1e-6)
        assert es.tail == pytest.approx(ref[10], abs=1e-6)

    def test_duplicated_points(self):
        X = np.ones((20, 2))
        es = kernel_eigensystem(KernelSpec(), X, 1, 20)
        assert es.values[0] == pytest.approx(1.0, rel=1e-12)
        assert es.tail == pytest.approx(0.0, abs=1e-12)

    def test_subsampled_top_values(self):
        # points on the unit circle: the subsample estimate of each top
        # eigenvalue has low variance there (see the notes on seed spread)
        theta = np.random.default_rng(0).uniform(0, 2 * np.pi, 200)
        X = np.c_[np.cos(theta), np.sin(theta)]
        spec = KernelSpec("gaussian", 0.5)
        es = kernel_eigensystem(spec, X, 20, 100, seed=0)
        ref = dense_top(kernel_matrix(spec, X) / 200, 20)[:10]
        np.testing.assert_allclose(es.values[:10], ref, rtol=0.10)

    def test_nystrom_vectors_orthonormal(self, rng):
        es = kernel_eigensystem(KernelSpec("laplace", 1.0), rng.standard_normal((150, 3)), 15, 60)
        assert es.vectors.shape == (150, 15)
        np.testing.assert_allclose(es.vectors.T @ es.vectors, np.eye(15), atol=1e-8)

    def test_exact_eigensystem(self, rng):
        A = rng.standard_normal((10, 10))
        H = A @ A.T
        es = exact_eigensystem(H, 3)
        np.testing.assert_allclose(es.values, dense_top(H, 3)[:3], rtol=1e-12)
