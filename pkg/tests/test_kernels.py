"""Tests for kernel evaluation and Gram matrix construction."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qubosvm import KernelParams, kernel_eval, kernel_matrix


class TestKernelParams:
    def test_defaults(self):
        params = KernelParams()
        assert params.kind == "gaussian"
        assert params.gamma == 1.0

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown kernel kind"):
            KernelParams(kind="polynomial")

    @pytest.mark.parametrize("gamma", [0.0, -1.0, float("nan"), float("inf")])
    def test_gaussian_rejects_bad_gamma(self, gamma):
        with pytest.raises(ValueError, match="gamma must be positive"):
            KernelParams(kind="gaussian", gamma=gamma)

    def test_linear_ignores_gamma(self):
        # gamma is irrelevant for the dot product, so it is not validated
        params = KernelParams(kind="linear", gamma=-3.0)
        assert kernel_eval(params, [1.0, 2.0], [3.0, 4.0]) == 11.0


class TestKernelEval:
    def test_gaussian_known_values(self):
        params = KernelParams(kind="gaussian", gamma=1.0)
        assert kernel_eval(params, [0.0], [0.0]) == 1.0
        assert_allclose(kernel_eval(params, [0.0], [1.0]), np.exp(-1.0), rtol=0, atol=0)
        # gamma 0.9, squared distance 0.9 -> exp(-0.81)
        params = KernelParams(kind="gaussian", gamma=0.9)
        got = kernel_eval(params, [0.0, 0.0], [0.9, 0.3])
        assert_allclose(got, 0.4448580662229411, rtol=1e-15)

    def test_linear_is_dot_product(self):
        params = KernelParams(kind="linear")
        rng = np.random.default_rng(7)
        for _ in range(20):
            x = rng.normal(size=5)
            y = rng.normal(size=5)
            assert kernel_eval(params, x, y) == float(np.dot(x, y))

    def test_symmetry_exact(self):
        rng = np.random.default_rng(11)
        for kind in ("gaussian", "linear"):
            params = KernelParams(kind=kind, gamma=0.7)
            for _ in range(25):
                x = rng.normal(size=4)
                y = rng.normal(size=4)
                assert kernel_eval(params, x, y) == kernel_eval(params, y, x)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            kernel_eval(KernelParams(), [1.0, 2.0], [1.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            kernel_eval(KernelParams(), [np.nan], [0.0])


class TestKernelMatrix:
    def test_gaussian_diagonal_exactly_one(self):
        rng = np.random.default_rng(3)
        X = rng.normal(scale=100.0, size=(40, 6))
        G = kernel_matrix(KernelParams(gamma=0.05), X)
        assert np.array_equal(np.diag(G), np.ones(40))

    def test_gram_exactly_symmetric(self):
        rng = np.random.default_rng(5)
        for kind in ("gaussian", "linear"):
            X = rng.normal(size=(17, 4))
            G = kernel_matrix(KernelParams(kind=kind, gamma=0.4), X)
            assert np.array_equal(G, G.T)

    def test_matches_pairwise_eval(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(6, 3))
        Y = rng.normal(size=(4, 3))
        for kind in ("gaussian", "linear"):
            params = KernelParams(kind=kind, gamma=1.3)
            G = kernel_matrix(params, X, Y)
            assert G.shape == (6, 4)
            expected = np.array(
                [[kernel_eval(params, x, y) for y in Y] for x in X]
            )
            assert_allclose(G, expected, rtol=1e-12, atol=1e-15)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_gaussian_gram_positive_semidefinite(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(25, 5))
        G = kernel_matrix(KernelParams(gamma=0.8), X)
        eigs = np.linalg.eigvalsh(G)
        assert eigs.min() >= -1e-9

    def test_gaussian_values_in_unit_interval(self):
        rng = np.random.default_rng(21)
        X = rng.normal(size=(30, 4))
        G = kernel_matrix(KernelParams(gamma=2.0), X)
        assert np.all(G > 0)
        assert np.all(G <= 1.0)

    def test_linear_matches_dot_products(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(8, 3))
        G = kernel_matrix(KernelParams(kind="linear"), X)
        assert_allclose(G, X @ X.T, rtol=1e-14, atol=1e-14)

    def test_rejects_feature_mismatch(self):
        X = np.zeros((3, 2))
        Y = np.zeros((3, 4))
        with pytest.raises(ValueError, match="dimension mismatch"):
            kernel_matrix(KernelParams(), X, Y)

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError, match="2-d"):
            kernel_matrix(KernelParams(), np.zeros(4))
        with pytest.raises(ValueError, match="non-empty"):
            kernel_matrix(KernelParams(), np.zeros((0, 3)))

    def test_rejects_non_finite(self):
        X = np.array([[1.0, np.inf]])
        with pytest.raises(ValueError, match="non-finite"):
            kernel_matrix(KernelParams(), X)
