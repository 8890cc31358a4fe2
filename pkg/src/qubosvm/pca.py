"""Principal component reduction with a deterministic sign convention."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted


class PcaReducer(TransformerMixin, BaseEstimator):
    """Project features onto the top principal components of the training set.

    The covariance matrix uses the 1/(N-1) normalization. Components are
    ordered by descending eigenvalue and each is sign-fixed so that its
    largest-magnitude entry is non-negative, making the decomposition
    deterministic for a given input.

    Parameters
    ----------
    n_components : int, default=2
        Number of components to keep; must be between 1 and the feature
        dimension.
    standardize : bool, default=False
        If True, scale each centered column by its sample standard deviation
        before the eigendecomposition (constant columns are left unscaled).
        Default is centering only.

    Attributes
    ----------
    mean_ : ndarray of shape (dim,)
        Per-column mean of the fitted data.
    scale_ : ndarray of shape (dim,)
        Per-column divisor applied after centering (all ones unless
        ``standardize``).
    components_ : ndarray of shape (n_components, dim)
        Orthonormal component rows.
    explained_variance_ : ndarray of shape (n_components,)
        Eigenvalues of the kept components, non-increasing.
    """

    def __init__(self, n_components: int = 2, standardize: bool = False):
        self.n_components = n_components
        self.standardize = standardize

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        n, dim = X.shape
        if not (1 <= self.n_components <= dim):
            raise ValueError(
                f"n_components must be between 1 and the feature dimension {dim}, "
                f"got {self.n_components}"
            )
        if n < 2:
            raise ValueError("need at least 2 points to fit principal components")

        mean = X.mean(axis=0)
        centered = X - mean
        if self.standardize:
            scale = centered.std(axis=0, ddof=1)
            scale = np.where(scale > 0, scale, 1.0)
        else:
            scale = np.ones(dim)
        centered = centered / scale

        cov = (centered.T @ centered) / (n - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1][: self.n_components]
        components = eigvecs[:, order].T.copy()
        for row in components:
            peak = np.argmax(np.abs(row))
            if row[peak] < 0:
                row *= -1.0

        self.mean_ = mean
        self.scale_ = scale
        self.components_ = components
        self.explained_variance_ = np.maximum(eigvals[order], 0.0)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=float)
        dim = self.components_.shape[1]
        if X.shape[1] != dim:
            raise ValueError(f"expected {dim} features, got {X.shape[1]}")
        return ((X - self.mean_) / self.scale_) @ self.components_.T

    def inverse_transform(self, Y) -> np.ndarray:
        """Map reduced rows back to the original feature space (lossless only
        when n_components equals the full dimension)."""
        check_is_fitted(self, "components_")
        Y = check_array(Y, dtype=float)
        k = self.components_.shape[0]
        if Y.shape[1] != k:
            raise ValueError(f"expected {k} components, got {Y.shape[1]}")
        return (Y @ self.components_) * self.scale_ + self.mean_
