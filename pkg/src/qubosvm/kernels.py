"""Kernel functions and Gram matrices.

The Gaussian kernel is the workhorse; the linear kernel is kept as a
debugging aid because its decision boundaries are easy to reason about.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KERNEL_KINDS = ("gaussian", "linear")


@dataclass(frozen=True)
class KernelParams:
    """Kernel choice plus its width parameter.

    Parameters
    ----------
    kind : {"gaussian", "linear"}
        ``gaussian`` is ``exp(-gamma * ||x - y||^2)``; ``linear`` is the
        plain dot product.
    gamma : float
        Width of the Gaussian kernel. Ignored by the linear kernel.
    """

    kind: str = "gaussian"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}, expected one of {KERNEL_KINDS}")
        if self.kind == "gaussian":
            if not (np.isfinite(self.gamma) and self.gamma > 0):
                raise ValueError(f"gamma must be positive and finite, got {self.gamma!r}")


def _as_matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def kernel_eval(params: KernelParams, x, y) -> float:
    """Evaluate the kernel on a single pair of vectors.

    Both vectors must have the same dimension. Symmetric by construction:
    the Gaussian path squares a difference vector and the linear path is a
    dot product, so swapping the arguments gives the identical float.
    """
    xv = np.asarray(x, dtype=float).ravel()
    yv = np.asarray(y, dtype=float).ravel()
    if xv.shape != yv.shape:
        raise ValueError(f"dimension mismatch: x has {xv.shape[0]} features, y has {yv.shape[0]}")
    if not (np.all(np.isfinite(xv)) and np.all(np.isfinite(yv))):
        raise ValueError("kernel inputs must be finite")
    if params.kind == "linear":
        return float(np.dot(xv, yv))
    d = xv - yv
    return float(np.exp(-params.gamma * np.dot(d, d)))


def kernel_matrix(params: KernelParams, X, Y=None) -> np.ndarray:
    """Kernel matrix between the rows of ``X`` and ``Y``.

    With ``Y=None`` this is the Gram matrix of ``X``: exactly symmetric,
    and for the Gaussian kernel its diagonal is exactly 1 because the
    distances are formed from explicit row differences (the diagonal
    difference is the zero vector, not a cancellation residue).

    Returns
    -------
    ndarray of shape (len(X), len(Y))
    """
    Xm = _as_matrix(X, "X")
    Ym = Xm if Y is None else _as_matrix(Y, "Y")
    if Xm.shape[1] != Ym.shape[1]:
        raise ValueError(
            f"dimension mismatch: X has {Xm.shape[1]} features, Y has {Ym.shape[1]}"
        )
    if params.kind == "linear":
        G = Xm @ Ym.T
        if Y is None:
            # mirror the upper triangle so the Gram matrix is exactly symmetric
            G = np.triu(G) + np.triu(G, 1).T
        return G
    diff = Xm[:, None, :] - Ym[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    return np.exp(-params.gamma * sq)
