"""Sparse NIPALS partial least squares for a univariate response."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateComponent, EmptySelection, InvalidInput, ZeroCovariance


@dataclass(frozen=True)
class SniplsModel:
    eta: float
    n_components: int
    coefficients: np.ndarray
    weighting_vectors: np.ndarray  # h x p
    scores: np.ndarray  # h x n
    y_loadings: np.ndarray

    @property
    def selected(self):
        return np.flatnonzero(self.coefficients)

    def predict(self, X):
        return np.asarray(X, dtype=float) @ self.coefficients


def soft_threshold_weights(z, eta):
    """Soft-threshold z at eta * max|z| and normalize to unit length."""
    if not 0.0 <= eta < 1.0:
        raise InvalidInput(f"eta must lie in [0, 1), got {eta}")
    z = np.asarray(z, dtype=float)
    zmax = np.abs(z).max() if z.size else 0.0
    if not zmax > 0.0:
        raise ZeroCovariance("X'y is zero; nothing to weight")
    w = np.sign(z) * np.maximum(np.abs(z) - eta * zmax, 0.0)
    norm = np.linalg.norm(w)
    if not norm > 0.0:
        raise EmptySelection(f"all weights thresholded to zero at eta={eta}")
    return w / norm


def snipls_fit(X, y, h=1, eta=0.0):
    """Fit SNIPLS with h components and sparsity eta on centered X.

    Each component soft-thresholds the covariance X'y of the deflated X.
    The coefficient vector lies in the span of the weighting vectors, so it
    is exactly zero outside the union of their supports.
    """
    X = np.array(X, dtype=float, copy=True)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if y.shape != (n,):
        raise InvalidInput("y must have one entry per row of X")
    if not np.any(y):
        raise InvalidInput("y must be nonzero")
    if h < 1 or int(h) != h:
        raise InvalidInput("h must be a positive integer")
    W = np.zeros((h, p))
    P = np.zeros((h, p))
    T = np.zeros((h, n))
    q = np.zeros(h)
    for k in range(h):
        w = soft_threshold_weights(X.T @ y, eta)
        t = X @ w
        tt = t @ t
        if not tt > 0.0:
            raise DegenerateComponent(f"component {k + 1} has a zero score vector")
        loading = X.T @ t / tt
        X -= np.outer(t, loading)
        W[k], P[k], T[k] = w, loading, t
        q[k] = (y @ t) / tt
    # b = W (P'W)^-1 q with P'W upper triangular
    R = np.linalg.solve(P @ W.T, q)
    coef = W.T @ R
    support = np.any(W != 0.0, axis=0)
    coef[~support] = 0.0
    return SniplsModel(float(eta), int(h), coef, W, T, q)
