"""Input validation helpers shared by the data loaders and estimators."""

from __future__ import annotations

import numpy as np

__all__ = ["as_feature_matrix", "as_binary_labels", "check_paired"]


def as_feature_matrix(X) -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite values")
    return X


def as_binary_labels(y) -> np.ndarray:
    """Coerce to an int array of -1/+1 labels; anything else is rejected."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"expected a 1-D label vector, got ndim={y.ndim}")
    out = np.empty(y.shape[0], dtype=np.int64)
    yf = y.astype(np.float64)
    if not np.all(np.isin(yf, (-1.0, 1.0))):
        bad = sorted(set(np.unique(yf)) - {-1.0, 1.0})
        raise ValueError(f"labels must be -1/+1, got values {bad}")
    out[:] = yf.astype(np.int64)
    return out


def check_paired(X: np.ndarray, y: np.ndarray) -> None:
    if X.shape[0] != y.shape[0]:
        raise ValueError(
            f"feature/label count mismatch: {X.shape[0]} vs {y.shape[0]}")
