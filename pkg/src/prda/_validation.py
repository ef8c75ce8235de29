"""Input validation helpers used across modules."""

import numpy as np

from .exceptions import DataError, ShapeError


def check_matrix(X, name="X"):
    """Coerce to a contiguous float64 2-D array with finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional, got ndim={X.ndim}")
    if X.shape[1] == 0:
        raise ShapeError(f"{name} must have at least one column")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(X)


def check_vector(x, name="x"):
    """Coerce to a contiguous float64 1-D array with finite entries."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"{name} must be 1-dimensional, got ndim={x.ndim}")
    if not np.all(np.isfinite(x)):
        raise DataError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(x)


def check_labels(y, n_samples, name="y"):
    """Coerce to an int64 label vector of the expected length."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ShapeError(f"{name} must be 1-dimensional, got ndim={y.ndim}")
    if y.shape[0] != n_samples:
        raise ShapeError(
            f"{name} has {y.shape[0]} entries, expected {n_samples}"
        )
    if not np.issubdtype(y.dtype, np.integer):
        cast = y.astype(np.int64, copy=True)
        if not np.all(cast == y):
            raise DataError(f"{name} must contain integer labels")
        y = cast
    return np.ascontiguousarray(y, dtype=np.int64)
