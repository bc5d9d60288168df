"""Input validation helpers for the estimator API."""

from __future__ import annotations

import numpy as np


def check_distance_matrix(X, *, min_vertices: int = 4) -> np.ndarray:
    """Validate a precomputed symmetric integer distance matrix.

    Accepts anything array-like that is square, symmetric, finite,
    nonnegative, zero on the diagonal and integer valued; returns it as an
    int64 array.
    """
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square distance matrix, got shape {X.shape}")
    n = X.shape[0]
    if n < min_vertices:
        raise ValueError(f"need at least {min_vertices} vertices, got {n}")
    if not np.all(np.isfinite(X)):
        raise ValueError("distance matrix must be finite")
    if np.any(X < 0):
        raise ValueError("distances must be nonnegative")
    if np.any(np.diagonal(X) != 0):
        raise ValueError("distance matrix diagonal must be zero")
    if not np.array_equal(X, X.T):
        raise ValueError("distance matrix must be symmetric")
    as_int = X.astype(np.int64)
    if not np.array_equal(as_int, X):
        raise ValueError("distances must be integer valued (TSPLIB convention)")
    return as_int
