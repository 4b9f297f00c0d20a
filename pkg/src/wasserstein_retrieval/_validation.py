"""Input validation helpers used by the solvers and estimators."""

import numpy as np

from .exceptions import DataError

MARGINAL_SUM_TOL = 1e-9
PRUNE_BELOW = 1e-12


def check_weights(w, name="weights"):
    """Return ``w`` as a 1-d float array of strictly positive, finite entries."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise DataError(f"{name} must be a non-empty 1-d array, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise DataError(f"{name} contains non-finite values")
    if np.any(w < 0):
        raise DataError(f"{name} contains negative values")
    return w


def check_marginals(p, q, tol=MARGINAL_SUM_TOL):
    p = check_weights(p, "source weights")
    q = check_weights(q, "target weights")
    if abs(p.sum() - 1.0) > tol or abs(q.sum() - 1.0) > tol:
        raise DataError(
            f"infeasible marginals: sums are {p.sum():.17g} and {q.sum():.17g}, "
            f"both must equal 1 within {tol:g}"
        )
    return p, q


def check_cost_matrix(A, shape=None):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise DataError(f"cost matrix must be 2-d, got shape {A.shape}")
    if shape is not None and A.shape != tuple(shape):
        raise DataError(f"cost matrix has shape {A.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(A)):
        raise DataError("cost matrix contains non-finite values")
    if np.any(A < 0):
        raise DataError("cost matrix contains negative values")
    return A


def check_vectors(X, name="vectors"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError(f"{name} must be a non-empty 2-d array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{name} contains non-finite values")
    return X


def prune_support(w, threshold=PRUNE_BELOW):
    """Indices of entries carrying more than ``threshold`` mass."""
    return np.flatnonzero(w > threshold)
