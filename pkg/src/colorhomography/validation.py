"""Input checks shared by the functional solvers and the estimators."""
import numpy as np

from .exceptions import DegenerateSample


def check_triples(X, name="X", positive_sum=False, min_rows=1):
    """Return ``X`` as a float ``(n, 3)`` array or raise.

    With ``positive_sum`` every row must have a positive component sum,
    i.e. a defined chromaticity.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.shape == (3,):
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {X.shape}")
    if len(X) < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} rows, got {len(X)}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    if positive_sum:
        bad = np.flatnonzero(X.sum(axis=1) <= 0)
        if bad.size:
            raise DegenerateSample(f"{name} rows {bad.tolist()} have non-positive sum")
    return X


def check_correspondences(A, B, min_rows=1, positive_sum=True):
    A = check_triples(A, "A", positive_sum=positive_sum)
    B = check_triples(B, "B")
    if len(A) != len(B):
        raise ValueError(f"A and B row counts differ: {len(A)} vs {len(B)}")
    if len(A) < min_rows:
        raise ValueError(f"need at least {min_rows} correspondences, got {len(A)}")
    return A, B
