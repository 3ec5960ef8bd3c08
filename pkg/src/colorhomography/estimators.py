"""scikit-learn compatible wrappers around the correction solvers.

``fit(X, y)`` takes camera RGBs ``X`` and reference XYZs ``y`` (both
``(n, 3)``); ``predict``/``transform`` apply the fitted matrix row-wise.

>>> from colorhomography import AlternatingLeastSquaresCorrection
>>> model = AlternatingLeastSquaresCorrection().fit(rgb, xyz)  # doctest: +SKIP
>>> model.predict(rgb_flat)  # doctest: +SKIP
"""
import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_is_fitted

from .colorimetry import WhitePoint
from .solvers import (
    AlsConfig,
    RansacConfig,
    apply_correction,
    solve_als,
    solve_least_squares,
    solve_ransac,
)
from .validation import check_triples


class _CorrectionMatrixMixin(RegressorMixin, TransformerMixin, BaseEstimator):
    def _fit_result(self, X, y):
        raise NotImplementedError

    def fit(self, X, y):
        X = check_triples(X, "X")
        y = check_triples(y, "y")
        result = self._fit_result(X, y)
        self.fit_result_ = result
        self.matrix_ = result.matrix
        self.n_features_in_ = 3
        return self

    def predict(self, X):
        check_is_fitted(self, "matrix_")
        return apply_correction(self.matrix_, check_triples(X, "X"))

    def transform(self, X):
        return self.predict(X)


class LeastSquaresCorrection(_CorrectionMatrixMixin):
    """Unconstrained 3x3 least-squares map (the shading-blind baseline)."""

    def _fit_result(self, X, y):
        return solve_least_squares(X, y)


class AlternatingLeastSquaresCorrection(_CorrectionMatrixMixin):
    """Shading-independent map by alternating per-row shading and matrix fits.

    Parameters
    ----------
    epsilon : float
        Stop when the Frobenius change of the fitted product falls below it.
    max_iters : int
        Iteration cap; hitting it raises a ``ConvergenceWarning``.

    Attributes
    ----------
    shading_ : ndarray of shape (n_samples,)
        Estimated per-row shading factors ``d`` with ``diag(d) X M ~ y``.
    """

    def __init__(self, epsilon=1e-10, max_iters=1000):
        self.epsilon = epsilon
        self.max_iters = max_iters

    def _fit_result(self, X, y):
        result = solve_als(X, y, AlsConfig(self.epsilon, self.max_iters))
        if not result.converged:
            warnings.warn(
                f"ALS stopped after {result.n_iter} iterations without reaching epsilon={self.epsilon}",
                ConvergenceWarning,
            )
        self.shading_ = result.shading
        self.n_iter_ = result.n_iter
        return result


class RansacHomographyCorrection(_CorrectionMatrixMixin):
    """Robust chromaticity-homography fit scored by shading-free ΔE*uv.

    Parameters
    ----------
    inlier_threshold : float
        ΔE*uv below which a patch joins the consensus set.
    max_trials : int
    min_consensus_fraction : float
        Stop early once this fraction of patches agree.
    random_state : int
        Non-negative integer seed; trial ``t`` uses a generator seeded by
        ``(random_state, t)``.
    white_point : str, triple or WhitePoint, optional
        Reference white for L*u*v*; D65 when omitted.
    """

    def __init__(self, inlier_threshold=2.0, max_trials=2000, min_consensus_fraction=0.8, random_state=0, white_point=None):
        self.inlier_threshold = inlier_threshold
        self.max_trials = max_trials
        self.min_consensus_fraction = min_consensus_fraction
        self.random_state = random_state
        self.white_point = white_point

    def _fit_result(self, X, y):
        if not isinstance(self.random_state, (int, np.integer)):
            raise ValueError("random_state must be an integer seed")
        cfg = RansacConfig(self.inlier_threshold, self.max_trials, self.min_consensus_fraction, int(self.random_state))
        result = solve_ransac(X, y, cfg, WhitePoint.from_value(self.white_point))
        self.inlier_mask_ = np.zeros(len(X), dtype=bool)
        self.inlier_mask_[result.inliers] = True
        self.n_trials_ = result.n_trials
        return result


METHODS = {
    "ls": LeastSquaresCorrection,
    "als": AlternatingLeastSquaresCorrection,
    "ransac": RansacHomographyCorrection,
}


def make_corrector(method, **params):
    try:
        cls = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
    return cls(**params)
