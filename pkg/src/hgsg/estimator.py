"""scikit-learn style front end for the adaptive sparse grid."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from hgsg.adaptive import AdaptiveConfig, run
from hgsg.interpolant import GridState


class HGSGInterpolator(RegressorMixin, BaseEstimator):
    """Locally and dimension adaptive sparse grid interpolant on ``[0, 1]**d``.

    Unlike data-driven estimators, ``fit`` takes the function itself and
    decides where to sample it.

    Parameters
    ----------
    epsilon : float, default=1e-6
        Tolerance on point and index indicators and on the global indicator.
    p_max : int, default=1
        Maximum degree of the local basis.
    indicator : {"absolute", "relative"}, default="absolute"
        Relative indicators divide by the root term ``|v_root * w_root|``.
    termination : {"modified", "classic"}, default="modified"
        Modified termination drops new indices whose error is below epsilon.
    max_points : int, default=2_000_000
        Stop with a capped status once this many points are stored.
    max_level : int, default=30
        Per-dimension level cap.
    vectorized : bool, default=False
        Call ``f`` once per new index on an ``(n, d)`` array.

    Attributes
    ----------
    state_ : GridState
    report_ : RefineReport
    n_features_in_ : int
    integral_ : float
        Integral of the interpolant over the unit cube.
    n_evaluations_ : int

    Examples
    --------
    >>> import numpy as np
    >>> from hgsg import HGSGInterpolator
    >>> est = HGSGInterpolator(epsilon=1e-8, p_max=2).fit(lambda x: x[0] ** 2, d=1)
    >>> round(est.integral_, 10)
    0.3333333333
    """

    def __init__(self, epsilon=1e-6, p_max=1, indicator="absolute", termination="modified",
                 max_points=2_000_000, max_level=30, vectorized=False):
        self.epsilon = epsilon
        self.p_max = p_max
        self.indicator = indicator
        self.termination = termination
        self.max_points = max_points
        self.max_level = max_level
        self.vectorized = vectorized

    def _config(self) -> AdaptiveConfig:
        return AdaptiveConfig(
            epsilon=self.epsilon,
            p_max=self.p_max,
            indicator=self.indicator,
            termination=self.termination,
            max_points=self.max_points,
            max_level=self.max_level,
            vectorized=self.vectorized,
        )

    def fit(self, f, d=None, callback=None):
        """Adaptively sample ``f`` and build the interpolant.

        ``d`` defaults to ``f.d`` when the callable carries it.
        """
        if d is None:
            d = getattr(f, "d", None)
            if d is None:
                raise ValueError("the input dimension d must be given")
        self.state_, self.report_ = run(f, int(d), self._config(), callback=callback)
        self.n_features_in_ = int(d)
        self.integral_ = self.state_.integrate()
        self.n_evaluations_ = self.report_.n_evaluations
        return self

    def predict(self, X):
        check_is_fitted(self, "state_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise ValueError("X must lie in the unit cube")
        return self.state_.evaluate_many(X)

    def integrate(self) -> float:
        check_is_fitted(self, "state_")
        return self.integral_

    def save(self, path) -> None:
        check_is_fitted(self, "state_")
        self.state_.save(path)

    @classmethod
    def from_state(cls, state: GridState, **params) -> "HGSGInterpolator":
        """Wrap a stored grid, e.g. one loaded with :meth:`GridState.load`."""
        est = cls(p_max=state.rule.p_max, **params)
        est.state_ = state
        est.report_ = None
        est.n_features_in_ = state.d
        est.integral_ = state.integrate()
        est.n_evaluations_ = state.n_evaluations
        return est
