"""scikit-learn compatible wrappers around the threshold decision.

``MeanSquareTransformer`` turns a batch of sampled channel waveforms (one row
per bit exchange) into their finite-time mean squares, and
``ThresholdDetector`` maps mean squares to the three decisions. Chained in a
``Pipeline`` they reproduce what Alice and Bob do at the end of every period.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import VOLTAGE, Decision, SystemConfig, compute_thresholds, expected_decision


class MeanSquareTransformer(TransformerMixin, BaseEstimator):
    """Row-wise mean of squared samples (a boxcar average)."""

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_features=1)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} samples per row, expected {self.n_features_in_}"
            )
        return np.mean(X * X, axis=1, keepdims=True)


class ThresholdDetector(ClassifierMixin, BaseEstimator):
    """Three-way threshold detector on the measured mean square.

    Nothing is learned from data: ``fit`` derives the exact levels and
    thresholds from ``config``. Labels are the string values of
    :class:`~kljn.core.Decision` (``"00"``, ``"secure"``, ``"11"``); use
    :meth:`score_situations` to score against true bit situations.

    Parameters
    ----------
    config : SystemConfig, optional
        Defaults to ``SystemConfig()``.
    observable : {'voltage', 'current'}
    """

    def __init__(self, config=None, observable=VOLTAGE):
        self.config = config
        self.observable = observable

    def fit(self, X=None, y=None):
        config = SystemConfig() if self.config is None else self.config
        self.levels_ = compute_thresholds(config, self.observable)
        self.classes_ = np.array([d.value for d in Decision])
        if X is not None:
            self.n_features_in_ = check_array(X).shape[1]
        return self

    def _measured(self, X):
        X = check_array(X, ensure_2d=False)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError(f"expected one mean-square column, got {X.shape[1]}")
            X = X[:, 0]
        return X

    def decision_function(self, X):
        """Signed distance to the nearest band edge; positive inside the secure band."""
        check_is_fitted(self, "levels_")
        ms = self._measured(X)
        lv = self.levels_
        sign = 1.0 if lv.ascending else -1.0
        return np.minimum(sign * (ms - lv.edge_00), sign * (lv.edge_11 - ms))

    def predict(self, X):
        check_is_fitted(self, "levels_")
        ms = self._measured(X)
        lv = self.levels_
        lo, hi = (ms < lv.edge_00, ms > lv.edge_11) if lv.ascending else (ms > lv.edge_00, ms < lv.edge_11)
        out = np.full(ms.shape, Decision.DECIDE_SECURE.value, dtype=object)
        out[lo] = Decision.DECIDE_00.value
        out[hi] = Decision.DECIDE_11.value
        return out

    def score_situations(self, X, situations):
        """Fraction of exchanges whose decision matches the true situation."""
        expected = np.array([expected_decision(s).value for s in situations], dtype=object)
        return float(np.mean(self.predict(X) == expected))
