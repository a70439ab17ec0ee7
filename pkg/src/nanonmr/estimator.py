"""Estimator-style wrapper around the correlation-model fitting core.

CorrelationModelRegressor follows the scikit-learn estimator protocol
(get_params / set_params / fit / predict / score) without importing
scikit-learn, so it drops into sklearn pipelines and model-selection
utilities when that library is present but adds no dependency here.

X is the lag grid in seconds, shaped (n, 1) or (n,); y is the measured
correlation at those lags.
"""

import numpy as np

from .correlate import AutoCorrelation
from .envelopes import signal_model
from .fitting import default_bounds, global_fit


class CorrelationModelRegressor:
    """Fit a0 + a1 cos(delta t + phi) C(t/T_D) to lag/correlation data."""

    def __init__(self, kind="powerlaw", n_restarts=50, seed=0,
                 freq_bounds_hz=(200.0, 1800.0), fix_phase=False):
        self.kind = kind
        self.n_restarts = n_restarts
        self.seed = seed
        self.freq_bounds_hz = freq_bounds_hz
        self.fix_phase = fix_phase

    def get_params(self, deep=True):
        return {"kind": self.kind, "n_restarts": self.n_restarts,
                "seed": self.seed, "freq_bounds_hz": self.freq_bounds_hz,
                "fix_phase": self.fix_phase}

    def set_params(self, **params):
        for k, v in params.items():
            if k not in self.get_params():
                raise ValueError(f"unknown parameter {k!r}")
            setattr(self, k, v)
        return self

    @staticmethod
    def _as_lags(X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError("X must have a single lag column")
            X = X[:, 0]
        return X

    def fit(self, X, y):
        t = self._as_lags(X)
        y = np.asarray(y, dtype=float)
        order = np.argsort(t)
        t, y = t[order], y[order]
        if t[0] != 0:
            # the container wants a lag-0 anchor; prepend one from the fit
            # data's own scale so bounds derive sensibly
            t = np.concatenate([[0.0], t])
            y = np.concatenate([[y[0]], y])
        ac = AutoCorrelation(t, y, np.ones_like(t))
        bounds = default_bounds(ac, self.kind, self.freq_bounds_hz)
        fixed_mask = ["phi"] if self.fix_phase else None
        fixed_values = {"phi": 0.0} if self.fix_phase else None
        self.result_ = global_fit(ac, self.kind, bounds,
                                  n_restarts=self.n_restarts, seed=self.seed,
                                  fixed_mask=fixed_mask,
                                  fixed_values=fixed_values)
        self.params_ = self.result_.params
        return self

    def predict(self, X):
        if not hasattr(self, "result_"):
            raise RuntimeError("estimator is not fitted")
        return signal_model(self._as_lags(X), self.params_)

    def score(self, X, y):
        """Coefficient of determination on the given data."""
        y = np.asarray(y, dtype=float)
        resid = y - self.predict(X)
        ss_tot = np.sum((y - y.mean()) ** 2) or 1e-300
        return 1.0 - float(np.sum(resid ** 2) / ss_tot)
