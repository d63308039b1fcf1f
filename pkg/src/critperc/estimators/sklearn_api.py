"""scikit-learn style front end for the one-arm curve.

``OneArmEstimator().fit(ns)`` samples pi^(n) on the given sizes (one radius
sweep) and fits the power law pi(n) ~ A n^-exponent; ``predict`` evaluates
the fit and the fitted object can serve as the pi model of the parameter
search. The other experiments are multi-scale checks rather than
fit/predict models and keep their functional form.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .._validation import check_budget, check_probability
from ..geometry import TablePi
from ..lattice import RngSpec
from .samplers import estimate_pi_curve

__all__ = ["OneArmEstimator"]


def _sizes(X) -> np.ndarray:
    X = check_array(np.asarray(X).reshape(-1, 1) if np.ndim(X) == 1 else X, dtype=np.int64)
    if X.shape[1] != 1:
        raise ValueError(f"expected one column of sizes, got shape {X.shape}")
    if (X < 0).any():
        raise ValueError("sizes must be nonnegative")
    return X[:, 0]


class OneArmEstimator(RegressorMixin, BaseEstimator):
    """Monte Carlo one-arm probability with a power-law fit.

    Parameters
    ----------
    p : float
        Edge probability.
    budget : int
        Samples of the radius sweep.
    seed, stream : int
        RNG provenance; the sweep uses ``RngSpec(seed, stream)``.
    workers : int
        Sampling threads (results do not depend on it).

    Attributes
    ----------
    sizes_, pi_, pi_stderr_ : arrays over the fitted sizes
    exponent_, amplitude_ : least-squares fit of log pi^ on log n (n >= 1)
    """

    def __init__(self, p=0.5, budget=10_000, seed=0, stream=0, workers=1):
        self.p = p
        self.budget = budget
        self.seed = seed
        self.stream = stream
        self.workers = workers

    def fit(self, X, y=None):
        check_probability(self.p)
        check_budget(self.budget)
        ns = np.unique(_sizes(X))
        curve = estimate_pi_curve(ns.tolist(), self.p, self.budget, RngSpec(self.seed, self.stream), self.workers)
        self.sizes_ = ns
        self.pi_ = np.array([curve[n].mean for n in ns])
        self.pi_stderr_ = np.array([curve[n].stderr for n in ns])
        use = (ns >= 1) & (self.pi_ > 0)
        if use.sum() >= 2:
            slope, intercept = np.polyfit(np.log(ns[use]), np.log(self.pi_[use]), 1)
            self.exponent_, self.amplitude_ = float(-slope), float(math.exp(intercept))
        else:
            self.exponent_, self.amplitude_ = math.nan, math.nan
        return self

    def predict(self, X):
        check_is_fitted(self, "pi_")
        ns = _sizes(X).astype(float)
        with np.errstate(divide="ignore"):
            val = self.amplitude_ * np.where(ns > 0, ns, 1.0) ** -self.exponent_
        return np.where(ns > 0, np.minimum(val, 1.0), 1.0)

    def __call__(self, n):
        """Pi model interface: the fitted power law at ``n`` (array-like)."""
        n = np.asarray(n)
        return self.predict(n.reshape(-1)).reshape(n.shape)

    def to_pi_model(self) -> TablePi:
        """The measured points as a tabulated pi model."""
        check_is_fitted(self, "pi_")
        table = {int(n): float(v) for n, v in zip(self.sizes_, self.pi_) if n >= 1}
        return TablePi(table)
