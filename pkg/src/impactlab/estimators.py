"""scikit-learn style wrappers around the friction, size and averaging diagnostics."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .averaging import RhoLaw, psi
from .core import ImpactPath
from .friction import rho_from_friction, rho_local_estimate, rho_loglog
from .sizes import hill_estimator

__all__ = ["EquilibriumIndexEstimator", "TailIndexEstimator", "AverageImpactCurve"]

METHODS = ("friction", "loglog", "local")


class EquilibriumIndexEstimator(RegressorMixin, BaseEstimator):
    """Estimate the equilibrium index of a single impact path.

    ``fit(X, y)`` takes child volumes ``X`` of shape ``(n, 1)`` and the
    observed impacts ``y``. ``predict`` returns the regularly varying fit
    ``I(S) = I_N (S / S_N)**rho_`` at cumulative sizes ``X``.

    Parameters
    ----------
    method : {"friction", "loglog", "local"}
        Which estimator defines ``rho_``.
    tail_fraction : float
        Fraction of the path used by the tail-based estimators.

    Attributes
    ----------
    rho_ : float
    rho_estimates_ : dict
        All three estimates, NaN where undefined.
    friction_ : ndarray
    path_ : ImpactPath
    """

    def __init__(self, method="friction", tail_fraction=0.2):
        self.method = method
        self.tail_fraction = tail_fraction

    def fit(self, X, y):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        q = check_array(X, ensure_2d=True).ravel()
        y = check_array(np.asarray(y, dtype=float).reshape(-1, 1)).ravel()
        if q.size != y.size:
            raise ValueError("X and y must have the same number of rows")
        path = ImpactPath.from_impacts(q, y)
        estimates = {}
        for name, fn in (("friction", lambda p: rho_from_friction(p, self.tail_fraction)),
                         ("loglog", rho_loglog),
                         ("local", lambda p: rho_local_estimate(p, self.tail_fraction))):
            try:
                estimates[name] = float(fn(path))
            except (ValueError, ArithmeticError):
                estimates[name] = float("nan")
        self.rho_ = estimates[self.method]
        self.rho_estimates_ = estimates
        self.friction_ = path.friction.copy()
        self.path_ = path
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "rho_")
        s = check_array(X, ensure_2d=True).ravel()
        s_n = self.path_.cumulative_sizes[-1]
        return self.path_.impacts[-1] * (s / s_n) ** self.rho_


class TailIndexEstimator(BaseEstimator):
    """Hill estimator of a power-law tail index.

    Parameters
    ----------
    top_fraction : float
        Fraction of the largest observations used.
    """

    def __init__(self, top_fraction=0.01):
        self.top_fraction = top_fraction

    def fit(self, X, y=None):
        x = check_array(X, ensure_2d=False).ravel()
        self.tail_index_ = hill_estimator(x, self.top_fraction)
        self.n_samples_ = x.size
        return self

    def predict(self, X):
        """Power-law survival shape ``(x / x_min)**-tail_index_`` clipped at one."""
        check_is_fitted(self, "tail_index_")
        x = check_array(X, ensure_2d=False).ravel()
        return np.minimum(1.0, x ** -self.tail_index_)


class AverageImpactCurve(RegressorMixin, BaseEstimator):
    """Empirical average normalised impact ``psi(x) = E[x**rho]``.

    ``fit`` takes a sample of equilibrium indices (one per metaorder);
    ``predict`` evaluates the plug-in ``psi`` at participation rates.
    """

    def fit(self, X, y=None):
        rhos = check_array(X, ensure_2d=False).ravel()
        self.law_ = RhoLaw.empirical(rhos)
        return self

    def predict(self, X):
        check_is_fitted(self, "law_")
        x = check_array(X, ensure_2d=False).ravel()
        return np.asarray(psi(self.law_, x), dtype=float).reshape(-1)
