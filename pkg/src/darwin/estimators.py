"""
Scikit-learn style estimators.

``fit`` takes the observed series y_0..y_n (1-D array-like, or a single
column) as ``X``; ``y`` is ignored.  Hyper-parameters live in ``__init__`` so
``get_params`` / ``set_params`` / ``clone`` work as usual, and fitted state
carries a trailing underscore.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_series
from .estimate import (
    dar_loglik,
    dar_qmle_fit,
    log_volatility,
    lyapunov_estimate,
    plugin_lyapunov,
    qmle_fit,
    residual_acf,
    residual_pacf,
    wald_test,
)
from .process import DarParams, Path, ratios

__all__ = ["DarQMLE", "DarwinQMLE", "LyapunovStabilityTest"]


def _as_data(X):
    return X if isinstance(X, Path) else check_series(X, name="X")


class DarwinQMLE(BaseEstimator):
    """Closed-form quasi-maximum likelihood fit of the model without intercept.

    Attributes
    ----------
    phi_, alpha_ : float
        QMLE of (phi, alpha).
    alpha_star_ : float
        ``n / (n - 1) * alpha_``, unbiased for alpha.
    kappa_ : float
        Mean fourth power of the residuals.
    sigma_ : ndarray, shape (2, 2)
        diag(alpha_, (kappa_ - 1) alpha_^2).
    se_ : ndarray, shape (2,)
    residuals_, model_residuals_ : ndarray
        See :class:`darwin.estimate.QmleFit`.
    n_obs_ : int
    result_ : QmleFit
    """

    def fit(self, X, y=None):
        data = _as_data(X)
        res = qmle_fit(data)
        self.result_ = res
        self.phi_ = res.phi_hat
        self.alpha_ = res.alpha_hat
        self.alpha_star_ = res.alpha_star
        self.kappa_ = res.kappa_hat
        self.sigma_ = res.sigma_matrix
        self.se_ = np.array([res.se_phi, res.se_alpha])
        self.residuals_ = res.residuals
        self.model_residuals_ = res.model_residuals
        self.n_obs_ = res.n
        return self

    def wald_test(self, gamma_matrix, r):
        check_is_fitted(self, "result_")
        return wald_test(self.result_, gamma_matrix, r)

    def plugin_lyapunov(self):
        check_is_fitted(self, "result_")
        return plugin_lyapunov(self.result_)

    def log_volatility(self, X):
        """Fitted log(alpha_ y_{t-1}^2) along ``X``."""
        check_is_fitted(self, "result_")
        return log_volatility(self.result_, _as_data(X))

    def residual_acf(self, max_lag, squared=False, partial=False):
        check_is_fitted(self, "result_")
        f = residual_pacf if partial else residual_acf
        return f(self.model_residuals_, max_lag, squared)

    def score(self, X, y=None):
        """Average Gaussian quasi log-likelihood (constant dropped) on ``X``."""
        check_is_fitted(self, "result_")
        data = _as_data(X)
        r = ratios(data)
        if isinstance(data, Path):
            log_prev2 = 2.0 * data.logabs[:-1]
        else:
            log_prev2 = 2.0 * np.log(np.abs(data[:-1]))
        ell = -0.5 * (np.log(self.alpha_) + log_prev2 + (r - self.phi_) ** 2 / self.alpha_)
        return float(np.mean(ell))


class LyapunovStabilityTest(BaseEstimator):
    """Estimate the Lyapunov exponent and test stability (gamma0 = 0).

    Parameters
    ----------
    level : float, default=0.05
        Significance level used for ``reject_``.
    """

    def __init__(self, level=0.05):
        self.level = level

    def fit(self, X, y=None):
        if not 0 < self.level <= 1:
            raise ValueError("level must be in (0, 1]")
        rep = lyapunov_estimate(_as_data(X))
        self.report_ = rep
        self.gamma_ = rep.gamma_hat
        self.sigma2_ = rep.sigma2_hat
        self.statistic_ = rep.t_stat
        self.pvalue_ = rep.p_value
        # level 1 rejects always, including p == 1
        self.reject_ = bool(rep.p_value < self.level or self.level == 1)
        self.n_obs_ = rep.n
        return self


class DarQMLE(BaseEstimator):
    """Gaussian QMLE of the double AR(1) model with intercept (comparison model).

    Parameters
    ----------
    phi_init, omega_init, alpha_init : float or None
        Starting point; ``omega_init=None`` uses half the sample variance.
    max_iter : int
        Nelder-Mead iteration cap per restart.
    """

    def __init__(self, phi_init=0.0, omega_init=None, alpha_init=0.5, max_iter=20000):
        self.phi_init = phi_init
        self.omega_init = omega_init
        self.alpha_init = alpha_init
        self.max_iter = max_iter

    def fit(self, X, y=None):
        data = check_series(X, min_length=11, name="X")
        omega = self.omega_init if self.omega_init is not None else 0.5 * float(np.var(data))
        init = DarParams(self.phi_init, omega, self.alpha_init)
        res = dar_qmle_fit(data, init=init, max_iter=self.max_iter)
        self.result_ = res
        self.phi_, self.omega_, self.alpha_ = res.phi, res.omega, res.alpha
        self.se_ = res.se
        self.loglik_ = res.loglik
        self.converged_ = res.converged
        self.residuals_ = res.residuals
        return self

    def log_volatility(self, X):
        check_is_fitted(self, "result_")
        data = check_series(X, name="X")
        return np.log(self.omega_ + self.alpha_ * data[:-1] ** 2)

    def score(self, X, y=None):
        check_is_fitted(self, "result_")
        data = check_series(X, min_length=2, name="X")
        return dar_loglik([self.phi_, self.omega_, self.alpha_], data) / (data.shape[0] - 1)
