"""
Inference for the double AR(1) model without intercept.

Every estimator here consumes the ratio sequence r_t = y_t / y_{t-1} (and,
where needed, the lagged signs), never the levels, so explosive or vanishing
series are handled at any horizon.  Accepts either an observed series
(array-like y_0..y_n) or a simulated :class:`~darwin.process.Path`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize

from ._validation import check_count
from .exceptions import DataError, DegenerateEstimateError
from .process import DarParams, Path, lagged_signs, log_abs_ratios, ratios
from .stats import chi2_sf, normal_cdf

__all__ = [
    "DarFit",
    "PluginEstimate",
    "QmleFit",
    "StabilityReport",
    "WaldReport",
    "dar_loglik",
    "dar_qmle_fit",
    "log_volatility",
    "lyapunov_estimate",
    "pacf_from_acf",
    "plugin_lyapunov",
    "qmle_fit",
    "residual_acf",
    "residual_pacf",
    "wald_test",
]


def _to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass(frozen=True)
class StabilityReport:
    """Lyapunov exponent estimate and the stability statistic T_n."""

    gamma_hat: float
    sigma2_hat: float
    t_stat: float
    p_value: float
    n: int

    def reject(self, level: float = 0.05) -> bool:
        """Two-sided test of gamma0 = 0 at ``level``."""
        return self.p_value < level

    def to_dict(self) -> dict:
        return asdict(self)


def lyapunov_estimate(data) -> StabilityReport:
    """Estimate the Lyapunov exponent and test H0: gamma0 = 0.

    gamma_hat is the mean log-ratio (equal to (log|y_n| - log|y_0|) / n),
    sigma2_hat the mean squared log-ratio minus gamma_hat**2, and
    T_n = sqrt(n) gamma_hat / sqrt(sigma2_hat) with a two-sided normal p-value.
    """
    logs = log_abs_ratios(data)
    n = logs.shape[0]
    gamma = float(np.mean(logs))
    sigma2 = float(np.mean((logs - gamma) ** 2))
    # log-ratios of a geometric series differ only by rounding, so compare
    # the spread with the floating-point noise of the values themselves
    noise = 64.0 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(logs))))
    if math.sqrt(sigma2) <= noise:
        raise DegenerateEstimateError("all log-ratios are identical; sigma2_hat = 0 and T_n is undefined")
    t = math.sqrt(n) * gamma / math.sqrt(sigma2)
    p = 2.0 * (1.0 - normal_cdf(abs(t)))
    return StabilityReport(gamma, sigma2, t, p, n)


@dataclass(frozen=True, eq=False)
class QmleFit:
    """Closed-form QMLE of (phi, alpha).

    ``residuals`` are the standardised ratio deviations (r_t - phi_hat) /
    sqrt(alpha_hat); they sum to zero and have mean square one exactly.
    ``model_residuals`` are (y_t - phi_hat y_{t-1}) / sqrt(alpha_hat y_{t-1}^2),
    i.e. ``residuals * sign(y_{t-1})``, the estimates of the innovations
    themselves; use these for diagnostics.
    """

    phi_hat: float
    alpha_hat: float
    alpha_star: float
    kappa_hat: float
    sigma_matrix: np.ndarray
    se_phi: float
    se_alpha: float
    residuals: np.ndarray
    model_residuals: np.ndarray
    n: int

    @property
    def theta(self) -> np.ndarray:
        return np.array([self.phi_hat, self.alpha_hat])

    def to_dict(self, include_residuals: bool = False) -> dict:
        out = {
            "phi_hat": self.phi_hat,
            "alpha_hat": self.alpha_hat,
            "alpha_star": self.alpha_star,
            "kappa_hat": self.kappa_hat,
            "sigma_matrix": self.sigma_matrix.tolist(),
            "se_phi": self.se_phi,
            "se_alpha": self.se_alpha,
            "n": self.n,
        }
        if include_residuals:
            out["residuals"] = self.residuals.tolist()
            out["model_residuals"] = self.model_residuals.tolist()
        return out


def qmle_fit(data) -> QmleFit:
    """Fit phi_hat = mean(r) and alpha_hat = mean((r - phi_hat)^2)."""
    r = ratios(data)
    s = lagged_signs(data)
    n = r.shape[0]
    if n < 2:
        raise DataError("qmle_fit needs at least 3 observations (2 ratios)")
    phi = float(np.mean(r))
    dev = r - phi
    alpha = float(np.mean(dev * dev))
    if alpha == 0.0:
        raise DegenerateEstimateError("all ratios are identical; alpha_hat = 0")
    resid = dev / math.sqrt(alpha)
    kappa = float(np.mean(resid**4))
    sigma = np.diag([alpha, (kappa - 1.0) * alpha * alpha])
    return QmleFit(
        phi_hat=phi,
        alpha_hat=alpha,
        alpha_star=n / (n - 1) * alpha,
        kappa_hat=kappa,
        sigma_matrix=sigma,
        se_phi=math.sqrt(alpha / n),
        se_alpha=math.sqrt(max(kappa - 1.0, 0.0) * alpha * alpha / n),
        residuals=resid,
        model_residuals=resid * s,
        n=n,
    )


@dataclass(frozen=True, eq=False)
class WaldReport:
    """Wald test of H0: Gamma theta = r against chi-square(df)."""

    w_stat: float
    df: int
    p_value: float
    gamma_matrix: np.ndarray
    r: np.ndarray

    def reject(self, level: float = 0.05) -> bool:
        return self.p_value < level

    def to_dict(self) -> dict:
        return _to_jsonable(asdict(self))


def wald_test(fit: QmleFit, gamma_matrix, r) -> WaldReport:
    """W_n = n (G theta - r)' (G Sigma G')^{-1} (G theta - r).

    Parameters
    ----------
    fit : QmleFit
    gamma_matrix : array-like, shape (s, 2)
        Full row rank, s in {1, 2}.
    r : array-like, shape (s,)
    """
    g = np.atleast_2d(np.asarray(gamma_matrix, dtype=float))
    rv = np.atleast_1d(np.asarray(r, dtype=float))
    if g.ndim != 2 or g.shape[1] != 2 or g.shape[0] not in (1, 2):
        raise ValueError(f"Gamma must have shape (s, 2) with s in (1, 2), got {g.shape}")
    s = g.shape[0]
    if rv.shape != (s,):
        raise ValueError(f"r must have shape ({s},), got {rv.shape}")
    if np.linalg.matrix_rank(g) < s:
        raise ValueError("Gamma is rank deficient")
    middle = g @ fit.sigma_matrix @ g.T
    if np.linalg.matrix_rank(middle) < s:
        raise np.linalg.LinAlgError("Gamma Sigma Gamma' is singular")
    d = g @ fit.theta - rv
    w = float(fit.n * d @ np.linalg.solve(middle, d))
    w = max(w, 0.0)
    return WaldReport(w, s, chi2_sf(w, s), g, rv)


def residual_acf(residuals, max_lag: int, squared: bool = False) -> np.ndarray:
    """Sample ACF at lags 1..max_lag, centred at the sample mean.

    With ``squared=True`` the ACF of the squared residuals is returned.
    No confidence bands: the usual white-noise bands do not apply to these
    residuals.
    """
    e = np.asarray(residuals, dtype=float).ravel()
    if squared:
        e = e * e
    n = e.shape[0]
    max_lag = check_count(max_lag, "max_lag")
    if max_lag >= n:
        raise ValueError(f"max_lag must be < n = {n}")
    c = e - e.mean()
    denom = float(np.dot(c, c))
    if denom == 0.0 or np.ptp(e) == 0.0:
        raise DegenerateEstimateError("residuals have zero variance")
    return np.array([np.dot(c[k:], c[:-k]) / denom for k in range(1, max_lag + 1)])


def pacf_from_acf(acf) -> np.ndarray:
    """Partial autocorrelations at lags 1..K from ACF values at lags 1..K (Durbin-Levinson)."""
    rho = np.asarray(acf, dtype=float)
    k_max = rho.shape[0]
    out = np.empty(k_max)
    phi = np.zeros(0)
    for k in range(1, k_max + 1):
        if k == 1:
            a = rho[0]
        else:
            num = rho[k - 1] - np.dot(phi, rho[k - 2 :: -1][: k - 1])
            den = 1.0 - np.dot(phi, rho[: k - 1])
            a = num / den
        phi = np.concatenate([phi - a * phi[::-1], [a]])
        out[k - 1] = a
    return out


def residual_pacf(residuals, max_lag: int, squared: bool = False) -> np.ndarray:
    return pacf_from_acf(residual_acf(residuals, max_lag, squared))


class PluginEstimate(NamedTuple):
    value: float
    skipped: int


def plugin_lyapunov(fit: QmleFit) -> PluginEstimate:
    """Plug-in exponent mean(log|phi_hat + eta_hat_t sqrt(alpha_hat)|).

    Uses the model residuals.  Terms that vanish exactly are skipped and
    counted.  Point estimate only.
    """
    terms = np.abs(fit.phi_hat + fit.model_residuals * math.sqrt(fit.alpha_hat))
    ok = terms > 0
    if not np.any(ok):
        raise DegenerateEstimateError("every plug-in term is zero")
    return PluginEstimate(float(np.mean(np.log(terms[ok]))), int((~ok).sum()))


def log_volatility(fit: QmleFit, data) -> np.ndarray:
    """Fitted log conditional variance log(alpha_hat y_{t-1}^2), t = 1..n."""
    if isinstance(data, Path):
        log_prev = data.logabs[:-1]
    else:
        from ._validation import check_series

        log_prev = np.log(np.abs(check_series(data)[:-1]))
    return math.log(fit.alpha_hat) + 2.0 * log_prev


# --- comparison fit of the model with intercept -----------------------------


@dataclass(frozen=True, eq=False)
class DarFit:
    """Gaussian QMLE of (phi, omega, alpha) in the model with intercept.

    Standard errors are comparison grade: a sandwich H^{-1} J H^{-1} with
    analytic per-observation scores and a finite-difference Hessian.
    """

    phi: float
    omega: float
    alpha: float
    loglik: float
    converged: bool
    iterations: int
    se: np.ndarray
    residuals: np.ndarray = field(repr=False)
    message: str = ""

    @property
    def lambda_hat(self) -> np.ndarray:
        return np.array([self.phi, self.omega, self.alpha])

    def to_dict(self, include_residuals: bool = False) -> dict:
        out = {
            "phi": self.phi,
            "omega": self.omega,
            "alpha": self.alpha,
            "loglik": self.loglik,
            "converged": self.converged,
            "iterations": self.iterations,
            "se": self.se.tolist(),
            "message": self.message,
        }
        if include_residuals:
            out["residuals"] = self.residuals.tolist()
        return out


def dar_loglik(lam, y) -> float:
    """Gaussian quasi log-likelihood (constant dropped) of the model with intercept."""
    phi, omega, alpha = (float(v) for v in lam)
    y = np.asarray(y, dtype=float)
    prev = y[:-1]
    h = omega + alpha * prev * prev
    if np.any(h <= 0):
        return -math.inf
    e = y[1:] - phi * prev
    return float(-0.5 * np.sum(np.log(h) + e * e / h))


def _dar_scores(lam, y) -> np.ndarray:
    phi, omega, alpha = lam
    prev = y[:-1]
    p2 = prev * prev
    h = omega + alpha * p2
    e = y[1:] - phi * prev
    common = -0.5 * (1.0 / h - e * e / (h * h))
    return np.column_stack([e * prev / h, common, common * p2])


def _sandwich_se(lam, y) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    scores = _dar_scores(lam, y)
    j = scores.T @ scores
    hess = np.empty((3, 3))
    for i in range(3):
        h = 1e-5 * max(abs(lam[i]), 1e-10)
        up, dn = lam.copy(), lam.copy()
        up[i] += h
        dn[i] -= h
        if i > 0 and dn[i] <= 0:
            dn[i] = lam[i]
            hess[:, i] = (_dar_scores(up, y).sum(0) - _dar_scores(dn, y).sum(0)) / h
        else:
            hess[:, i] = (_dar_scores(up, y).sum(0) - _dar_scores(dn, y).sum(0)) / (2 * h)
    hess = 0.5 * (hess + hess.T)
    try:
        hinv = np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        return np.full(3, np.nan)
    cov = hinv @ j @ hinv
    with np.errstate(invalid="ignore"):
        return np.sqrt(np.diag(cov))


def dar_qmle_fit(data, init: DarParams | None = None, max_iter: int = 20000, restarts: int = 3) -> DarFit:
    """Fit the double AR(1) model with intercept by Nelder-Mead.

    The search runs over (phi, log omega, log alpha) on the series rescaled by
    its median absolute value, which keeps omega and alpha positive and the
    problem well conditioned; estimates are mapped back to the data scale.
    The simplex is restarted from its best point up to ``restarts`` times.
    """
    from ._validation import check_series

    y = check_series(data, min_length=11)
    scale = float(np.median(np.abs(y)))
    z = y / scale
    if init is None:
        init = DarParams(0.0, 0.5 * float(np.var(z)) * scale**2, 0.5)
    start = np.array(
        [
            init.phi,
            math.log(max(init.omega / scale**2, 1e-8)),
            math.log(max(init.alpha, 1e-8)),
        ]
    )

    def unpack(x):
        return np.array([x[0], math.exp(x[1]), math.exp(x[2])])

    def objective(x):
        if abs(x[1]) > 700 or abs(x[2]) > 700:
            return math.inf
        val = dar_loglik(unpack(x), z)
        return -val if math.isfinite(val) else math.inf

    f_init = objective(start)
    x = start
    iterations = 0
    converged = False
    message = ""
    for _ in range(max(1, restarts)):
        res = optimize.minimize(
            objective,
            x,
            method="Nelder-Mead",
            options={"maxiter": max_iter, "maxfev": 2 * max_iter, "xatol": 1e-9, "fatol": 1e-11, "adaptive": True},
        )
        iterations += int(res.nit)
        improved = res.fun < objective(x) - 1e-10
        x = res.x
        converged = bool(res.success)
        message = str(res.message)
        if not improved:
            break
    if objective(x) > f_init:
        x = start
    lam_z = unpack(x)
    se_z = _sandwich_se(lam_z, z)
    lam = np.array([lam_z[0], lam_z[1] * scale**2, lam_z[2]])
    se = np.array([se_z[0], se_z[1] * scale**2, se_z[2]])
    n = y.shape[0] - 1
    loglik = dar_loglik(lam_z, z) - n * math.log(scale)
    h = lam[1] + lam[2] * y[:-1] ** 2
    resid = (y[1:] - lam[0] * y[:-1]) / np.sqrt(h)
    return DarFit(float(lam[0]), float(lam[1]), float(lam[2]), float(loglik), converged, iterations, se, resid, message)
