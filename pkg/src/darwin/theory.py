"""
Theoretical Lyapunov exponent, its variance, stability-boundary calibration,
asymptotic standard deviations and the functional CLT check.

The Lyapunov exponent of the model without intercept is

    gamma0 = E log|phi + eta sqrt(alpha)|,     sigma2 = var log|phi + eta sqrt(alpha)|.

The integrand has an integrable logarithmic singularity at
``x* = -phi / sqrt(alpha)``; the quadrature places breakpoints there and at 0
(the Laplace density has a kink at 0) and integrates the tails on infinite
intervals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, optimize

from ._validation import check_count, check_positive
from .exceptions import NoStabilityBoundaryError
from .innovations import Innovation, SeedLike, kurtosis, make_rng, sample
from .process import DarwinParams, _initial_value
from .stats import ks_test, normal_cdf

__all__ = [
    "AsymptoticSD",
    "CltReport",
    "LyapunovProfile",
    "asymptotic_sd",
    "calibrate_alpha",
    "clt_path_check",
    "lyapunov_exponent",
    "lyapunov_moments",
]

_MC_CHUNK = 1_000_000
_T5_NORM = 8.0 / (3.0 * math.pi * math.sqrt(3.0))


@dataclass(frozen=True)
class LyapunovProfile:
    """Theoretical (gamma0, sigma2) for one (phi, alpha, law).

    ``err_estimate`` is the summed absolute quadrature error for the
    quadrature method and the standard error of gamma0 for Monte Carlo.
    """

    gamma0: float
    sigma2: float
    method: str
    err_estimate: float
    phi: float = float("nan")
    alpha: float = float("nan")
    innovation: str = ""
    n_draws: int | None = None
    fallback: bool = False

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")
        if not math.isfinite(self.err_estimate):
            raise ValueError("err_estimate must be finite")

    def to_dict(self) -> dict:
        return asdict(self)


class AsymptoticSD(tuple):
    """(sd_phi, sd_alpha, sd_gamma) with attribute access."""

    __slots__ = ()

    def __new__(cls, sd_phi, sd_alpha, sd_gamma):
        return super().__new__(cls, (float(sd_phi), float(sd_alpha), float(sd_gamma)))

    sd_phi = property(lambda self: self[0])
    sd_alpha = property(lambda self: self[1])
    sd_gamma = property(lambda self: self[2])

    def _asdict(self) -> dict:
        return {"sd_phi": self[0], "sd_alpha": self[1], "sd_gamma": self[2]}


_QUAD_TOLERANCES = ((1e-13, 1e-12), (1e-11, 1e-10))


def _segments(phi: float, sqrt_alpha: float) -> list[tuple[float, float]]:
    cuts = sorted({-phi / sqrt_alpha, 0.0})
    edges = [-math.inf, cuts[0] - 1.0, *cuts, cuts[-1] + 1.0, math.inf]
    return [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if lo < hi]


def _log_moment(phi: float, alpha: float, kind: Innovation, power: int) -> tuple[float, float]:
    sqrt_alpha = math.sqrt(alpha)
    f = {
        Innovation.GAUSSIAN: lambda x: math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi),
        Innovation.T5STD: lambda x: _T5_NORM * (1.0 + x * x / 3.0) ** -3,
        Innovation.LAPLACE: lambda x: math.exp(-math.sqrt(2.0) * abs(x)) / math.sqrt(2.0),
    }[kind]

    def integrand(x):
        v = abs(phi + x * sqrt_alpha)
        if v == 0.0:
            return 0.0
        return math.log(v) ** power * f(x)

    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in _segments(phi, sqrt_alpha):
            # QAGS can report roundoff at the log singularity under the tight
            # tolerance; one looser pass is still far below 4-decimal needs.
            for i, (eps_abs, eps_rel) in enumerate(_QUAD_TOLERANCES):
                try:
                    val, e = integrate.quad(integrand, lo, hi, limit=200, epsabs=eps_abs, epsrel=eps_rel)
                    break
                except integrate.IntegrationWarning:
                    if i == len(_QUAD_TOLERANCES) - 1:
                        raise
            total += val
            err += e
    return total, err


def lyapunov_exponent(phi: float, alpha: float, kind: Innovation | str = Innovation.GAUSSIAN) -> float:
    """gamma0 = E log|phi + eta sqrt(alpha)| by quadrature."""
    check_positive(alpha, "alpha")
    return _log_moment(float(phi), float(alpha), Innovation.parse(kind), 1)[0]


def _monte_carlo(phi, alpha, kind, n_draws, seed):
    n_draws = check_count(n_draws, "n_draws", 2)
    sums, sq = [], []
    done = 0
    chunk = 0
    while done < n_draws:
        m = min(_MC_CHUNK, n_draws - done)
        eta = sample(kind, m, (seed, chunk))
        v = np.log(np.abs(phi + eta * math.sqrt(alpha)))
        sums.append(math.fsum(v))
        sq.append(math.fsum(v * v))
        done += m
        chunk += 1
    mean = math.fsum(sums) / n_draws
    var = (math.fsum(sq) - n_draws * mean * mean) / (n_draws - 1)
    return mean, var, math.sqrt(var / n_draws)


def lyapunov_moments(
    params: DarwinParams,
    kind: Innovation | str = Innovation.GAUSSIAN,
    method: str = "quadrature",
    n_draws: int = 10**7,
    seed: int = 0,
) -> LyapunovProfile:
    """Compute the Lyapunov exponent gamma0 and sigma2 = var log|phi + eta sqrt(alpha)|.

    Parameters
    ----------
    params : DarwinParams
    kind : Innovation or str
    method : {"quadrature", "montecarlo"}
        Quadrature falls back to Monte Carlo (``fallback=True``) with a
        ``RuntimeWarning`` if any segment fails to converge.
    n_draws, seed
        Monte Carlo size and master seed; draws come in chunks from streams
        ``(seed, chunk)`` and are reduced with ``math.fsum``.
    """
    kind = Innovation.parse(kind)
    phi, alpha = float(params.phi), float(params.alpha)
    common = dict(phi=phi, alpha=alpha, innovation=kind.value)
    if method not in ("quadrature", "montecarlo"):
        raise ValueError("method must be 'quadrature' or 'montecarlo'")
    fallback = False
    if method == "quadrature":
        try:
            g, e1 = _log_moment(phi, alpha, kind, 1)
            m2, e2 = _log_moment(phi, alpha, kind, 2)
            return LyapunovProfile(g, m2 - g * g, "quadrature", e1 + e2, **common)
        except integrate.IntegrationWarning as exc:
            warnings.warn(f"quadrature did not converge ({exc}); using Monte Carlo", RuntimeWarning, stacklevel=2)
            fallback = True
    g, var, se = _monte_carlo(phi, alpha, kind, n_draws, seed)
    return LyapunovProfile(g, var, "montecarlo", se, n_draws=int(n_draws), fallback=fallback, **common)


def calibrate_alpha(
    phi: float,
    kind: Innovation | str = Innovation.GAUSSIAN,
    bracket: tuple[float, float] = (1e-6, 1e3),
    target: float = 0.0,
    tol: float = 1e-6,
    max_expand: int = 12,
) -> float:
    """Find alpha with gamma0(phi, alpha) = target (0 is the stability boundary).

    The bracket is widened geometrically (lower end / 10, upper end * 10)
    until the exponent changes sign.  Raises
    :class:`NoStabilityBoundaryError` if it never does.
    """
    kind = Innovation.parse(kind)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")

    def g(a):
        return lyapunov_exponent(phi, a, kind) - target

    g_lo, g_hi = g(lo), g(hi)
    for _ in range(max_expand):
        if g_lo * g_hi <= 0:
            break
        lo, hi = lo / 10.0, hi * 10.0
        g_lo, g_hi = g(lo), g(hi)
    else:
        if g_lo * g_hi > 0:
            raise NoStabilityBoundaryError(
                f"no stability boundary in range for phi={phi}, {kind.value}, target={target}"
            )
    root = optimize.brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    resid = g(root)
    if abs(resid) >= tol:
        raise NoStabilityBoundaryError(f"root finder stalled: |gamma0 - target| = {abs(resid):.3g}")
    return float(root)


def asymptotic_sd(
    params: DarwinParams,
    kind: Innovation | str,
    n: int,
    sigma2: float | LyapunovProfile | None = None,
) -> AsymptoticSD:
    """Asymptotic standard deviations of phi_hat, alpha_hat and gamma_hat at sample size n.

    sd_phi = sqrt(alpha / n), sd_alpha = alpha sqrt((kappa4 - 1) / n),
    sd_gamma = sqrt(sigma2 / n).  ``sigma2`` defaults to the quadrature value.
    """
    n = check_count(n, "n")
    if sigma2 is None:
        sigma2 = lyapunov_moments(params, kind).sigma2
    elif isinstance(sigma2, LyapunovProfile):
        sigma2 = sigma2.sigma2
    alpha = params.alpha
    k4 = kurtosis(kind)
    return AsymptoticSD(
        math.sqrt(alpha / n),
        alpha * math.sqrt((k4 - 1.0) / n),
        math.sqrt(float(sigma2) / n),
    )


@dataclass
class CltReport:
    """Finite-n check of the Brownian limit of the centred log-level.

    For each grid point s: the empirical variance of Z_n(s) (target
    sigma2 * s), the KS statistic and p-value of Z_n(s) / sqrt(sigma2 s)
    against N(0, 1), and whether the KS test does not reject at ``level``.
    ``increment_corr[i]`` is corr(Z(s_i), Z(s_{i+1}) - Z(s_i)).
    """

    s_grid: list
    variances: list
    targets: list
    ks_stats: list
    ks_pvalues: list
    passed: list
    increment_corr: list
    gamma0: float
    sigma2: float
    n: int
    replications: int
    level: float
    meta: dict = field(default_factory=dict)

    @property
    def variance_rel_error(self) -> list:
        return [abs(v / t - 1.0) for v, t in zip(self.variances, self.targets)]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["variance_rel_error"] = self.variance_rel_error
        return out


def clt_path_check(
    params: DarwinParams,
    kind: Innovation | str = Innovation.GAUSSIAN,
    n: int = 2000,
    replications: int = 1000,
    s_grid=(0.25, 0.5, 0.75, 1.0),
    seed: SeedLike = 0,
    profile: LyapunovProfile | None = None,
    level: float = 0.01,
    x0: float | str = "random",
) -> CltReport:
    """Simulate ``replications`` auxiliary paths and test Z_n(s) ~ N(0, sigma2 s).

    Z_n(s) = (log x_[ns] - [ns] gamma0) / sqrt(n).  Replication m draws from
    stream ``(seed, m)``.
    """
    kind = Innovation.parse(kind)
    n = check_count(n, "n")
    replications = check_count(replications, "replications", 2)
    grid = [float(s) for s in s_grid]
    if any(not 0 < s <= 1 for s in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("s_grid must be strictly increasing in (0, 1]")
    if profile is None:
        profile = lyapunov_moments(params, kind)
    gamma0, sigma2 = profile.gamma0, profile.sigma2
    idx = np.array([int(math.floor(n * s)) for s in grid])
    master = seed if isinstance(seed, (int, np.integer)) else 0

    sqrt_alpha = math.sqrt(params.alpha)
    z = np.empty((replications, len(grid)))
    for m in range(replications):
        rng = make_rng((int(master), m))
        if isinstance(x0, str):
            lx0 = math.log(abs(_initial_value(x0, rng)))
        else:
            lx0 = math.log(check_positive(x0, "x0"))
        eta = sample(kind, n, rng)
        logx = np.concatenate([[lx0], lx0 + np.cumsum(np.log(np.abs(params.phi + eta * sqrt_alpha)))])
        z[m] = (logx[idx] - idx * gamma0) / math.sqrt(n)

    variances, targets, stats, pvals, passed = [], [], [], [], []
    for j, s in enumerate(grid):
        target = sigma2 * s
        col = z[:, j]
        res = ks_test(col / math.sqrt(target), normal_cdf)
        variances.append(float(np.var(col, ddof=1)))
        targets.append(target)
        stats.append(res.stat)
        pvals.append(res.p)
        passed.append(bool(res.p > level))
    corr = []
    for j in range(len(grid) - 1):
        inc = z[:, j + 1] - z[:, j]
        corr.append(float(np.corrcoef(z[:, j], inc)[0, 1]))
    return CltReport(
        grid, variances, targets, stats, pvals, passed, corr, gamma0, sigma2, n, replications, level,
        meta={"phi": params.phi, "alpha": params.alpha, "innovation": kind.value, "seed": int(master), "x0": x0},
    )
