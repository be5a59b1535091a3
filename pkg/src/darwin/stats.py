"""Small statistical kernel: normal and chi-square tails, one-sample KS test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = ["KSResult", "chi2_sf", "ks_test", "normal_cdf", "normal_quantile", "two_sample_ks"]


@dataclass(frozen=True)
class KSResult:
    stat: float
    p: float


def normal_cdf(x):
    """Standard normal CDF."""
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on (0, 1)."""
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0) | (p_arr >= 1)):
        raise ValueError("normal_quantile requires 0 < p < 1")
    out = special.ndtri(p_arr)
    return float(out) if np.ndim(out) == 0 else out


def chi2_sf(x: float, df: int) -> float:
    """Survival function of chi-square with ``df`` degrees of freedom.

    Q(df/2, x/2), the regularized upper incomplete gamma function.
    """
    if df <= 0:
        raise ValueError("df must be positive")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def ks_test(sample, cdf) -> KSResult:
    """One-sample Kolmogorov-Smirnov test with the asymptotic p-value.

    Parameters
    ----------
    sample : array-like
    cdf : callable
        Vectorized CDF of the hypothesised law.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.shape[0]
    if n < 1:
        raise ValueError("empty sample")
    u = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - u)), float(np.max(u - (i - 1) / n)))
    # Stephens' small-sample correction of the Kolmogorov argument
    sqn = math.sqrt(n)
    p = float(special.kolmogorov((sqn + 0.12 + 0.11 / sqn) * d))
    return KSResult(d, min(max(p, 0.0), 1.0))


def two_sample_ks(a, b) -> KSResult:
    """Two-sample KS test, asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    en = math.sqrt(a.size * b.size / (a.size + b.size))
    p = float(special.kolmogorov((en + 0.12 + 0.11 / en) * d))
    return KSResult(d, min(max(p, 0.0), 1.0))
