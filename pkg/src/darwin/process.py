"""
Exact simulation of the DARWIN(1) recursion and its positive auxiliary chain.

Paths are stored in log-sign form.  For the model
``y_t = phi * y_{t-1} + eta_t * sqrt(alpha * y_{t-1}**2)`` one step reads

    |y_t| = |y_{t-1}| * |phi * s_{t-1} + eta_t * sqrt(alpha)|
    s_t   = sign(phi * s_{t-1} + eta_t * sqrt(alpha))

with ``s_t = sign(y_t)``, so explosive or vanishing paths never overflow and
the ratio ``y_t / y_{t-1} = s_{t-1} * (phi * s_{t-1} + eta_t sqrt(alpha))``
is available exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._validation import check_count, check_positive, check_series
from .exceptions import DataError, PathOverflowError
from .innovations import Innovation, SeedLike, make_rng, sample

__all__ = [
    "DarParams",
    "DarwinParams",
    "LevelOverflowWarning",
    "Path",
    "lagged_signs",
    "ratios",
    "simulate_auxiliary",
    "simulate_dar",
    "simulate_darwin",
    "simulate_darwin_batch",
    "to_levels",
]

# exp() of anything above this overflows a double
_LOG_MAX = math.log(np.finfo(float).max)
_LOG_TINY = math.log(np.finfo(float).tiny)


class LevelOverflowWarning(RuntimeWarning):
    """Some levels were saturated to +-inf (or flushed to zero) on conversion."""


@dataclass(frozen=True)
class DarwinParams:
    """Parameters (phi, alpha) of the model without intercept."""

    phi: float
    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")
        check_positive(self.alpha, "alpha")

    @property
    def theta(self) -> np.ndarray:
        return np.array([self.phi, self.alpha])


@dataclass(frozen=True)
class DarParams:
    """Parameters (phi, omega, alpha) of the double AR(1) model with intercept."""

    phi: float
    omega: float
    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")
        check_positive(self.omega, "omega", strict=False)
        check_positive(self.alpha, "alpha", strict=False)
        if self.omega + self.alpha <= 0:
            raise ValueError("omega + alpha must be > 0")


def _seed_repr(seed: SeedLike) -> Any:
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    if isinstance(seed, tuple):
        return [int(s) for s in seed]
    return None


@dataclass(frozen=True, eq=False)
class Path:
    """A trajectory y_0..y_n in log-sign form.

    Attributes
    ----------
    signs : ndarray of int8, shape (n + 1,)
    logabs : ndarray of float, shape (n + 1,)
        Natural log of |y_t|.
    meta : dict
        Parameters, innovation law, seed and initial-value policy.
    """

    signs: np.ndarray
    logabs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=np.int8)
        logabs = np.asarray(self.logabs, dtype=float)
        if signs.shape != logabs.shape or signs.ndim != 1:
            raise ValueError("signs and logabs must be 1-D arrays of equal length")
        if not np.all(np.isfinite(logabs)):
            raise ValueError("logabs must be finite")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +1 or -1")
        signs.setflags(write=False)
        logabs.setflags(write=False)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "logabs", logabs)

    def __len__(self) -> int:
        return self.logabs.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Path):
            return NotImplemented
        return (
            np.array_equal(self.signs, other.signs)
            and np.array_equal(self.logabs, other.logabs)
            and self.meta == other.meta
        )

    @property
    def n(self) -> int:
        """Number of transitions (observations after y_0)."""
        return len(self) - 1

    def to_csv(self, fh=None) -> str | None:
        """Write columns t, sign, logabs, level; level is blank when not representable."""
        out = fh if fh is not None else io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t", "sign", "logabs", "level"])
        for t, (s, la) in enumerate(zip(self.signs, self.logabs)):
            level = repr(float(s) * math.exp(la)) if _LOG_TINY < la < _LOG_MAX else ""
            writer.writerow([t, int(s), repr(float(la)), level])
        return out.getvalue() if fh is None else None

    def to_dict(self) -> dict:
        return {
            "meta": self.meta,
            "signs": [int(s) for s in self.signs],
            "logabs": [float(v) for v in self.logabs],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "Path":
        return cls(np.asarray(data["signs"]), np.asarray(data["logabs"]), dict(data.get("meta", {})))

    @classmethod
    def from_json(cls, text: str) -> "Path":
        return cls.from_dict(json.loads(text))


def _initial_value(y0, rng: np.random.Generator) -> float:
    if isinstance(y0, str):
        if y0 != "random":
            raise ValueError(f"unknown y0 policy {y0!r}; use 'random' or a nonzero number")
        value = rng.standard_normal()
        while value == 0.0:  # probability zero, kept for the contract
            value = rng.standard_normal()
        return float(value)
    value = float(y0)
    if value == 0.0 or not math.isfinite(value):
        raise ValueError("y0 must be finite and nonzero")
    return value


def _draws(kind, n, rng, innovations):
    if innovations is None:
        return sample(kind, n, rng)
    eta = np.asarray(innovations, dtype=float)
    if eta.ndim != 1 or eta.shape[0] != n:
        raise ValueError(f"injected innovations must have shape ({n},), got {eta.shape}")
    return eta


def _darwin_factors(phi: float, sqrt_alpha: float, eta: np.ndarray, sign0, coupled: bool = False) -> np.ndarray:
    """Return f_t = phi * s_{t-1} + eta_t sqrt(alpha) along the last axis.

    Works for a single path (eta 1-D, sign0 scalar) or a batch (eta of shape
    (R, n), sign0 of shape (R,)).  Each row only depends on its own inputs.
    With ``coupled=True`` the innovation actually used is eta_t * s_{t-1}.
    """
    eta = np.asarray(eta, dtype=float)
    factors = np.empty_like(eta)
    s = np.asarray(sign0, dtype=float).copy()
    scaled = eta * sqrt_alpha
    for t in range(eta.shape[-1]):
        if coupled:
            f = s * (phi + scaled[..., t])
        else:
            f = phi * s + scaled[..., t]
        factors[..., t] = f
        s = np.sign(f)
    bad = (factors == 0.0) | ~np.isfinite(factors)
    if np.any(bad):
        where = np.argwhere(bad)[0]
        raise DataError(f"degenerate step factor {factors[tuple(where)]!r} at step {int(where[-1]) + 1}")
    return factors


def simulate_darwin(
    params: DarwinParams,
    kind: Innovation | str = Innovation.GAUSSIAN,
    n: int | None = None,
    y0: float | str = "random",
    seed: SeedLike = None,
    innovations=None,
) -> Path:
    """Simulate y_0..y_n from the model without intercept.

    Parameters
    ----------
    params : DarwinParams
    kind : Innovation or str
    n : int
        Number of steps.  Inferred from ``innovations`` when those are given.
    y0 : float or "random"
        Initial value; "random" draws a standard normal from the seed stream
        before any innovation is drawn.
    seed : seed-like
    innovations : array-like, optional
        Inject eta_1..eta_n instead of sampling them (testing hook).
    """
    kind = Innovation.parse(kind)
    if n is None:
        if innovations is None:
            raise ValueError("n is required unless innovations are injected")
        n = len(innovations)
    n = check_count(n, "n")
    rng = make_rng(seed)
    y_init = _initial_value(y0, rng)
    eta = _draws(kind, n, rng, innovations)
    factors = _darwin_factors(params.phi, math.sqrt(params.alpha), eta, math.copysign(1.0, y_init))

    signs = np.empty(n + 1, dtype=np.int8)
    signs[0] = 1 if y_init > 0 else -1
    signs[1:] = np.sign(factors)
    logabs = np.empty(n + 1)
    logabs[0] = math.log(abs(y_init))
    logabs[1:] = logabs[0] + np.cumsum(np.log(np.abs(factors)))
    meta = {
        "model": "darwin",
        "phi": params.phi,
        "alpha": params.alpha,
        "innovation": kind.value,
        "n": n,
        "y0": y0 if isinstance(y0, str) else float(y0),
        "y0_value": y_init,
        "seed": _seed_repr(seed),
        "injected": innovations is not None,
    }
    return Path(signs, logabs, meta)


def simulate_auxiliary(
    params: DarwinParams,
    kind: Innovation | str = Innovation.GAUSSIAN,
    n: int | None = None,
    x0: float | str = 1.0,
    seed: SeedLike = None,
    innovations=None,
) -> Path:
    """Simulate the positive chain x_t = |phi + eta_t sqrt(alpha)| * x_{t-1}.

    ``x0="random"`` uses |Z| for a standard normal Z, i.e. x_0 = |y_0| under
    the default initial-value policy of :func:`simulate_darwin`.
    """
    kind = Innovation.parse(kind)
    if n is None:
        if innovations is None:
            raise ValueError("n is required unless innovations are injected")
        n = len(innovations)
    n = check_count(n, "n")
    rng = make_rng(seed)
    if isinstance(x0, str):
        x_init = abs(_initial_value(x0, rng))
    else:
        x_init = float(x0)
        if not x_init > 0 or not math.isfinite(x_init):
            raise ValueError("x0 must be finite and > 0")
    eta = _draws(kind, n, rng, innovations)
    steps = np.log(np.abs(params.phi + eta * math.sqrt(params.alpha)))
    if not np.all(np.isfinite(steps)):
        raise DataError("degenerate step factor in auxiliary chain")
    logabs = np.empty(n + 1)
    logabs[0] = math.log(x_init)
    logabs[1:] = logabs[0] + np.cumsum(steps)
    meta = {
        "model": "auxiliary",
        "phi": params.phi,
        "alpha": params.alpha,
        "innovation": kind.value,
        "n": n,
        "x0": x0 if isinstance(x0, str) else float(x0),
        "x0_value": x_init,
        "seed": _seed_repr(seed),
        "injected": innovations is not None,
    }
    return Path(np.ones(n + 1, dtype=np.int8), logabs, meta)


def simulate_darwin_batch(
    params: DarwinParams,
    kind: Innovation | str,
    n: int,
    seeds,
    y0: float | str = "random",
    coupled: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate one path per seed and return the estimator inputs.

    With ``coupled=True`` the stream's draws eps_t enter as
    eta_t = eps_t * sign(y_{t-1}).  For a symmetric law eta is still i.i.d.
    with that law, so each path is an exact draw of the model, and the ratio
    sequence becomes phi + eps_t sqrt(alpha) for every alpha.  That couples
    paths across alpha (common random numbers for power curves).

    Returns
    -------
    ratios : ndarray, shape (R, n)
        y_t / y_{t-1} for each replication.
    lag_signs : ndarray, shape (R, n)
        sign(y_{t-1}).

    Row ``i`` equals ``ratios(simulate_darwin(..., seed=seeds[i]))`` up to
    rounding (the path form goes through exp/log), because every replication
    draws from its own stream in the same order.
    """
    kind = Innovation.parse(kind)
    n = check_count(n, "n")
    seeds = list(seeds)
    eta = np.empty((len(seeds), n))
    sign0 = np.empty(len(seeds))
    for i, seed in enumerate(seeds):
        rng = make_rng(seed)
        sign0[i] = math.copysign(1.0, _initial_value(y0, rng))
        eta[i] = sample(kind, n, rng)
    factors = _darwin_factors(params.phi, math.sqrt(params.alpha), eta, sign0, coupled)
    lag = np.empty_like(factors)
    lag[:, 0] = sign0
    lag[:, 1:] = np.sign(factors[:, :-1])
    return lag * factors, lag


def simulate_dar(
    params: DarParams,
    kind: Innovation | str = Innovation.GAUSSIAN,
    n: int = 1000,
    y0: float | str = "random",
    seed: SeedLike = None,
) -> np.ndarray:
    """Simulate levels from the double AR(1) model with intercept.

    Only meant for the stationary case used to exercise the comparison fitter;
    levels are returned directly.
    """
    n = check_count(n, "n")
    rng = make_rng(seed)
    y = np.empty(n + 1)
    y[0] = _initial_value(y0, rng)
    eta = sample(kind, n, rng)
    for t in range(1, n + 1):
        prev = y[t - 1]
        y[t] = params.phi * prev + eta[t - 1] * math.sqrt(params.omega + params.alpha * prev * prev)
    return y


def ratios(data) -> np.ndarray:
    """Return r_t = y_t / y_{t-1}, t = 1..n, from a Path or an observed series."""
    if isinstance(data, Path):
        if len(data) < 2:
            raise DataError("path needs at least two points")
        s = data.signs.astype(float)
        return s[1:] * s[:-1] * np.exp(np.diff(data.logabs))
    y = check_series(data)
    return y[1:] / y[:-1]


def lagged_signs(data) -> np.ndarray:
    """Return sign(y_{t-1}), t = 1..n."""
    if isinstance(data, Path):
        return data.signs[:-1].astype(float)
    y = check_series(data)
    return np.sign(y[:-1])


def log_abs_ratios(data) -> np.ndarray:
    """Return log|y_t / y_{t-1}| without forming the ratio for a Path."""
    if isinstance(data, Path):
        return np.diff(data.logabs)
    y = check_series(data)
    return np.log(np.abs(y[1:])) - np.log(np.abs(y[:-1]))


def to_levels(path: Path, overflow: str = "error") -> np.ndarray:
    """Convert a Path to levels y_t = sign_t * exp(logabs_t).

    Parameters
    ----------
    overflow : {"error", "saturate"}
        "error" raises :class:`PathOverflowError` if any |y_t| is outside the
        double range.  "saturate" returns +-inf (or a signed zero on
        underflow) for those entries and emits :class:`LevelOverflowWarning`.
    """
    if overflow not in ("error", "saturate"):
        raise ValueError("overflow must be 'error' or 'saturate'")
    too_big = path.logabs >= _LOG_MAX
    too_small = path.logabs <= _LOG_TINY
    bad = too_big | too_small
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        msg = f"level at t={first} (logabs={path.logabs[first]!r}) is not representable"
        if overflow == "error":
            raise PathOverflowError(msg)
        warnings.warn(f"{int(bad.sum())} level(s) saturated; first: {msg}", LevelOverflowWarning, stacklevel=2)
    with np.errstate(over="ignore", under="ignore"):
        return path.signs * np.exp(path.logabs)
