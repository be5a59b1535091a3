"""
Symmetric, unit-variance innovation laws.

Three laws are supported: the standard normal, the Student t with five
degrees of freedom rescaled to unit variance, and the Laplace law with scale
``1/sqrt(2)``.  Each comes with its exact density and fourth moment.

Random streams are addressed by a counter-style seed: ``(master, i, j, ...)``
maps onto ``numpy.random.SeedSequence(master, spawn_key=(i, j, ...))`` so that
any replication of any Monte Carlo cell can be regenerated on its own.
"""

from __future__ import annotations

import enum
import math
from typing import Union

import numpy as np

__all__ = [
    "Innovation",
    "SeedLike",
    "density",
    "kurtosis",
    "make_rng",
    "sample",
]

SeedLike = Union[int, tuple, np.random.SeedSequence, np.random.Generator, None]

_T5_SCALE = math.sqrt(3.0 / 5.0)
_T5_NORM = 8.0 / (3.0 * math.pi * math.sqrt(3.0))
_LAPLACE_SCALE = 1.0 / math.sqrt(2.0)
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class Innovation(str, enum.Enum):
    """Innovation law.  Values are the configuration names."""

    GAUSSIAN = "gaussian"
    T5STD = "t5std"
    LAPLACE = "laplace"

    @classmethod
    def parse(cls, value: "Innovation | str") -> "Innovation":
        """Accept an ``Innovation`` or a case-insensitive configuration name."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"normal": "gaussian", "t5": "t5std", "st5": "t5std"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown innovation kind {value!r}; expected one of {names}") from None

    def __str__(self) -> str:
        return self.value


_KURTOSIS = {
    Innovation.GAUSSIAN: 3.0,
    Innovation.T5STD: 9.0,
    Innovation.LAPLACE: 6.0,
}


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Build a PCG64 generator from a seed.

    Parameters
    ----------
    seed : int, tuple of int, SeedSequence, Generator or None
        A tuple ``(master, k1, k2, ...)`` selects the independent stream
        ``SeedSequence(master, spawn_key=(k1, k2, ...))``.  A ``Generator`` is
        returned unchanged so callers can thread one stream through several
        draws.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, tuple):
        if not seed:
            raise ValueError("seed tuple must contain at least the master seed")
        ss = np.random.SeedSequence(int(seed[0]), spawn_key=tuple(int(k) for k in seed[1:]))
        return np.random.Generator(np.random.PCG64(ss))
    return np.random.default_rng(seed)


def sample(kind: Innovation | str, n: int, seed: SeedLike = None) -> np.ndarray:
    """Draw ``n`` i.i.d. innovations.

    Student t5 draws are ``Z / sqrt(V / 5)`` with ``V ~ chi2(5)``, multiplied
    by ``sqrt(3/5)``.  Laplace draws use the inverse CDF of the exponential
    law for the magnitude and an independent fair sign.
    """
    kind = Innovation.parse(kind)
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    if kind is Innovation.GAUSSIAN:
        return rng.standard_normal(n)
    if kind is Innovation.T5STD:
        z = rng.standard_normal(n)
        v = rng.chisquare(5.0, n)
        return _T5_SCALE * z / np.sqrt(v / 5.0)
    # 1 - U lies in (0, 1], so the log is finite
    u = 1.0 - rng.random(n)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return sign * (-_LAPLACE_SCALE * np.log(u))


def density(kind: Innovation | str, x):
    """Density of the innovation law at ``x`` (scalar or array)."""
    kind = Innovation.parse(kind)
    x = np.asarray(x, dtype=float)
    if kind is Innovation.GAUSSIAN:
        out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    elif kind is Innovation.T5STD:
        out = _T5_NORM * (1.0 + x * x / 3.0) ** -3
    else:
        out = _LAPLACE_SCALE * np.exp(-_SQRT2 * np.abs(x))
    return float(out) if out.ndim == 0 else out


def kurtosis(kind: Innovation | str) -> float:
    """Fourth moment E[eta^4] (3, 9 and 6 for the three laws)."""
    return _KURTOSIS[Innovation.parse(kind)]
