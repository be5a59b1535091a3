"""Input validation helpers shared by estimators and simulators."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DataError


def check_series(y, *, min_length: int = 2, name: str = "y") -> np.ndarray:
    """Validate an observed series y_0..y_n and return it as a float vector.

    The series must be one-dimensional (a single column is accepted), finite,
    and free of exact zeros, since every estimator works with y_t / y_{t-1}.
    """
    if hasattr(y, "logabs") and hasattr(y, "signs"):
        raise TypeError("pass a Path through ratios()/lagged_signs() instead of check_series")
    try:
        arr = check_array(
            np.asarray(y, dtype=float).reshape(-1, 1) if np.ndim(y) <= 1 else y,
            ensure_2d=True,
            ensure_all_finite=True,
            ensure_min_samples=1,
            dtype=np.float64,
        )
    except ValueError as exc:
        raise DataError(f"{name}: {exc}") from None
    if arr.shape[1] != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr = arr[:, 0]
    if arr.shape[0] < min_length:
        raise DataError(f"{name} needs at least {min_length} observations, got {arr.shape[0]}")
    zeros = np.flatnonzero(arr == 0.0)
    if zeros.size:
        raise DataError(f"{name} has an exact zero at index {int(zeros[0])}")
    return arr


def check_positive(value: float, name: str, *, strict: bool = True) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0 or (strict and value == 0):
        bound = "> 0" if strict else ">= 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value!r}")
    return value


def check_count(value: int, name: str, minimum: int = 1) -> int:
    if int(value) != value or int(value) < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
