"""CSV ingestion of observed series and CSV/JSON writers."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path as FsPath

import numpy as np

from ._validation import check_series
from .exceptions import DataError

__all__ = ["IngestConfig", "dumps_json", "load_series", "rows_to_csv"]

_NA = {"", "na", "nan", "null", "none", "."}
TRANSFORMS = ("none", "logret", "logret_pct")


@dataclass(frozen=True)
class IngestConfig:
    """Where to read a series from and how to turn it into y_0..y_n.

    ``transform`` is "none" (use the values as they are), "logret"
    (log(p_t / p_{t-1})) or "logret_pct" (100 times the log return).
    The CSV dialect is fixed: comma separated, header row, dot decimals.
    """

    path: str
    column: str | int = 0
    transform: str = "none"
    drop_na: bool = True

    def __post_init__(self):
        if self.transform not in TRANSFORMS:
            raise ValueError(f"transform must be one of {TRANSFORMS}, got {self.transform!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def _read_column(cfg: IngestConfig) -> tuple[np.ndarray, list[int]]:
    path = FsPath(cfg.path)
    if not path.is_file():
        raise DataError(f"no such file: {cfg.path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{cfg.path} is empty") from None
        header = [h.strip() for h in header]
        col = cfg.column
        if isinstance(col, str) and not col.lstrip("-").isdigit():
            if col not in header:
                raise DataError(f"column {col!r} not in header {header}")
            idx = header.index(col)
        else:
            idx = int(col)
            if not -len(header) <= idx < len(header):
                raise DataError(f"column index {idx} out of range for {len(header)} columns")
        values, lines = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            cell = row[idx].strip() if idx < len(row) else ""
            if cell.lower() in _NA:
                if cfg.drop_na:
                    continue
                raise DataError(f"missing value at row {lineno}")
            try:
                values.append(float(cell))
            except ValueError:
                raise DataError(f"non-numeric cell {cell!r} at row {lineno}") from None
            lines.append(lineno)
    return np.asarray(values, dtype=float), lines


def load_series(cfg: IngestConfig) -> np.ndarray:
    """Read one column and apply the transform.

    Return transforms shorten the series by one.  Any zero in the output
    (a zero value, or two equal consecutive prices) is rejected with the
    offending file row.
    """
    raw, lines = _read_column(cfg)
    if cfg.transform == "none":
        y, out_lines = raw, lines
    else:
        bad = np.flatnonzero(~(raw > 0))
        if bad.size:
            raise DataError(f"nonpositive price {raw[bad[0]]!r} at row {lines[bad[0]]} (log returns need prices > 0)")
        y = np.diff(np.log(raw))
        if cfg.transform == "logret_pct":
            y = 100.0 * y
        out_lines = lines[1:]
    zeros = np.flatnonzero(y == 0.0)
    if zeros.size:
        what = "zero value" if cfg.transform == "none" else "zero return"
        raise DataError(f"{what} at row {out_lines[zeros[0]]}")
    return check_series(y, name=cfg.path)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps_json(obj) -> str:
    """Deterministic JSON: NaN/inf become null, floats keep full precision."""
    return json.dumps(_clean(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def rows_to_csv(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])
    return out.getvalue()
