"""
Monte Carlo studies: estimator summaries (EM / ESD / ASD), sampling
distributions of the standardised estimators, and size/power of the stability
test.

Replication ``r`` of a cell draws from the stream ``(master_seed, key, r)``:
``key`` is the cell index for the estimation study and the histogram study,
and the sample-size index for the size/power study, so every alpha on a power
curve sees the same innovations (common random numbers).  Work is split into
fixed-size chunks of replications; chunks may run on several threads but
results are assembled in chunk order and reduced with ``math.fsum``, so the
output does not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_count, check_positive
from .innovations import Innovation, kurtosis
from .process import DarwinParams, simulate_darwin_batch
from .stats import ks_test, normal_cdf, normal_quantile
from .theory import asymptotic_sd, calibrate_alpha, lyapunov_moments

__all__ = [
    "CHUNK",
    "DEFAULT_ALPHAS",
    "PowerRow",
    "PowerTable",
    "SamplingDistribution",
    "StudyConfig",
    "StudyRow",
    "StudyTable",
    "default_power_grid",
    "replicate",
    "resolve_workers",
    "run_estimation_study",
    "run_size_power",
    "sampling_distribution",
]

CHUNK = 256
WORKERS_ENV = "DARWIN_WORKERS"

# (below, at, above) the stability boundary for phi = 0.5
DEFAULT_ALPHAS = {
    Innovation.GAUSSIAN: (3.1, 3.3058, 3.5),
    Innovation.T5STD: (4.1, 4.3697, 4.5),
    Innovation.LAPLACE: (5.0, 5.1726, 5.4),
}


def resolve_workers(workers: int | None) -> int:
    """Explicit value, else the DARWIN_WORKERS environment variable, else 1."""
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return check_count(workers, "workers")


@dataclass
class StudyConfig:
    kind: Innovation | str = Innovation.GAUSSIAN
    phi: float = 0.5
    alpha_list: tuple = ()
    n_list: tuple = (100, 200)
    replications: int = 1000
    master_seed: int = 1
    y0: str | float = "random"

    def __post_init__(self):
        self.kind = Innovation.parse(self.kind)
        if not self.alpha_list:
            self.alpha_list = DEFAULT_ALPHAS[self.kind]
        self.alpha_list = tuple(check_positive(a, "alpha") for a in self.alpha_list)
        self.n_list = tuple(check_count(n, "n", 2) for n in self.n_list)
        self.replications = check_count(self.replications, "replications")
        self.master_seed = int(self.master_seed)

    def cells(self):
        """Yield (cell_index, alpha, n) in table order."""
        idx = 0
        for alpha in self.alpha_list:
            for n in self.n_list:
                yield idx, alpha, n
                idx += 1

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind.value
        out["alpha_list"] = list(self.alpha_list)
        out["n_list"] = list(self.n_list)
        return out


def _chunk_estimates(params, kind, n, seeds, y0, coupled=False):
    r, _ = simulate_darwin_batch(params, kind, n, seeds, y0=y0, coupled=coupled)
    phi = r.mean(axis=1)
    dev = r - phi[:, None]
    alpha = (dev * dev).mean(axis=1)
    logs = np.log(np.abs(r))
    gamma = logs.mean(axis=1)
    cent = logs - gamma[:, None]
    sigma2 = (cent * cent).mean(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = math.sqrt(n) * gamma / np.sqrt(sigma2)
    ok = (alpha > 0) & (sigma2 > 0)
    return np.column_stack([phi, alpha, gamma, sigma2, t, ok.astype(float)])


def replicate(params: DarwinParams, kind, n: int, replications: int, key, master_seed: int,
              y0="random", workers: int | None = None, coupled: bool = False) -> np.ndarray:
    """Per-replication estimates for one cell.

    Returns an array of shape (replications, 6) with columns
    phi_hat, alpha_hat, gamma_hat, sigma2_hat, T_n, ok (1.0 unless degenerate).
    """
    kind = Innovation.parse(kind)
    key = tuple(key) if isinstance(key, (tuple, list)) else (int(key),)
    seeds = [(master_seed, *key, r) for r in range(replications)]
    chunks = [seeds[i : i + CHUNK] for i in range(0, len(seeds), CHUNK)]
    workers = resolve_workers(workers)
    if workers == 1 or len(chunks) == 1:
        parts = [_chunk_estimates(params, kind, n, c, y0, coupled) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _chunk_estimates(params, kind, n, c, y0, coupled), chunks))
    return np.concatenate(parts, axis=0)


def _em_esd(x) -> tuple[float, float]:
    m = len(x)
    if m == 0:
        return math.nan, math.nan
    mean = math.fsum(x) / m
    if m == 1:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in x) / (m - 1))


@dataclass
class StudyRow:
    kind: str
    alpha0: float
    gamma0: float
    sigma2: float
    n: int
    replications: int
    excluded: int
    em_phi: float
    esd_phi: float
    asd_phi: float
    em_alpha: float
    esd_alpha: float
    asd_alpha: float
    em_gamma: float
    esd_gamma: float
    asd_gamma: float
    em_alpha_star: float


@dataclass
class StudyTable:
    config: StudyConfig
    rows: list = field(default_factory=list)

    _COLUMNS = tuple(StudyRow.__dataclass_fields__)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed_scheme": "(master_seed, cell_index, replication)",
            "rows": [asdict(r) for r in self.rows],
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(self._COLUMNS)
        for row in self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(row).values()])
        return out.getvalue()

    def row(self, alpha0: float, n: int) -> StudyRow:
        for r in self.rows:
            if r.alpha0 == alpha0 and r.n == n:
                return r
        raise KeyError((alpha0, n))


def run_estimation_study(config: StudyConfig, workers: int | None = None) -> StudyTable:
    """Simulate every (alpha0, n) cell and summarise phi_hat, alpha_hat, gamma_hat."""
    table = StudyTable(config)
    profiles = {}
    for cell, alpha, n in config.cells():
        params = DarwinParams(config.phi, alpha)
        if alpha not in profiles:
            profiles[alpha] = lyapunov_moments(params, config.kind)
        prof = profiles[alpha]
        est = replicate(params, config.kind, n, config.replications, cell, config.master_seed, config.y0, workers)
        ok = est[:, 5] == 1.0
        good = est[ok]
        asd = asymptotic_sd(params, config.kind, n, prof.sigma2)
        em_phi, esd_phi = _em_esd(good[:, 0].tolist())
        em_alpha, esd_alpha = _em_esd(good[:, 1].tolist())
        em_gamma, esd_gamma = _em_esd(good[:, 2].tolist())
        table.rows.append(
            StudyRow(
                kind=config.kind.value,
                alpha0=alpha,
                gamma0=prof.gamma0,
                sigma2=prof.sigma2,
                n=n,
                replications=config.replications,
                excluded=int((~ok).sum()),
                em_phi=em_phi,
                esd_phi=esd_phi,
                asd_phi=asd.sd_phi,
                em_alpha=em_alpha,
                esd_alpha=esd_alpha,
                asd_alpha=asd.sd_alpha,
                em_gamma=em_gamma,
                esd_gamma=esd_gamma,
                asd_gamma=asd.sd_gamma,
                em_alpha_star=em_alpha * n / (n - 1),
            )
        )
    return table


@dataclass
class SamplingDistribution:
    """Standardised replicate values sqrt(n) (estimate - truth) for one cell."""

    target: str
    kind: str
    alpha0: float
    n: int
    values: list
    overlay_mean: float
    overlay_variance: float
    ks_stat: float
    ks_pvalue: float

    @property
    def mean(self) -> float:
        return math.fsum(self.values) / len(self.values)

    @property
    def mc_se(self) -> float:
        return math.sqrt(float(np.var(self.values, ddof=1)) / len(self.values))

    def histogram(self, bins: int = 30):
        counts, edges = np.histogram(self.values, bins=bins, density=True)
        return counts, edges


_TARGET_COLUMN = {"gamma_hat": 2, "phi_hat": 0, "alpha_hat": 1}


def sampling_distribution(config: StudyConfig, target: str = "gamma_hat", workers: int | None = None) -> list:
    """Histogram data with the N(0, v) overlay for each cell of ``config``.

    v is sigma2 for gamma_hat, alpha0 for phi_hat and (kappa4 - 1) alpha0^2
    for alpha_hat.  Cells use the same seed streams as the estimation study.
    """
    if target not in _TARGET_COLUMN:
        raise ValueError(f"target must be one of {sorted(_TARGET_COLUMN)}")
    col = _TARGET_COLUMN[target]
    out = []
    for cell, alpha, n in config.cells():
        params = DarwinParams(config.phi, alpha)
        prof = lyapunov_moments(params, config.kind)
        est = replicate(params, config.kind, n, config.replications, cell, config.master_seed, config.y0, workers)
        est = est[est[:, 5] == 1.0]
        truth = {0: config.phi, 1: alpha, 2: prof.gamma0}[col]
        var = {0: alpha, 1: (kurtosis(config.kind) - 1.0) * alpha * alpha, 2: prof.sigma2}[col]
        values = math.sqrt(n) * (est[:, col] - truth)
        ks = ks_test(values / math.sqrt(var), normal_cdf)
        out.append(
            SamplingDistribution(target, config.kind.value, alpha, n, values.tolist(), 0.0, var, ks.stat, ks.p)
        )
    return out


def default_power_grid(phi: float, kind, targets=None) -> list:
    """Alphas whose Lyapunov exponents are the ``targets`` (default 11 points on [-0.05, 0.05])."""
    if targets is None:
        targets = np.linspace(-0.05, 0.05, 11)
    return [calibrate_alpha(phi, kind, target=float(t)) for t in targets]


@dataclass
class PowerRow:
    kind: str
    alpha0: float
    gamma0: float
    n: int
    replications: int
    excluded: int
    rejections: int
    rate: float
    mc_se: float


@dataclass
class PowerTable:
    config: StudyConfig
    level: float
    coupled: bool = True
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "level": self.level,
            "seed_scheme": "(master_seed, n_index, replication), shared across alpha",
            "coupled": self.coupled,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        cols = list(PowerRow.__dataclass_fields__)
        w.writerow(cols)
        for row in self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(row).values()])
        return out.getvalue()

    def row(self, alpha0: float, n: int) -> PowerRow:
        for r in self.rows:
            if r.alpha0 == alpha0 and r.n == n:
                return r
        raise KeyError((alpha0, n))


def run_size_power(
    config: StudyConfig, level: float = 0.05, workers: int | None = None, coupled: bool = True
) -> PowerTable:
    """Rejection frequency of |T_n| > z_{1 - level/2} for every (alpha0, n).

    ``config.alpha_list`` is the power-curve grid; the row whose gamma0 is 0
    gives the empirical size.  ``level=1`` rejects every replication.  By
    default paths are sign-coupled across the grid (see
    :func:`darwin.process.simulate_darwin_batch`), which leaves each point
    exact in law and makes the curve much smoother.
    """
    if not 0 < level <= 1:
        raise ValueError("level must be in (0, 1]")
    crit = normal_quantile(1.0 - level / 2.0) if level < 1 else 0.0
    table = PowerTable(config, level, coupled)
    for alpha in config.alpha_list:
        params = DarwinParams(config.phi, alpha)
        gamma0 = lyapunov_moments(params, config.kind).gamma0
        for n_index, n in enumerate(config.n_list):
            est = replicate(
                params, config.kind, n, config.replications, n_index, config.master_seed, config.y0, workers, coupled
            )
            ok = est[:, 5] == 1.0
            t = est[ok, 4]
            rej = int(np.sum(np.abs(t) >= crit)) if level == 1 else int(np.sum(np.abs(t) > crit))
            m = int(ok.sum())
            rate = rej / m if m else math.nan
            table.rows.append(
                PowerRow(config.kind.value, alpha, gamma0, n, config.replications, int((~ok).sum()), rej, rate,
                         math.sqrt(rate * (1 - rate) / m) if m else math.nan)
            )
    return table
