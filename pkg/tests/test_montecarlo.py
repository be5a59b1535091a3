import math

import numpy as np
import pytest

from darwin.estimate import lyapunov_estimate, qmle_fit
from darwin.montecarlo import (
    StudyConfig,
    default_power_grid,
    replicate,
    resolve_workers,
    run_estimation_study,
    run_size_power,
    sampling_distribution,
)
from darwin.process import DarwinParams, simulate_darwin
from darwin.theory import lyapunov_exponent

P = DarwinParams(0.5, 3.3058)


def test_replicate_rows_match_single_path_estimators():
    est = replicate(P, "laplace", 80, 5, key=(3,), master_seed=9)
    for r in range(5):
        path = simulate_darwin(P, "laplace", 80, seed=(9, 3, r))
        fit, rep = qmle_fit(path), lyapunov_estimate(path)
        np.testing.assert_allclose(
            est[r, :5], [fit.phi_hat, fit.alpha_hat, rep.gamma_hat, rep.sigma2_hat, rep.t_stat], rtol=1e-9, atol=1e-12
        )
        assert est[r, 5] == 1.0


@pytest.mark.parametrize("workers", [2, 5])
def test_worker_count_does_not_change_results(workers):
    cfg = StudyConfig("t5std", alpha_list=(4.3697,), n_list=(60,), replications=700, master_seed=4)
    a = run_estimation_study(cfg, workers=1)
    b = run_estimation_study(cfg, workers=workers)
    assert a.to_csv() == b.to_csv()
    pa = run_size_power(cfg, workers=1)
    pb = run_size_power(cfg, workers=workers)
    assert pa.to_csv() == pb.to_csv()


def test_env_workers(monkeypatch):
    monkeypatch.setenv("DARWIN_WORKERS", "3")
    assert resolve_workers(None) == 3
    assert resolve_workers(2) == 2
    monkeypatch.delenv("DARWIN_WORKERS")
    assert resolve_workers(None) == 1
    with pytest.raises(ValueError):
        resolve_workers(0)


def test_single_replication():
    cfg = StudyConfig("gaussian", alpha_list=(3.1,), n_list=(50,), replications=1)
    row = run_estimation_study(cfg).rows[0]
    assert row.esd_phi == 0.0 and row.esd_alpha == 0.0 and row.esd_gamma == 0.0
    assert math.isfinite(row.em_phi)


def test_study_table_layout():
    cfg = StudyConfig("gaussian", n_list=(50, 100), replications=50)
    table = run_estimation_study(cfg)
    assert [(r.alpha0, r.n) for r in table.rows] == [(a, n) for a in (3.1, 3.3058, 3.5) for n in (50, 100)]
    row = table.row(3.3058, 100)
    assert row.asd_phi == pytest.approx(math.sqrt(3.3058 / 100))
    assert row.em_alpha_star == pytest.approx(row.em_alpha * 100 / 99)
    assert table.to_csv().splitlines()[0].startswith("kind,alpha0,gamma0")
    with pytest.raises(KeyError):
        table.row(9.9, 100)


def test_power_table_and_level_one():
    cfg = StudyConfig("gaussian", alpha_list=(3.3058,), n_list=(100,), replications=300)
    row = run_size_power(cfg, level=1.0).rows[0]
    assert row.rate == 1.0
    row = run_size_power(cfg, level=0.05).rows[0]
    assert row.rejections == round(row.rate * (row.replications - row.excluded))
    assert row.mc_se == pytest.approx(math.sqrt(row.rate * (1 - row.rate) / 300))


def test_coupled_and_uncoupled_sizes_agree():
    cfg = StudyConfig("gaussian", alpha_list=(3.3058,), n_list=(200,), replications=3000, master_seed=5)
    a = run_size_power(cfg, coupled=True).rows[0]
    b = run_size_power(cfg, coupled=False).rows[0]
    assert abs(a.rate - b.rate) < 4 * math.hypot(a.mc_se, b.mc_se)


def test_default_power_grid():
    grid = default_power_grid(0.5, "gaussian")
    assert len(grid) == 11
    assert lyapunov_exponent(0.5, grid[5]) == pytest.approx(0.0, abs=1e-8)
    assert lyapunov_exponent(0.5, grid[0]) == pytest.approx(-0.05, abs=1e-8)
    assert all(b > a for a, b in zip(grid, grid[1:]))


def test_sampling_distribution():
    cfg = StudyConfig("gaussian", alpha_list=(3.3058,), n_list=(200,), replications=600)
    (d,) = sampling_distribution(cfg, "gamma_hat")
    assert len(d.values) == 600
    assert d.overlay_variance == pytest.approx(1.2328, abs=1e-3)
    assert abs(d.mean) < 4 * d.mc_se
    counts, edges = d.histogram(20)
    assert np.sum(counts * np.diff(edges)) == pytest.approx(1.0)
    (p,) = sampling_distribution(cfg, "alpha_hat")
    assert p.overlay_variance == pytest.approx(2 * 3.3058**2)
    with pytest.raises(ValueError):
        sampling_distribution(cfg, "kappa")


def test_config_validation():
    with pytest.raises(ValueError):
        StudyConfig("gaussian", alpha_list=(-1.0,))
    with pytest.raises(ValueError):
        StudyConfig("gaussian", n_list=(1,))
    with pytest.raises(ValueError):
        run_size_power(StudyConfig(replications=2), level=0.0)
