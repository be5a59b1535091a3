import math

import numpy as np
import pytest
from scipy import integrate

from darwin import theory
from darwin.exceptions import NoStabilityBoundaryError
from darwin.innovations import Innovation
from darwin.process import DarwinParams
from darwin.reference import LYAPUNOV_TABLE, compare
from darwin.theory import (
    asymptotic_sd,
    calibrate_alpha,
    clt_path_check,
    lyapunov_exponent,
    lyapunov_moments,
)

EULER = 0.5772156649015329

# E log|eta| in closed form: Gaussian -(gamma_E + log 2)/2; Laplace with
# |eta| ~ Exp(rate sqrt 2): -gamma_E - log sqrt 2.
LOG_ABS_MEAN = {
    Innovation.GAUSSIAN: -(EULER + math.log(2)) / 2,
    Innovation.LAPLACE: -EULER - 0.5 * math.log(2),
}


@pytest.mark.parametrize("kind", list(LOG_ABS_MEAN))
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 4.0])
def test_closed_form_at_phi_zero(kind, alpha):
    assert lyapunov_exponent(0.0, alpha, kind) == pytest.approx(0.5 * math.log(alpha) + LOG_ABS_MEAN[kind], abs=1e-9)


def test_gaussian_log_variance_at_phi_zero():
    # var log|Z| = pi^2 / 8
    assert lyapunov_moments(DarwinParams(0.0, 1.0)).sigma2 == pytest.approx(math.pi**2 / 8, abs=1e-9)


@pytest.mark.parametrize("kind", list(Innovation))
def test_translation_law_at_phi_zero(kind):
    vals = [lyapunov_exponent(0.0, a, kind) - 0.5 * math.log(a) for a in (0.5, 1.0, 2.0, 4.0)]
    assert max(vals) - min(vals) < 1e-9
    sig = [lyapunov_moments(DarwinParams(0.0, a), kind).sigma2 for a in (0.5, 4.0)]
    assert sig[0] == pytest.approx(sig[1], abs=1e-9)


def test_quadrature_against_plain_integration():
    # independent oracle: brute-force trapezoid on a fine grid avoiding the singularity
    phi, alpha = 0.5, 3.3058
    xs = -phi / math.sqrt(alpha)
    f = lambda x: math.log(abs(phi + x * math.sqrt(alpha))) * math.exp(-x * x / 2) / math.sqrt(2 * math.pi)
    pieces = [(-12, xs), (xs, 12)]
    total = sum(integrate.quad(f, a, b, limit=400, points=None)[0] for a, b in pieces)
    assert lyapunov_exponent(phi, alpha) == pytest.approx(total, abs=1e-9)


@pytest.mark.parametrize("key", list(LYAPUNOV_TABLE))
def test_table_values(key):
    kind, alpha = key
    g, s2 = LYAPUNOV_TABLE[key]
    prof = lyapunov_moments(DarwinParams(0.5, alpha), kind)
    assert prof.gamma0 == pytest.approx(g, abs=5e-4)
    assert prof.sigma2 == pytest.approx(s2, abs=5e-3)
    assert compare(prof) == []


@pytest.mark.parametrize("key", list(LYAPUNOV_TABLE)[::4])
def test_quadrature_agrees_with_monte_carlo(key):
    kind, alpha = key
    p = DarwinParams(0.5, alpha)
    q = lyapunov_moments(p, kind)
    mc = lyapunov_moments(p, kind, method="montecarlo", n_draws=2_000_000, seed=3)
    assert abs(q.gamma0 - mc.gamma0) < 4 * mc.err_estimate
    assert mc.sigma2 == pytest.approx(q.sigma2, rel=0.01)


def test_monte_carlo_is_deterministic():
    p = DarwinParams(0.5, 3.1)
    a = lyapunov_moments(p, method="montecarlo", n_draws=1_500_000, seed=4)
    b = lyapunov_moments(p, method="montecarlo", n_draws=1_500_000, seed=4)
    assert a == b


def test_quadrature_fallback(monkeypatch):
    def boom(*args):
        raise integrate.IntegrationWarning("forced")

    monkeypatch.setattr(theory, "_log_moment", boom)
    with pytest.warns(RuntimeWarning, match="Monte Carlo"):
        prof = lyapunov_moments(DarwinParams(0.5, 3.3), n_draws=200_000)
    assert prof.fallback and prof.method == "montecarlo"


def test_compare_flags_deviation():
    prof = lyapunov_moments(DarwinParams(0.5, 3.1))
    shifted = theory.LyapunovProfile(prof.gamma0 + 0.01, prof.sigma2, "quadrature", 0.0, 0.5, 3.1, "gaussian")
    assert len(compare(shifted)) == 1


@pytest.mark.parametrize("phi", [0.0, 0.3, 0.5, 0.8])
@pytest.mark.parametrize("kind", list(Innovation))
def test_calibration_round_trip(phi, kind):
    a = calibrate_alpha(phi, kind)
    assert abs(lyapunov_moments(DarwinParams(phi, a), kind).gamma0) < 1e-5


def test_calibration_closed_form_at_phi_zero():
    # gamma0 = 0.5 log alpha + E log|Z| = 0  =>  alpha = exp(gamma_E + log 2)
    assert calibrate_alpha(0.0) == pytest.approx(math.exp(EULER + math.log(2)), rel=1e-8)


def test_calibration_target_and_expansion():
    a = calibrate_alpha(0.5, target=0.03, bracket=(5.0, 6.0))
    assert lyapunov_exponent(0.5, a) == pytest.approx(0.03, abs=1e-8)


def test_no_boundary():
    with pytest.raises(NoStabilityBoundaryError):
        calibrate_alpha(3.0, max_expand=2)
    with pytest.raises(ValueError):
        calibrate_alpha(0.5, bracket=(2.0, 1.0))


def test_asymptotic_sd_values():
    sd = asymptotic_sd(DarwinParams(0.5, 3.3058), "gaussian", 100)
    assert (round(sd.sd_phi, 4), round(sd.sd_alpha, 4), round(sd.sd_gamma, 4)) == (0.1818, 0.4675, 0.1110)
    assert round(asymptotic_sd(DarwinParams(0.5, 4.3697), "t5std", 100).sd_alpha, 4) == 1.2359
    big = asymptotic_sd(DarwinParams(0.5, 3.3058), "gaussian", 400, sigma2=1.2)
    small = asymptotic_sd(DarwinParams(0.5, 3.3058), "gaussian", 100, sigma2=1.2)
    np.testing.assert_allclose(np.array(big) * 2, np.array(small), rtol=1e-15)


def test_clt_small():
    rep = clt_path_check(DarwinParams(0.5, 3.3058), n=500, replications=500, seed=2)
    assert all(rep.passed)
    assert max(rep.variance_rel_error) < 0.2
    assert max(abs(c) for c in rep.increment_corr) < 0.15
    d = rep.to_dict()
    assert d["n"] == 500 and len(d["variance_rel_error"]) == 4


def test_clt_rejects_bad_grid():
    with pytest.raises(ValueError):
        clt_path_check(DarwinParams(0.5, 3.3), n=10, replications=5, s_grid=(0.5, 0.25))
