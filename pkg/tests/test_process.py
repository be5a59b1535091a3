import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darwin.exceptions import DataError, PathOverflowError
from darwin.process import (
    DarParams,
    DarwinParams,
    LevelOverflowWarning,
    Path,
    lagged_signs,
    log_abs_ratios,
    ratios,
    simulate_auxiliary,
    simulate_dar,
    simulate_darwin,
    simulate_darwin_batch,
    to_levels,
)
from darwin.stats import two_sample_ks

P = DarwinParams(0.5, 3.3058)


def direct_levels(phi, alpha, y0, eta):
    """Level recursion straight from the model definition."""
    y = [y0]
    for e in eta:
        y.append(phi * y[-1] + e * math.sqrt(alpha * y[-1] ** 2))
    return np.array(y)


def test_hand_step_sign():
    # y0 = -1, eta = 1: y1 = -0.5 + 2 = 1.5
    path = simulate_darwin(DarwinParams(0.5, 4.0), innovations=[1.0], y0=-1.0)
    assert path.signs.tolist() == [-1, 1]
    assert to_levels(path)[1] == pytest.approx(1.5, abs=1e-15)


@pytest.mark.parametrize("y0", [1.0, -2.5, 1e-3])
def test_levels_match_direct_recursion(y0):
    eta = np.random.default_rng(4).standard_normal(60)
    path = simulate_darwin(P, innovations=eta, y0=y0)
    np.testing.assert_allclose(to_levels(path), direct_levels(0.5, 3.3058, y0, eta), rtol=1e-11)


def test_ratio_identity():
    eta = np.random.default_rng(5).standard_normal(200)
    path = simulate_darwin(P, innovations=eta, y0=0.7)
    s = lagged_signs(path)
    np.testing.assert_allclose(ratios(path), 0.5 + eta * s * math.sqrt(3.3058), rtol=1e-11, atol=1e-12)
    np.testing.assert_allclose(log_abs_ratios(path), np.log(np.abs(ratios(path))), atol=1e-12)


def test_default_y0_is_random_normal_first_draw():
    path = simulate_darwin(P, n=3, seed=11)
    z = np.random.Generator(np.random.PCG64(11)).standard_normal()
    assert path.meta["y0_value"] == z
    assert path.meta["y0"] == "random"


def test_reproducible():
    assert simulate_darwin(P, "laplace", 50, seed=(3, 1)) == simulate_darwin(P, "laplace", 50, seed=(3, 1))


def test_explosive_path_stays_finite():
    path = simulate_darwin(DarwinParams(0.5, 50.0), n=5000, seed=1)
    assert path.logabs[-1] > 1000  # far beyond double range
    assert np.all(np.isfinite(path.logabs))
    with pytest.raises(PathOverflowError):
        to_levels(path)
    with pytest.warns(LevelOverflowWarning):
        lv = to_levels(path, overflow="saturate")
    assert np.isinf(lv[-1])
    assert path.to_csv().splitlines()[-1].endswith(",")


@pytest.mark.parametrize("kind", ["gaussian", "t5std", "laplace"])
def test_batch_rows_equal_single_paths(kind):
    seeds = [(9, r) for r in range(5)]
    rat, lag = simulate_darwin_batch(P, kind, 40, seeds)
    for i, s in enumerate(seeds):
        path = simulate_darwin(P, kind, 40, seed=s)
        np.testing.assert_allclose(rat[i], ratios(path), rtol=1e-12)
        np.testing.assert_array_equal(lag[i], lagged_signs(path))


def test_coupled_batch_ratios_free_of_sign():
    seeds = [(2, r) for r in range(4)]
    rat, _ = simulate_darwin_batch(P, "gaussian", 30, seeds, coupled=True)
    for i, s in enumerate(seeds):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(2, spawn_key=(i,))))
        rng.standard_normal()  # y0 draw
        eps = rng.standard_normal(30)
        np.testing.assert_allclose(rat[i], 0.5 + eps * math.sqrt(3.3058), rtol=1e-13)


def test_auxiliary_matches_modulus_in_law():
    # |y_n| and x_n have the same law for symmetric innovations
    n, m = 50, 2000
    y = np.array([simulate_darwin(P, "t5std", n, seed=(1, r)).logabs[-1] for r in range(m)])
    x = np.array([simulate_auxiliary(P, "t5std", n, x0="random", seed=(2, r)).logabs[-1] for r in range(m)])
    assert two_sample_ks(y, x).p > 1e-3


def test_auxiliary_with_same_draws_is_modulus():
    eta = np.random.default_rng(6).standard_normal(30)
    a = simulate_auxiliary(P, innovations=eta, x0=1.0)
    np.testing.assert_allclose(a.logabs[1:], np.cumsum(np.log(np.abs(0.5 + eta * math.sqrt(3.3058)))), atol=1e-12)


def test_sign_law():
    # P(sign flips) = P(phi s + eta sqrt(alpha) has sign opposite to s) = Phi(-phi / sqrt(alpha))
    from darwin.stats import normal_cdf

    path = simulate_darwin(P, n=200000, seed=3)
    flips = np.mean(path.signs[1:] != path.signs[:-1])
    p = normal_cdf(-0.5 / math.sqrt(3.3058))
    assert abs(flips - p) < 4 * math.sqrt(p * (1 - p) / 200000)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(1e-6, 1e6), seed=st.integers(0, 1000))
def test_scale_equivariance(c, seed):
    eta = np.random.default_rng(seed).standard_normal(20)
    a = simulate_darwin(P, innovations=eta, y0=1.0)
    b = simulate_darwin(P, innovations=eta, y0=c)
    np.testing.assert_allclose(b.logabs - a.logabs, math.log(c), atol=1e-9)
    np.testing.assert_array_equal(a.signs, b.signs)


def test_path_serialization_roundtrip():
    path = simulate_darwin(P, n=10, seed=(4, 2))
    assert Path.from_json(path.to_json()) == path
    assert Path.from_dict(path.to_dict()) == path
    with pytest.raises(ValueError):
        path.logabs[0] = 1.0


def test_bad_inputs():
    with pytest.raises(ValueError):
        simulate_darwin(P, n=3, y0=0.0)
    with pytest.raises(ValueError):
        DarwinParams(0.5, 0.0)
    with pytest.raises(ValueError):
        simulate_darwin(P, n=3, innovations=[1.0, 2.0])
    # eta chosen so that phi + eta sqrt(alpha) = 0 exactly
    with pytest.raises(DataError):
        simulate_darwin(DarwinParams(0.5, 0.25), innovations=[-1.0], y0=1.0)


def test_dar_simulation_stationary_scale():
    y = simulate_dar(DarParams(0.5, 1.0, 0.3), n=20000, seed=1)
    # stationary variance omega / (1 - phi^2 - alpha) = 1 / 0.45
    assert np.var(y) == pytest.approx(1 / 0.45, rel=0.1)
