import math

import numpy as np
import pytest
from scipy import stats

from dmps.errors import InvalidParameter, NumericalBlowup
from dmps.montecarlo import (
    SimConfig,
    ballistic_sde_sample,
    euler_maruyama,
    exact_ballistic_sample,
    histogram_mode_count,
    ks_distance,
    l1_distance,
    simulate_coupled,
)
from dmps.process import DiffusionSpec, brownian, linear_drift
from dmps.stationary import stationary_wgn
from dmps.verifier import cdf_P

N = 100_000


@pytest.fixture(scope="module")
def em_ballistic():
    return ballistic_sde_sample(2.0, SimConfig(dt=1e-3, horizon=1.0, n_paths=N, seed=5))


def test_config_validation():
    with pytest.raises(InvalidParameter):
        SimConfig(dt=0.0, horizon=1.0, n_paths=10, seed=1)
    with pytest.raises(InvalidParameter):
        SimConfig(dt=2.0, horizon=1.0, n_paths=10, seed=1)
    with pytest.raises(InvalidParameter):
        SimConfig(dt=0.3, horizon=1.0, n_paths=10, seed=1)
    with pytest.raises(InvalidParameter):
        SimConfig(dt=0.1, horizon=1.0, n_paths=0, seed=1)
    with pytest.raises(InvalidParameter):
        SimConfig(dt=0.1, horizon=1.0, n_paths=10, seed=-1)
    with pytest.raises(InvalidParameter):
        SimConfig(dt=0.1, horizon=1.0, n_paths=10, seed=1, scheme="milstein")
    assert SimConfig(dt=0.1, horizon=1.0, n_paths=10, seed=1).n_steps == 10


def test_brownian_motion_moments():
    s = euler_maruyama(brownian(1.0), None, 0.0, SimConfig(dt=0.01, horizon=1.0, n_paths=N, seed=3))
    assert len(s) == N
    assert abs(s.mean()) < 0.01
    assert abs(s.var() - 1.0) < 0.02


def test_deterministic_limit_is_exact():
    spec = DiffusionSpec(drift=lambda x: 0.75 + 0.0 * np.asarray(x), sigma=0.0)
    s = euler_maruyama(spec, None, 1.5, SimConfig(dt=0.125, horizon=2.0, n_paths=5, seed=0))
    assert np.all(s.values == 1.5 + 0.75 * 2.0)


def test_drift_override_replaces_spec_drift():
    spec = DiffusionSpec(drift=lambda x: 0.0 * np.asarray(x), sigma=0.0)
    s = euler_maruyama(spec, lambda x: 1.0 + 0.0 * np.asarray(x), 0.0, SimConfig(0.25, 1.0, 3, 0))
    assert np.all(s.values == 1.0)


def test_blowup_names_path_and_step():
    spec = DiffusionSpec(drift=lambda x: np.asarray(x) ** 2, sigma=0.1)
    with pytest.raises(NumericalBlowup) as err:
        euler_maruyama(spec, None, 1.0, SimConfig(dt=0.01, horizon=5.0, n_paths=8, seed=1))
    assert 0 <= err.value.path < 8
    assert err.value.step > 0


def test_samples_are_read_only():
    s = exact_ballistic_sample(1.0, 1.0, 10, 1)
    with pytest.raises(ValueError):
        s.values[0] = 0.0


def test_ks_distance_matches_scipy():
    x = exact_ballistic_sample(0.0, 1.0, 5000, 4).values
    ours = ks_distance(x, stats.norm.cdf)
    assert ours == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-15)


def test_ks_distance_degenerate():
    assert ks_distance(np.zeros(100), stats.norm.cdf) >= 0.5
    with pytest.raises(InvalidParameter):
        ks_distance(np.array([]), stats.norm.cdf)


def test_exact_sampler_lambda_zero_is_gaussian():
    s = exact_ballistic_sample(0.0, 2.0, N, 8)
    assert ks_distance(s, lambda x: stats.norm.cdf(x, scale=math.sqrt(2.0))) < 1.63 / math.sqrt(N)


@pytest.mark.parametrize("lam,t", [(2.0, 1.0), (5.0, 0.5)])
def test_exact_sampler_against_cdf(lam, t):
    s = exact_ballistic_sample(lam, t, N, 17)
    assert s.provenance == "exact-mixture"
    assert ks_distance(s, lambda x: cdf_P(lam, t, x)) < 0.006


def test_exact_sampler_variance():
    lam, t = 2.0, 1.0
    s = exact_ballistic_sample(lam, t, N, 21)
    assert abs(s.var() - (t + 2 * lam * t * t)) < 3.0 * s.var_se()


def test_euler_ballistic_against_cdf(em_ballistic):
    assert em_ballistic.provenance == "integrated-sde"
    assert ks_distance(em_ballistic, lambda x: cdf_P(2.0, 1.0, x)) < 0.02


def test_exact_and_euler_agree_in_distribution(em_ballistic):
    exact = exact_ballistic_sample(2.0, 1.0, N, 99)
    assert stats.ks_2samp(exact.values, em_ballistic.values).statistic < 0.02


def test_halving_dt_does_not_worsen_moments():
    lam, t = 2.0, 1.0
    target = t + 2 * lam * t * t
    coarse = ballistic_sde_sample(lam, SimConfig(dt=0.1, horizon=t, n_paths=N, seed=31))
    fine = ballistic_sde_sample(lam, SimConfig(dt=0.05, horizon=t, n_paths=N, seed=31))
    assert abs(fine.var() - target) <= abs(coarse.var() - target) + 3 * fine.var_se()
    assert abs(fine.mean()) <= abs(coarse.mean()) + 3 * fine.mean_se()


def test_worker_count_does_not_change_results():
    cfg = SimConfig(dt=0.01, horizon=0.5, n_paths=10_000, seed=2024)
    base = ballistic_sde_sample(1.0, cfg, workers=1).values
    for workers in (2, 8):
        assert np.array_equal(ballistic_sde_sample(1.0, cfg, workers=workers).values, base)
    exact = exact_ballistic_sample(1.0, 1.0, 10_000, 5).values
    assert np.array_equal(exact_ballistic_sample(1.0, 1.0, 10_000, 5, workers=8).values, exact)


def test_coupled_lambda_zero_matches_wgn():
    spec = linear_drift(-1.0, 1.0)
    hist = simulate_coupled(spec, 0.0, SimConfig(dt=0.01, horizon=8.0, n_paths=50_000, seed=12), bins=40)
    assert hist.probabilities().sum() == pytest.approx(1.0, abs=1e-12)
    d = stationary_wgn(spec)
    assert l1_distance(hist, d, d.support) < 0.05
    assert histogram_mode_count(hist) == 1


def test_coupled_bimodal_at_high_risk():
    spec = linear_drift(-1.0, 1.0)
    hist = simulate_coupled(spec, 1.5, SimConfig(dt=0.01, horizon=8.0, n_paths=50_000, seed=13), bins=40)
    assert histogram_mode_count(hist) == 2


def test_coupled_rejects_bad_options():
    spec = linear_drift(-1.0, 1.0)
    cfg = SimConfig(dt=0.1, horizon=0.1, n_paths=10, seed=1)
    with pytest.raises(InvalidParameter):
        simulate_coupled(spec, 1.0, cfg, bernoulli_scale="half")
    with pytest.raises(InvalidParameter):
        simulate_coupled(spec, 1.0, cfg, bins=1)
