"""Weighted sum-MSE solver: reference three-user instance, KKT residual
replays, multiplier recovery, multistart clustering, scaling laws."""

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from mseregion import (
    SolverOptions,
    SystemConfig,
    WeightVector,
    enumerate_stationary_points,
    kkt_residuals,
    minimize_weighted_sum_mse,
    mse_tuple,
    mse_tuples,
    recover_multipliers,
    weighted_mse_gradient,
)
from mseregion.simplex import budget_simplex_lattice
from mseregion.tolerances import TOL_KKT

from helpers import random_channels, random_config

# Three-user instance with two stationary points, restated independently
# of the library's own copy.
REF_H = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]], dtype=complex)
REF_CONFIG = SystemConfig(noise_variance=1.0, power_budget=10.0)
REF_WEIGHTS = np.array([0.22, 0.54, 0.24])

PUBLISHED = [
    {"powers": (3.6753, 6.3247, 0.0), "lam": 0.0101, "mu": (0.0, 0.0, 0.0266),
     "objective": 0.36078, "objective_tol": 1e-4, "mses": (0.2139, 0.1365, 1.0)},
    {"powers": (0.0, 7.0794, 2.9206), "lam": 0.0115, "mu": (0.007, 0.0, 0.0),
     "objective": 0.3828, "objective_tol": 5e-4, "mses": (1.0, 0.1977, 0.2335)},
]

# solver outputs at starts=16, seed=0, frozen
FROZEN = [
    {"powers": (3.67526816, 6.32473184, 0.0), "objective": 0.36077895979873087,
     "lam": 0.01006491938959961, "mu": (0.0, 0.0, 0.02661440)},
    {"powers": (0.0, 7.07941252, 2.92058748), "objective": 0.38282780467228533,
     "lam": 0.011515017379756121, "mu": (0.00703685, 0.0, 0.0)},
]


def test_reference_instance_two_clusters():
    clusters = enumerate_stationary_points(REF_H, REF_CONFIG, REF_WEIGHTS,
                                           starts=16, seed=0)
    assert len(clusters) == 2
    for cert, pub, frozen in zip(clusters, PUBLISHED, FROZEN):
        assert cert.converged
        assert cert.objective == pytest.approx(pub["objective"], abs=pub["objective_tol"])
        assert cert.objective == pytest.approx(frozen["objective"], abs=1e-9)
        np.testing.assert_allclose(cert.powers, pub["powers"], atol=1e-3)
        np.testing.assert_allclose(cert.powers, frozen["powers"], atol=1e-6)
        assert cert.lam == pytest.approx(pub["lam"], abs=1e-3)
        assert cert.lam == pytest.approx(frozen["lam"], abs=1e-6)
        np.testing.assert_allclose(cert.mu, pub["mu"], atol=1e-3)
        np.testing.assert_allclose(cert.mu, frozen["mu"], atol=1e-6)
        mses = mse_tuple(REF_H, cert.powers, REF_CONFIG).values
        np.testing.assert_allclose(mses, pub["mses"], atol=1e-3)
    # users 3 and 1 are shut off exactly by the projection
    assert clusters[0].powers[2] == 0.0
    assert clusters[1].powers[0] == 0.0


def test_published_variable_sets_replay():
    for pub in PUBLISHED:
        res = kkt_residuals(REF_H, REF_CONFIG, REF_WEIGHTS,
                            np.array(pub["powers"]), pub["lam"], np.array(pub["mu"]))
        assert res.max_abs() <= 5e-4
        assert abs(res.budget_slack) <= 1e-3


def test_starts_near_known_points_converge_to_them():
    cert = minimize_weighted_sum_mse(REF_H, REF_CONFIG, REF_WEIGHTS, [4.0, 6.0, 0.0])
    assert cert.converged
    np.testing.assert_allclose(cert.powers, PUBLISHED[0]["powers"], atol=1e-3)
    assert cert.objective == pytest.approx(PUBLISHED[0]["objective"], abs=1e-4)

    cert = minimize_weighted_sum_mse(REF_H, REF_CONFIG, REF_WEIGHTS, [0.0, 7.0, 3.0])
    assert cert.converged
    np.testing.assert_allclose(cert.powers, PUBLISHED[1]["powers"], atol=1e-3)
    assert cert.objective == pytest.approx(PUBLISHED[1]["objective"], abs=5e-4)


def test_single_user_full_power_and_golden_section_oracle():
    rng = np.random.default_rng(21)
    for _ in range(5):
        h = (rng.standard_normal(3) + 1j * rng.standard_normal(3)).reshape(3, 1)
        config = random_config(rng)
        weight = float(rng.uniform(0.1, 2.0))

        cert = minimize_weighted_sum_mse(h, config, [weight], [0.0])
        assert cert.converged
        assert cert.powers[0] == pytest.approx(config.power_budget, rel=1e-8)

        oracle = minimize_scalar(
            lambda p: weight * mse_tuple(h, [p], config).values[0],
            bounds=(0.0, config.power_budget), method="bounded",
            options={"xatol": 1e-10})
        assert cert.powers[0] == pytest.approx(oracle.x, abs=1e-6 * config.power_budget)
        assert cert.objective <= oracle.fun + 1e-12

        grad = weighted_mse_gradient(h, cert.powers, config, [weight])
        res = kkt_residuals(h, config, [weight], cert.powers, -float(grad[0]), [0.0])
        assert res.max_abs() <= 1e-8


def test_single_positive_weight_concentrates_power():
    rng = np.random.default_rng(22)
    for j in range(3):
        channels = random_channels(rng, 3, 3)
        config = random_config(rng)
        weights = np.zeros(3)
        weights[j] = 1.0
        clusters = enumerate_stationary_points(channels, config, weights,
                                               starts=8, seed=0)
        best = clusters[0]
        assert best.powers[j] == pytest.approx(config.power_budget, rel=1e-6)
        others = np.delete(best.powers, j)
        assert (others <= 1e-6 * config.power_budget).all()


def test_weight_scaling_law():
    # scaling w by c scales the objective and multipliers by c and leaves
    # the minimizer in place; tight options pin the endpoints down
    opts = SolverOptions(tol_grad=1e-10)
    rng = np.random.default_rng(23)
    cases = [(REF_H, REF_CONFIG, REF_WEIGHTS, [4.0, 6.0, 0.0])]
    channels = random_channels(rng, 2, 3)
    config = random_config(rng)
    cases.append((channels.entries, config, rng.uniform(0.1, 1.0, size=3),
                  [config.power_budget / 4] * 3))
    for mat, cfg, w, start in cases:
        base = minimize_weighted_sum_mse(mat, cfg, w, start, opts)
        scaled = minimize_weighted_sum_mse(mat, cfg, 3.0 * np.asarray(w), start, opts)
        np.testing.assert_allclose(scaled.powers, base.powers, atol=1e-6)
        assert scaled.objective == pytest.approx(3.0 * base.objective, rel=1e-9)
        assert scaled.lam == pytest.approx(3.0 * base.lam, rel=1e-4, abs=1e-9)
        np.testing.assert_allclose(scaled.mu, 3.0 * base.mu, rtol=1e-4, atol=1e-9)


def test_two_user_solver_beats_lattice_oracle():
    rng = np.random.default_rng(24)
    for trial in range(5):
        n = int(rng.integers(1, 4))
        mat = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
        config = random_config(rng)
        w = rng.uniform(0.05, 1.0, size=2)
        grid = budget_simplex_lattice(2, 300) * (config.power_budget / 300)
        grid_min = float((mse_tuples(mat, grid, config) @ w).min())
        clusters = enumerate_stationary_points(mat, config, w, starts=6, seed=trial)
        assert len(clusters) == 1
        assert clusters[0].objective <= grid_min + 1e-9
        assert grid_min - clusters[0].objective <= 1e-3


def test_two_user_uniqueness_campaign():
    # convex two-user region: multistart never finds a second cluster
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        mat = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
        config = SystemConfig(noise_variance=float(rng.uniform(0.1, 10.0)),
                              power_budget=float(rng.uniform(1.0, 100.0)))
        w = rng.uniform(0.05, 1.0, size=2)
        clusters = enumerate_stationary_points(mat, config, w, starts=6, seed=0)
        assert len(clusters) == 1
        assert clusters[0].converged


def test_certificate_soundness_random_instances():
    rng = np.random.default_rng(25)
    for _ in range(10):
        k = int(rng.integers(2, 5))
        channels = random_channels(rng, int(rng.integers(2, 5)), k)
        config = random_config(rng)
        w = rng.uniform(0.05, 1.0, size=k)
        for cert in enumerate_stationary_points(channels, config, w, starts=4, seed=7):
            assert cert.converged
            assert cert.lam >= 0.0
            assert (cert.mu >= 0.0).all()
            replay = kkt_residuals(channels, config, w, cert.powers, cert.lam, cert.mu)
            assert np.abs(replay.stationarity).max() <= TOL_KKT
            assert np.abs(replay.complementarity).max() <= TOL_KKT
            assert abs(replay.budget_complementarity) <= TOL_KKT * config.power_budget
            assert replay.budget_slack >= -1e-9 * config.power_budget


def test_enumerate_is_deterministic_and_thread_invariant():
    runs = [enumerate_stationary_points(REF_H, REF_CONFIG, REF_WEIGHTS,
                                        starts=8, seed=0, threads=t)
            for t in (1, 1, 4)]
    for other in runs[1:]:
        assert len(other) == len(runs[0])
        for a, b in zip(runs[0], other):
            np.testing.assert_array_equal(a.powers, b.powers)
            assert a.objective == b.objective
            assert a.lam == b.lam
            np.testing.assert_array_equal(a.mu, b.mu)


def test_recover_multipliers_reference_and_slack_budget():
    for pub in PUBLISHED:
        lam, mu = recover_multipliers(REF_H, REF_CONFIG, REF_WEIGHTS,
                                      np.array(pub["powers"]))
        assert lam == pytest.approx(pub["lam"], abs=1e-3)
        np.testing.assert_allclose(mu, pub["mu"], atol=1e-3)

    h = np.array([[1.0], [0.5]], dtype=complex)
    lam, mu = recover_multipliers(h, REF_CONFIG, [1.0], [5.0])
    assert lam == 0.0
    np.testing.assert_array_equal(mu, [0.0])


def test_weight_vector_validation():
    vec = WeightVector([0.0, 1.5])
    assert len(vec) == 2
    np.testing.assert_array_equal(np.asarray(vec), [0.0, 1.5])
    with pytest.raises(ValueError):
        WeightVector([])
    with pytest.raises(ValueError):
        WeightVector([1.0, -0.1])
    with pytest.raises(ValueError):
        WeightVector([0.0, 0.0])
    with pytest.raises(ValueError):
        WeightVector([np.nan, 1.0])
    with pytest.raises(ValueError):
        minimize_weighted_sum_mse(REF_H, REF_CONFIG, [0.5, 0.5], [1.0, 1.0, 1.0])


def test_infeasible_start_rejected():
    with pytest.raises(ValueError):
        minimize_weighted_sum_mse(REF_H, REF_CONFIG, REF_WEIGHTS, [6.0, 6.0, 6.0])
    with pytest.raises(ValueError):
        minimize_weighted_sum_mse(REF_H, REF_CONFIG, REF_WEIGHTS, [-1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        enumerate_stationary_points(REF_H, REF_CONFIG, REF_WEIGHTS, starts=-1)
