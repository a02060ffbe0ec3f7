import numpy as np
import pytest

from conftest import random_policy
from mfgsolve import dp
from mfgsolve.core import MeanField, Policy, meanfield_distance, policy_distance
from mfgsolve.envs import make_lr, make_rps, make_sis, make_toy_lr
from mfgsolve.errors import ConfigError
from mfgsolve.solvers import (
    PriorDescentConfig,
    SolverConfig,
    boltzmann_iteration,
    detect_limit_cycle,
    exact_fpi,
    prior_descent,
)


class TestConfigValidation:
    def test_eta_exactly_when_not_exact(self):
        with pytest.raises(ConfigError):
            SolverConfig(max_iterations=5, mode="exact", eta=1.0)
        with pytest.raises(ConfigError):
            SolverConfig(max_iterations=5, mode="boltzmann")
        SolverConfig(max_iterations=5, mode="boltzmann", eta=1.0)

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            SolverConfig(max_iterations=5, mode="annealed")

    def test_wrong_entry_point(self):
        cfg = SolverConfig(max_iterations=5, mode="boltzmann", eta=1.0)
        with pytest.raises(ConfigError):
            exact_fpi(make_lr(), cfg)
        with pytest.raises(ConfigError):
            boltzmann_iteration(make_lr(), SolverConfig(max_iterations=5))

    def test_prior_descent_c_below_one(self):
        with pytest.raises(ConfigError):
            PriorDescentConfig(outer_iterations=2, inner_iterations=5, eta0=1.0, c=0.5)


class TestExactFpi:
    def test_toy_lr_alternates(self):
        env = make_toy_lr()
        start = MeanField(np.array([[1.0, 0.0, 0.0], [0.0, 0.7, 0.3]]))
        log = exact_fpi(env, SolverConfig(max_iterations=20, initial_mean_field=start))
        assert log.limit_cycle_period == 2
        assert not log.converged
        assert log.trailing_stats()["min"] > 0.0

    def test_lr_policy_averaging_converges(self):
        env = make_lr()
        cfg = SolverConfig(max_iterations=5000, fp_average_policy=True)
        log = exact_fpi(env, cfg)
        assert log.records[-1].exploitability < 1e-3
        np.testing.assert_allclose(
            log.final_meanfield.per_time[1], [0, 2 / 3, 1 / 3], atol=1e-3
        )

    def test_fixed_point_stops_immediately(self):
        env = make_toy_lr()
        # the uniform-split flow is the equilibrium flow; with the symmetric
        # tie rule the very first iteration reproduces it
        cfg = SolverConfig(
            max_iterations=50,
            tie="uniform_over_optimal",
            convergence_tol=1e-12,
        )
        log = exact_fpi(env, cfg)
        assert log.converged
        assert len(log.records) == 1

    def test_record_fields(self):
        env = make_toy_lr()
        log = exact_fpi(env, SolverConfig(max_iterations=8))
        assert len(log.records) <= 8
        for r in log.records:
            assert r.exploitability >= -1e-9
            assert r.elapsed_s >= 0.0
            assert r.eta == 0.0
        assert np.isfinite([r.mf_distance_final for r in log.records]).all()


class TestBoltzmannIteration:
    def test_lr_converges_above_threshold(self):
        env = make_lr()
        cfg = SolverConfig(
            max_iterations=10000, mode="boltzmann", eta=2.0, convergence_tol=1e-10
        )
        log = boltzmann_iteration(env, cfg)
        assert log.converged
        assert log.records[-1].mf_distance_prev < 1e-10

    def test_geometric_decrease_above_threshold(self):
        # Above the guaranteed-contraction temperature the successive flow
        # distances shrink at least at the bound's rate (threshold/eta).
        env = make_lr()
        threshold = dp.contractivity_threshold(1.0, 1.0, 2, 0.5, 0.5)
        eta = 2.0
        log = boltzmann_iteration(
            env,
            SolverConfig(max_iterations=200, mode="boltzmann", eta=eta, convergence_tol=1e-12),
        )
        dists = np.array([r.mf_distance_prev for r in log.records])
        dists = dists[dists > 1e-13]
        ratios = dists[1:] / dists[:-1]
        assert np.all(ratios <= threshold / eta + 0.05)

    def test_huge_eta_returns_prior(self):
        env = make_lr()
        prior = Policy.uniform(env.horizon, env.num_states, env.num_actions)
        log = boltzmann_iteration(
            env,
            SolverConfig(max_iterations=5, mode="boltzmann", eta=1e9, prior=prior),
        )
        assert policy_distance(log.final_policy, prior) < 1e-6
        assert (
            meanfield_distance(log.final_meanfield, dp.induced_mean_field(env, prior))
            < 1e-6
        )

    @pytest.mark.parametrize("make", [make_lr, make_rps])
    def test_boltzmann_and_relent_series_coincide(self, make):
        # Terminal rewards are action-independent in these one-shot games,
        # so the smooth and hard recursions give the same first-step values.
        env = make()
        kwargs = dict(max_iterations=400, eta=0.5)
        a = boltzmann_iteration(env, SolverConfig(mode="boltzmann", **kwargs))
        b = boltzmann_iteration(env, SolverConfig(mode="relent", **kwargs))
        assert np.abs(a.exploitabilities - b.exploitabilities).max() < 1e-6

    def test_deterministic_replay(self):
        env = make_sis()
        cfg = SolverConfig(max_iterations=60, mode="relent", eta=0.15, seed=7)
        a = boltzmann_iteration(env, cfg)
        b = boltzmann_iteration(env, cfg)
        np.testing.assert_array_equal(a.exploitabilities, b.exploitabilities)
        np.testing.assert_array_equal(
            a.final_meanfield.per_time, b.final_meanfield.per_time
        )
        np.testing.assert_array_equal(
            a.final_policy.per_time_state, b.final_policy.per_time_state
        )

    def test_policy_rows_stay_simplex_under_fp(self):
        env = make_sis()
        cfg = SolverConfig(
            max_iterations=40,
            mode="boltzmann",
            eta=0.2,
            fp_average_policy=True,
            fp_average_meanfield=True,
        )
        log = boltzmann_iteration(env, cfg)
        rows = log.final_policy.per_time_state
        assert np.all(rows >= 0.0)
        np.testing.assert_allclose(rows.sum(axis=-1), 1.0, atol=1e-12)


class TestDetectLimitCycle:
    def test_period_two(self):
        a = np.array([[0.3, 0.7]])
        b = np.array([[0.8, 0.2]])
        history = [a, b] * 6
        assert detect_limit_cycle(history, max_period=4) == 2

    def test_converged_is_period_one(self):
        history = [np.array([[0.4, 0.6]])] * 10
        assert detect_limit_cycle(history, max_period=4) == 1

    def test_noise_is_aperiodic(self):
        rng = np.random.default_rng(0)
        history = [rng.dirichlet(np.ones(3))[None, :] for _ in range(20)]
        assert detect_limit_cycle(history, max_period=5) is None

    def test_insufficient_history(self):
        with pytest.raises(ValueError):
            detect_limit_cycle([np.array([[1.0]])] * 3, max_period=2)


class TestPriorDescent:
    def test_single_outer_matches_inner_solver(self):
        env = make_lr()
        pd = prior_descent(
            env,
            PriorDescentConfig(
                outer_iterations=1, inner_iterations=30, eta0=1.0, c=2.0
            ),
        )
        inner = boltzmann_iteration(
            env, SolverConfig(max_iterations=30, mode="boltzmann", eta=1.0)
        )
        np.testing.assert_array_equal(pd.exploitabilities, inner.exploitabilities)
        assert pd.outer_boundaries == [0]

    def test_eta_schedule_recorded(self):
        env = make_lr()
        pd = prior_descent(
            env,
            PriorDescentConfig(outer_iterations=3, inner_iterations=5, eta0=1.0, c=2.0),
        )
        etas = [r.eta for r in pd.records]
        assert etas[:5] == [1.0] * 5
        assert etas[5:10] == [2.0] * 5
        assert etas[10:] == [4.0] * 5
        assert pd.outer_boundaries == [0, 5, 10]

    def test_lr_descends_to_exact_equilibrium(self):
        env = make_lr()
        pd = prior_descent(
            env,
            PriorDescentConfig(
                outer_iterations=20,
                inner_iterations=150,
                eta0=1.0,
                c=1.0,
                convergence_tol=1e-12,
            ),
        )
        assert pd.records[-1].exploitability < 1e-4

    def test_sis_fixed_temperature_not_monotone(self):
        env = make_sis()
        pd = prior_descent(
            env,
            PriorDescentConfig(
                outer_iterations=20, inner_iterations=100, eta0=0.1, c=1.0, mode="relent"
            ),
        )
        ends = [
            pd.records[b - 1].exploitability for b in pd.outer_boundaries[1:]
        ] + [pd.records[-1].exploitability]
        diffs = np.diff(ends)
        assert np.any(diffs > 0.0)

    def test_deterministic_replay(self):
        env = make_lr()
        cfg = PriorDescentConfig(
            outer_iterations=4, inner_iterations=20, eta0=0.8, c=1.3
        )
        a = prior_descent(env, cfg)
        b = prior_descent(env, cfg)
        np.testing.assert_array_equal(a.exploitabilities, b.exploitabilities)


def test_exact_fpi_deterministic_replay():
    env = make_toy_lr()
    rng = np.random.default_rng(3)
    start = MeanField(np.array([[1.0, 0.0, 0.0], rng.dirichlet(np.ones(3))]))
    cfg = SolverConfig(max_iterations=15, initial_mean_field=start)
    a = exact_fpi(env, cfg)
    b = exact_fpi(env, cfg)
    np.testing.assert_array_equal(a.exploitabilities, b.exploitabilities)
