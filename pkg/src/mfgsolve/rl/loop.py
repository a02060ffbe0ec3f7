"""Softmax fixed-point iteration with learned action values and simulated
population flows (the large-scale counterpart of the tabular solvers).

Per iteration: train a Q-network on the MDP frozen at the current flow, take
the softmax-with-prior policy of its values, simulate the next flow with
particles.  On tabular environments the network is collapsed to a dense table
so the policy and the exploitability stay exact; on sampled environments
(taxi) both the policy and the evaluation are stochastic.
"""

from __future__ import annotations

import time

import numpy as np

from .. import dp
from ..core import Policy
from ..envs.base import EnvironmentSpec
from ..errors import ConfigError
from ..exploitability import exploitability_exact, exploitability_stochastic
from ..sim import ParticleConfig, UniformStatePolicy, frozen_mdp, simulate_mean_field
from ..solvers import IterationLog, IterationRecord
from .dqn import DqnHyperparams, dqn_train
from .policies import (
    BoltzmannNetworkPolicy,
    GreedyNetworkPolicy,
    greedy_policy_from_network,
    network_q_table,
)


def check_value_fitting_mode(mode: str) -> None:
    """Reject entropy-regularized value fitting with function approximation.

    Exponentiating approximated action values inside the smooth-maximum
    recursion fails quickly in floating point, so only the plain Bellman
    recursion with softmax policies is supported when a network stands in
    for the value function.  Tabular 'relent' solving is unaffected.
    """
    if mode == "relent":
        raise ConfigError(
            "relent mode is not available with Q-network approximation: "
            "fitting the entropy-regularized value function with a network "
            "is numerically unstable (log-exponential of approximated "
            "values); use mode='boltzmann', or the tabular relent solver"
        )
    if mode != "boltzmann":
        raise ConfigError(f"unknown approximation mode {mode!r}")


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1)[0])


def boltzmann_dqn_iteration(
    env,
    eta: float,
    prior: Policy | np.ndarray | None,
    iterations: int,
    particles: ParticleConfig,
    hp: DqnHyperparams | None = None,
    seed: int = 0,
    eval_episodes: int = 500,
    mode: str = "boltzmann",
) -> IterationLog:
    """Run the learned softmax fixed-point loop and log exploitability.

    ``eta=0`` selects greedy policies over the network values (the
    temperature-zero reference point).  ``prior`` is a tabular Policy for
    tabular environments or a single action distribution for sampled ones
    (default uniform in both cases).
    """
    check_value_fitting_mode(mode)
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    if eta < 0.0:
        raise ConfigError("eta must be >= 0 (0 means greedy)")
    hp = hp or DqnHyperparams()
    tabular = isinstance(env, EnvironmentSpec)
    seeds = np.random.SeedSequence(seed)
    init_ss, *iter_ss = seeds.spawn(1 + iterations)

    if tabular:
        prior_policy = prior if prior is not None else Policy.uniform(
            env.horizon, env.num_states, env.num_actions
        )
        prior_policy.require_positive()
        sample_policy_0 = prior_policy
    else:
        probs = (
            np.full(env.num_actions, 1.0 / env.num_actions)
            if prior is None
            else np.asarray(prior, dtype=np.float64)
        )
        if np.any(probs <= 0.0):
            raise ConfigError("prior must be strictly positive")
        sampler = UniformStatePolicy(env.num_actions)
        sampler_probs = probs
        sampler.action_probs = lambda t, states: np.tile(
            sampler_probs, (len(states), 1)
        )
        sample_policy_0 = sampler

    mu = simulate_mean_field(
        env,
        sample_policy_0,
        ParticleConfig(particles.num_meanfields, particles.num_particles, _seed_int(init_ss)),
    )
    records: list[IterationRecord] = []
    history = [mu.per_time]
    policy = None
    for k in range(iterations):
        start = time.perf_counter()
        train_ss, sim_ss, eval_ss = iter_ss[k].spawn(3)
        net = dqn_train(frozen_mdp(env, mu), hp, seed=_seed_int(train_ss))
        if tabular:
            qtab = network_q_table(net, env)
            if eta > 0.0:
                policy = dp.boltzmann_policy(qtab, eta, prior_policy)
            else:
                policy = dp.greedy_policy(qtab, "first_optimal")
            expl = exploitability_exact(env, policy).value
        else:
            if eta > 0.0:
                policy = BoltzmannNetworkPolicy(net, env, eta, probs)
            else:
                policy = GreedyNetworkPolicy(net, env)
            expl = exploitability_stochastic(
                env,
                policy,
                particles,
                episodes=eval_episodes,
                rng_seed=_seed_int(eval_ss),
                br_hyperparams=hp,
            ).value
        mu_next = simulate_mean_field(
            env,
            policy,
            ParticleConfig(
                particles.num_meanfields, particles.num_particles, _seed_int(sim_ss)
            ),
        )
        dist = 0.5 * float(np.abs(mu_next.per_time - mu.per_time).sum(axis=-1).max())
        records.append(
            IterationRecord(
                index=k,
                exploitability=expl,
                mf_distance_prev=dist,
                mf_distance_final=np.nan,
                eta=eta,
                elapsed_s=time.perf_counter() - start,
            )
        )
        history.append(mu_next.per_time)
        mu = mu_next
    final = history[-1]
    for i, rec in enumerate(records):
        rec.mf_distance_final = 0.5 * float(
            np.abs(history[i + 1] - final).sum(axis=-1).max()
        )
    return IterationLog(
        records=records,
        final_policy=policy,
        final_meanfield=mu,
        converged=False,
        limit_cycle_period=None,
        meanfield_history=history[-64:],
    )
