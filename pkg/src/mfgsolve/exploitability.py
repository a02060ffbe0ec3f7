"""Exploitability: best-response value minus policy value in the MDP induced
by the policy's own mean field.  Zero exactly at an equilibrium.

The exact path runs value recursions on tabular environments.  The stochastic
path simulates the mean field with particles, trains a Q-network best
response, and Monte-Carlo estimates both values, reporting a standard error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dp
from .core import MeanField, Policy
from .envs.base import EnvironmentSpec
from .sim import ParticleConfig, evaluate_policy_stochastic, frozen_mdp, simulate_mean_field


@dataclass(frozen=True)
class ExploitabilityReport:
    """How much a unilateral deviation can gain against the policy's crowd."""

    value: float
    best_response_value: float
    policy_value: float
    method: str  # "exact" | "stochastic"
    std_error: float | None = None


def exploitability_exact(env: EnvironmentSpec, pi: Policy) -> ExploitabilityReport:
    """Exact gap via backward induction on the policy's induced flow.

    The best-response value reads the optimal first-step state values
    directly, so no tie-breaking into a concrete policy is involved.
    """
    dp.check_tabular(env)
    mu = dp.induced_mean_field(env, pi)
    qstar = dp.optimal_q(env, mu)
    best = float(env.initial_dist @ qstar.values[0].max(axis=1))
    value = dp.objective_value(env, mu, pi)
    return ExploitabilityReport(
        value=best - value,
        best_response_value=best,
        policy_value=value,
        method="exact",
    )


def exploitability_stochastic(
    env,
    pi,
    particles: ParticleConfig,
    episodes: int,
    rng_seed: int,
    br_hyperparams=None,
) -> ExploitabilityReport:
    """Sampled gap estimate for environments of any size.

    The mean field is simulated with particles, the best response is a
    Q-network trained on the frozen-flow MDP, and both values are averaged
    over episode rollouts.  The reported standard error combines both
    estimates; expect agreement with the exact value only within a few of it.
    """
    from .rl.dqn import DqnHyperparams, dqn_train  # deferred: rl builds on this module
    from .rl.policies import GreedyNetworkPolicy, greedy_policy_from_network

    hp = br_hyperparams or DqnHyperparams()
    seeds = np.random.SeedSequence(rng_seed).spawn(4)
    sim_seed = int(seeds[0].generate_state(1)[0])
    train_seed = int(seeds[1].generate_state(1)[0])
    mu = simulate_mean_field(
        env,
        pi,
        ParticleConfig(particles.num_meanfields, particles.num_particles, sim_seed),
    )
    mdp = frozen_mdp(env, mu)
    qfunc = dqn_train(mdp, hp, seed=train_seed)
    if isinstance(env, EnvironmentSpec):
        br_policy = greedy_policy_from_network(qfunc, env)
    else:
        br_policy = GreedyNetworkPolicy(qfunc, env)
    eval_seed_br = int(seeds[2].generate_state(1)[0])
    eval_seed_pi = int(seeds[3].generate_state(1)[0])
    best, best_se = evaluate_policy_stochastic(env, mu, br_policy, episodes, eval_seed_br)
    value, value_se = evaluate_policy_stochastic(env, mu, pi, episodes, eval_seed_pi)
    return ExploitabilityReport(
        value=best - value,
        best_response_value=best,
        policy_value=value,
        method="stochastic",
        std_error=float(np.hypot(best_se, value_se)),
    )
