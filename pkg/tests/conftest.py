import numpy as np

from mfgsolve.core import MeanField, Policy
from mfgsolve.envs import make_affine_env


def random_env(rng, horizon, num_states, num_actions, name="random"):
    """Random finite game with mean-field-independent dynamics."""
    transition = rng.dirichlet(np.ones(num_states), size=(num_states, num_actions))
    reward = rng.normal(size=(num_states, num_actions))
    return make_affine_env(
        name,
        horizon=horizon,
        initial_dist=rng.dirichlet(np.ones(num_states)),
        reward_base=reward,
        transition_base=transition,
    )


def random_policy(rng, env):
    return Policy(
        rng.dirichlet(
            np.ones(env.num_actions), size=(env.horizon, env.num_states)
        )
    )


def random_mean_field(rng, env):
    return MeanField(rng.dirichlet(np.ones(env.num_states), size=env.horizon))
