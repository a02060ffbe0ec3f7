"""Adapters that turn a trained Q-network into policies.

Tabular environments get their network values materialized into a dense
table (the state space is enumerable there), so downstream evaluation stays
exact.  Sampled environments (taxi) get batch ``action_probs`` objects the
particle simulator and rollout code consume directly.
"""

from __future__ import annotations

import numpy as np

from .. import dp
from ..core import Policy
from ..envs.base import EnvironmentSpec
from .network import DuelingQNetwork


def network_q_table(net: DuelingQNetwork, env: EnvironmentSpec) -> dp.QTable:
    """Evaluate the network at every (t, s) one-hot observation."""
    obs = np.zeros((env.horizon * env.num_states, env.num_states + 1))
    for t in range(env.horizon):
        for s in range(env.num_states):
            row = t * env.num_states + s
            obs[row, s] = 1.0
            obs[row, -1] = float(t)
    q = net.forward(obs).reshape(env.horizon, env.num_states, env.num_actions)
    return dp.QTable(q, kind="policy")


def greedy_policy_from_network(
    net: DuelingQNetwork, env: EnvironmentSpec, tie: dp.TieRule = "first_optimal"
) -> Policy:
    return dp.greedy_policy(network_q_table(net, env), tie)


def _softmax_with_prior(q: np.ndarray, eta: float, prior: np.ndarray) -> np.ndarray:
    z = np.log(prior) + q / eta
    z -= z.max(axis=1, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=1, keepdims=True)


class GreedyNetworkPolicy:
    """Argmax of network values (first index on ties) for sampled envs."""

    def __init__(self, net: DuelingQNetwork, env):
        self.net = net
        self.env = env

    def _q(self, t: int, states) -> np.ndarray:
        obs = np.stack([self.env.observe(t, s) for s in states])
        return self.net.forward(obs)

    def action_probs(self, t: int, states) -> np.ndarray:
        q = self._q(t, states)
        probs = np.zeros_like(q)
        probs[np.arange(q.shape[0]), q.argmax(axis=1)] = 1.0
        return probs


class BoltzmannNetworkPolicy(GreedyNetworkPolicy):
    """Softmax-with-prior over network values for sampled envs.

    ``prior_probs`` is one action distribution applied at every state (the
    uniform prior in the reference experiments).
    """

    def __init__(self, net: DuelingQNetwork, env, eta: float, prior_probs=None):
        super().__init__(net, env)
        self.eta = float(eta)
        if prior_probs is None:
            prior_probs = np.full(env.num_actions, 1.0 / env.num_actions)
        self.prior_probs = np.asarray(prior_probs, dtype=np.float64)
        if np.any(self.prior_probs <= 0.0):
            raise ValueError("prior must be strictly positive")

    def action_probs(self, t: int, states) -> np.ndarray:
        q = self._q(t, states)
        return _softmax_with_prior(q, self.eta, self.prior_probs[None, :])
