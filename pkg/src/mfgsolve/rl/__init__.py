from .dqn import DqnHyperparams, ReplayBuffer, dqn_train, epsilon_at
from .loop import boltzmann_dqn_iteration, check_value_fitting_mode
from .network import Adam, DuelingQNetwork, clip_gradients
from .policies import (
    BoltzmannNetworkPolicy,
    GreedyNetworkPolicy,
    greedy_policy_from_network,
    network_q_table,
)

__all__ = [
    "DqnHyperparams",
    "ReplayBuffer",
    "dqn_train",
    "epsilon_at",
    "boltzmann_dqn_iteration",
    "check_value_fitting_mode",
    "Adam",
    "DuelingQNetwork",
    "clip_gradients",
    "BoltzmannNetworkPolicy",
    "GreedyNetworkPolicy",
    "greedy_policy_from_network",
    "network_q_table",
]
