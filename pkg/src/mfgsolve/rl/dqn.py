"""Q-learning with replay, a target network, and an epsilon-greedy schedule,
trained on the single-agent MDP induced by a frozen mean field.

One environment step is followed by one minibatch descent step; updates start
once the buffer holds a full batch, the target network is synced on a fixed
step period, and terminal transitions (the last step of the finite horizon)
carry no bootstrap term.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import TrainingDivergedError
from .network import Adam, DuelingQNetwork, clip_gradients


@dataclass(frozen=True)
class DqnHyperparams:
    replay_capacity: int = 10000
    learning_rate: float = 0.0005
    discount: float = 0.99
    target_update_every: int = 500
    grad_clip_norm: float = 40.0
    batch_size: int = 128
    epsilon_start: float = 1.0
    epsilon_end: float = 0.02
    epsilon_end_fraction: float = 0.8
    epochs: int = 1000
    hidden_width: int = 256

    def __post_init__(self):
        positive = (
            self.replay_capacity, self.learning_rate, self.discount,
            self.target_update_every, self.grad_clip_norm, self.batch_size,
            self.epsilon_start, self.epsilon_end, self.epsilon_end_fraction,
            self.epochs, self.hidden_width,
        )
        if any(x <= 0 for x in positive):
            raise ValueError("all hyperparameters must be positive")
        if self.epsilon_end > self.epsilon_start:
            raise ValueError("epsilon_end must not exceed epsilon_start")

    def with_overrides(self, **kwargs) -> "DqnHyperparams":
        return replace(self, **kwargs)


def epsilon_at(step: int, total_steps: int, hp: DqnHyperparams) -> float:
    """Linear from start to end over the first ``epsilon_end_fraction`` of
    training, constant afterwards."""
    ramp = hp.epsilon_end_fraction * total_steps
    if step >= ramp:
        return hp.epsilon_end
    return hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * step / ramp


class ReplayBuffer:
    """Fixed-capacity FIFO transition store with uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.terminals = np.zeros(capacity)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, obs, action: int, reward: float, next_obs, terminal: bool) -> None:
        i = self._next
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.terminals[i] = float(terminal)
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int):
        idx = rng.integers(self._size, size=batch_size)
        return (
            self.obs[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_obs[idx],
            self.terminals[idx],
        )


def dqn_train(mdp, hp: DqnHyperparams, seed: int) -> DuelingQNetwork:
    """Train a dueling Q-network on a frozen-flow MDP.

    ``mdp`` provides ``horizon``, ``num_actions``, ``obs_dim``,
    ``sample_initial``, ``step`` and ``observe``.  Raises
    ``TrainingDivergedError`` as soon as the loss or parameters go non-finite.
    """
    init_ss, run_ss = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(run_ss)
    net = DuelingQNetwork(
        mdp.obs_dim,
        mdp.num_actions,
        hp.hidden_width,
        seed=init_ss,
        metadata={"seed": seed},
    )
    target = net.params_copy()
    target_net = DuelingQNetwork(mdp.obs_dim, mdp.num_actions, hp.hidden_width)
    target_net.set_params(target)
    opt = Adam(hp.learning_rate)
    buffer = ReplayBuffer(hp.replay_capacity, mdp.obs_dim)
    total_steps = hp.epochs * mdp.horizon
    step = 0
    for _ in range(hp.epochs):
        state = mdp.sample_initial(rng)
        obs = mdp.observe(0, state)
        for t in range(mdp.horizon):
            if rng.random() < epsilon_at(step, total_steps, hp):
                action = int(rng.integers(mdp.num_actions))
            else:
                action = int(np.argmax(net.forward(obs[None])[0]))
            reward, nxt = mdp.step(rng, t, state, action)
            next_obs = mdp.observe(t + 1, nxt)
            buffer.add(obs, action, reward, next_obs, t == mdp.horizon - 1)
            if len(buffer) >= hp.batch_size:
                b_obs, b_act, b_rew, b_next, b_term = buffer.sample(rng, hp.batch_size)
                bootstrap = target_net.forward(b_next).max(axis=1)
                targets = b_rew + hp.discount * bootstrap * (1.0 - b_term)
                loss, grads = net.loss_and_grad(b_obs, b_act, targets)
                if not np.isfinite(loss):
                    raise TrainingDivergedError(
                        f"non-finite loss at step {step} "
                        f"(|targets| up to {np.abs(targets).max():g})"
                    )
                grads, _ = clip_gradients(grads, hp.grad_clip_norm)
                opt.step(net.params, grads)
            step += 1
            if step % hp.target_update_every == 0:
                target_net.set_params(net.params_copy())
            state, obs = nxt, next_obs
    return net
