"""Exact finite-horizon dynamic programming in the MDP induced by a fixed
mean field.

Everything here runs on dense (T, S, A) tables and is pure: optimal and
entropy-regularized backward inductions, policy evaluation, greedy and
softmax-with-prior policy construction, the forward state-distribution
recursion, objective values, and the temperature threshold above which the
regularized fixed-point map is a contraction.  Environments whose table would
exceed ``MAX_TABLE_CELLS`` are refused; use the particle/DQN path for those.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import MeanField, Policy, check_temperature
from .envs.base import EnvironmentSpec
from .errors import CapacityError, DimensionError

MAX_TABLE_CELLS = 1_000_000
ARGMAX_ATOL = 1e-10

TieRule = Literal["first_optimal", "uniform_over_optimal"]
_TIE_RULES = ("first_optimal", "uniform_over_optimal")


@dataclass(frozen=True)
class QTable:
    """Dense action values indexed by (t, s, a).

    ``kind`` records which recursion produced it: "optimal" (hard max),
    "soft" (weighted smooth max), or "policy" (evaluation of a fixed policy).
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 3:
            raise DimensionError(f"Q table must be 3-d (T, S, A), got {arr.ndim}-d")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Q table has non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


def check_tabular(env: EnvironmentSpec, max_cells: int = MAX_TABLE_CELLS) -> None:
    cells = env.horizon * env.num_states * env.num_actions
    if cells > max_cells:
        raise CapacityError(
            f"{env.name}: {cells} table cells exceed the exact-DP cap "
            f"{max_cells}; use the particle simulation / DQN pipeline"
        )


def _check_mu(env: EnvironmentSpec, mu: MeanField) -> None:
    if mu.per_time.shape != (env.horizon, env.num_states):
        raise DimensionError(
            f"mean field shape {mu.per_time.shape} does not match environment "
            f"({env.horizon}, {env.num_states})"
        )


def _check_pi(env: EnvironmentSpec, pi: Policy) -> None:
    expected = (env.horizon, env.num_states, env.num_actions)
    if pi.per_time_state.shape != expected:
        raise DimensionError(
            f"policy shape {pi.per_time_state.shape} does not match environment {expected}"
        )


def optimal_q(env: EnvironmentSpec, mu: MeanField) -> QTable:
    """Backward induction for the optimal action values under a frozen flow.

    The last time slice equals the reward slice; earlier slices add the
    transition-weighted hard maximum of the next slice.
    """
    check_tabular(env)
    _check_mu(env, mu)
    T = env.horizon
    q = np.empty((T, env.num_states, env.num_actions))
    q[T - 1] = env.reward_table(mu.at(T - 1))
    for t in range(T - 2, -1, -1):
        v_next = q[t + 1].max(axis=1)
        q[t] = env.reward_table(mu.at(t)) + env.transition_table(mu.at(t)) @ v_next
    return QTable(q, kind="optimal")


def soft_value(q_row: np.ndarray, eta: float, prior_row: np.ndarray) -> float:
    """Stable weighted smooth maximum ``eta * log sum_a prior_a exp(q_a / eta)``."""
    m = q_row.max()
    return float(m + eta * np.log(np.exp((q_row - m) / eta) @ prior_row))


def soft_q(
    env: EnvironmentSpec, mu: MeanField, eta: float, prior: Policy
) -> QTable:
    """Entropy-regularized backward induction (smooth maximum with prior).

    The per-state smooth maximum of the next slice is computed shift-stably,
    so tiny temperatures degrade gracefully toward the hard maximum instead
    of overflowing.
    """
    check_tabular(env)
    _check_mu(env, mu)
    _check_pi(env, prior)
    prior.require_positive()
    eta = check_temperature(eta)
    T = env.horizon
    qp = prior.per_time_state
    q = np.empty((T, env.num_states, env.num_actions))
    q[T - 1] = env.reward_table(mu.at(T - 1))
    for t in range(T - 2, -1, -1):
        m = q[t + 1].max(axis=1, keepdims=True)
        v_next = (
            m[:, 0]
            + eta * np.log(np.sum(qp[t + 1] * np.exp((q[t + 1] - m) / eta), axis=1))
        )
        q[t] = env.reward_table(mu.at(t)) + env.transition_table(mu.at(t)) @ v_next
    return QTable(q, kind="soft")


def policy_q(env: EnvironmentSpec, mu: MeanField, pi: Policy) -> QTable:
    """Policy-evaluation table: bootstraps with the policy-weighted next slice."""
    check_tabular(env)
    _check_mu(env, mu)
    _check_pi(env, pi)
    T = env.horizon
    q = np.empty((T, env.num_states, env.num_actions))
    q[T - 1] = env.reward_table(mu.at(T - 1))
    for t in range(T - 2, -1, -1):
        v_next = np.sum(pi.per_time_state[t + 1] * q[t + 1], axis=1)
        q[t] = env.reward_table(mu.at(t)) + env.transition_table(mu.at(t)) @ v_next
    return QTable(q, kind="policy")


def greedy_policy(q: QTable, tie: TieRule = "first_optimal") -> Policy:
    """Deterministic-support policy over the argmax set of every (t, s) row.

    Ties are resolved within absolute tolerance ``ARGMAX_ATOL``: either all
    mass on the first optimal action or spread evenly over all of them.
    """
    if tie not in _TIE_RULES:
        raise ValueError(f"unknown tie rule {tie!r}, expected one of {_TIE_RULES}")
    vals = q.values
    best = vals.max(axis=2, keepdims=True)
    optimal = vals >= best - ARGMAX_ATOL
    out = np.zeros_like(vals)
    if tie == "uniform_over_optimal":
        out = optimal / optimal.sum(axis=2, keepdims=True)
    else:
        first = optimal.argmax(axis=2)
        t_idx, s_idx = np.indices(first.shape)
        out[t_idx, s_idx, first] = 1.0
    return Policy(out)


def boltzmann_policy(q: QTable, eta: float, prior: Policy) -> Policy:
    """Softmax-with-prior rows ``prior * exp(Q / eta)``, renormalized.

    Computed with the per-row maximum shifted out, so very low temperatures
    underflow to the greedy policy (weighted by the prior on exact ties)
    rather than produce NaN.
    """
    eta = check_temperature(eta)
    prior.require_positive()
    if q.values.shape != prior.per_time_state.shape:
        raise DimensionError(
            f"Q shape {q.values.shape} does not match prior "
            f"{prior.per_time_state.shape}"
        )
    z = np.log(prior.per_time_state) + q.values / eta
    z -= z.max(axis=2, keepdims=True)
    w = np.exp(z)
    return Policy(w / w.sum(axis=2, keepdims=True))


def induced_mean_field(env: EnvironmentSpec, pi: Policy) -> MeanField:
    """Forward pushforward of the initial distribution under the policy."""
    check_tabular(env)
    _check_pi(env, pi)
    T = env.horizon
    mu = np.empty((T, env.num_states))
    mu[0] = env.initial_dist
    for t in range(T - 1):
        flow = pi.per_time_state[t][:, :, None] * env.transition_table(mu[t])
        mu[t + 1] = np.einsum("s,san->n", mu[t], flow)
    return MeanField(mu)


def objective_value(env: EnvironmentSpec, mu: MeanField, pi: Policy) -> float:
    """Expected total reward of the policy in the frozen-flow MDP."""
    qpi = policy_q(env, mu, pi)
    first = np.sum(pi.per_time_state[0] * qpi.values[0], axis=1)
    return float(env.initial_dist @ first)


def regularized_objective(
    env: EnvironmentSpec,
    mu: MeanField,
    pi: Policy,
    eta: float,
    prior: Policy,
) -> float:
    """Expected total reward minus the temperature-weighted KL penalty
    against the prior, accumulated along the state-visitation flow."""
    check_tabular(env)
    _check_mu(env, mu)
    _check_pi(env, pi)
    _check_pi(env, prior)
    prior.require_positive()
    eta = check_temperature(eta)
    p = pi.per_time_state
    qp = prior.per_time_state
    kl_rows = np.where(p > 0.0, p * (np.log(np.where(p > 0.0, p, 1.0)) - np.log(qp)), 0.0)
    rho = env.initial_dist.copy()
    total = 0.0
    for t in range(env.horizon):
        gain = np.sum(p[t] * env.reward_table(mu.at(t)), axis=1)
        total += float(rho @ (gain - eta * kl_rows[t].sum(axis=1)))
        if t + 1 < env.horizon:
            step = p[t][:, :, None] * env.transition_table(mu.at(t))
            rho = np.einsum("s,san->n", rho, step)
    return total


def contractivity_threshold(
    k_q: float, k_psi: float, num_actions: int, q_max: float, q_min: float
) -> float:
    """Temperature above which softmax fixed-point iteration must contract:
    ``|A| (|A| - 1) K_Q K_Psi q_max^2 / (2 q_min^2)``."""
    if num_actions < 1:
        raise ValueError("num_actions must be a positive integer")
    if k_q < 0.0 or k_psi < 0.0:
        raise ValueError("Lipschitz constants must be nonnegative")
    if q_min <= 0.0 or q_max < q_min:
        raise ValueError("prior bounds must satisfy 0 < q_min <= q_max")
    return (
        num_actions * (num_actions - 1) * k_q * k_psi * q_max**2 / (2.0 * q_min**2)
    )
