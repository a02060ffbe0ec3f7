"""Dueling fully connected Q-network with hand-written backprop, plus the
adaptive-moment optimizer and global gradient-norm clipping it trains with.

Architecture: one shared ReLU layer, then separate ReLU streams for the state
value and the action advantages, combined as ``value + adv - mean(adv)``.
Everything is plain float64 numpy; gradients are exact, which the test suite
checks against central finite differences.
"""

from __future__ import annotations

import json

import numpy as np

PARAM_NAMES = (
    "shared_w", "shared_b",
    "value_w1", "value_b1", "value_w2", "value_b2",
    "adv_w1", "adv_b1", "adv_w2", "adv_b2",
)

CHECKPOINT_FORMAT = 1


def _linear_init(rng: np.random.Generator, fan_in: int, fan_out: int):
    # Uniform fan-in scaling for both weights and biases.
    bound = 1.0 / np.sqrt(fan_in)
    w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
    b = rng.uniform(-bound, bound, size=fan_out)
    return w, b


class DuelingQNetwork:
    """Maps observation batches to per-action value estimates."""

    def __init__(
        self,
        obs_dim: int,
        num_actions: int,
        hidden_width: int = 256,
        seed: int = 0,
        metadata: dict | None = None,
    ):
        self.obs_dim = obs_dim
        self.num_actions = num_actions
        self.hidden_width = hidden_width
        self.metadata = dict(metadata or {})
        rng = np.random.default_rng(seed)
        p = {}
        p["shared_w"], p["shared_b"] = _linear_init(rng, obs_dim, hidden_width)
        p["value_w1"], p["value_b1"] = _linear_init(rng, hidden_width, hidden_width)
        p["value_w2"], p["value_b2"] = _linear_init(rng, hidden_width, 1)
        p["adv_w1"], p["adv_b1"] = _linear_init(rng, hidden_width, hidden_width)
        p["adv_w2"], p["adv_b2"] = _linear_init(rng, hidden_width, num_actions)
        self.params = p

    # -- forward / backward -------------------------------------------------

    def forward(self, obs: np.ndarray) -> np.ndarray:
        q, _ = self._forward_cached(np.asarray(obs, dtype=np.float64))
        return q

    def _forward_cached(self, obs: np.ndarray):
        p = self.params
        h = np.maximum(obs @ p["shared_w"] + p["shared_b"], 0.0)
        hv = np.maximum(h @ p["value_w1"] + p["value_b1"], 0.0)
        value = hv @ p["value_w2"] + p["value_b2"]
        ha = np.maximum(h @ p["adv_w1"] + p["adv_b1"], 0.0)
        adv = ha @ p["adv_w2"] + p["adv_b2"]
        q = value + adv - adv.mean(axis=1, keepdims=True)
        return q, (obs, h, hv, ha)

    def _backward(self, cache, dq: np.ndarray) -> dict[str, np.ndarray]:
        obs, h, hv, ha = cache
        p = self.params
        g = {}
        dvalue = dq.sum(axis=1, keepdims=True)
        dadv = dq - dq.sum(axis=1, keepdims=True) / self.num_actions
        g["adv_w2"] = ha.T @ dadv
        g["adv_b2"] = dadv.sum(axis=0)
        dha = (dadv @ p["adv_w2"].T) * (ha > 0.0)
        g["adv_w1"] = h.T @ dha
        g["adv_b1"] = dha.sum(axis=0)
        g["value_w2"] = hv.T @ dvalue
        g["value_b2"] = dvalue.sum(axis=0)
        dhv = (dvalue @ p["value_w2"].T) * (hv > 0.0)
        g["value_w1"] = h.T @ dhv
        g["value_b1"] = dhv.sum(axis=0)
        dh = (dha @ p["adv_w1"].T + dhv @ p["value_w1"].T) * (h > 0.0)
        g["shared_w"] = obs.T @ dh
        g["shared_b"] = dh.sum(axis=0)
        return g

    def loss_and_grad(
        self, obs: np.ndarray, actions: np.ndarray, targets: np.ndarray
    ):
        """Mean squared TD error on the taken actions and its exact gradient."""
        q, cache = self._forward_cached(np.asarray(obs, dtype=np.float64))
        n = q.shape[0]
        rows = np.arange(n)
        err = q[rows, actions] - targets
        loss = float(np.mean(err**2))
        dq = np.zeros_like(q)
        dq[rows, actions] = 2.0 * err / n
        return loss, self._backward(cache, dq)

    # -- parameter plumbing --------------------------------------------------

    def params_copy(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def set_params(self, params: dict[str, np.ndarray]) -> None:
        for k in PARAM_NAMES:
            self.params[k] = params[k].copy()

    def save(self, path: str) -> None:
        """Checkpoint: versioned npz with row-major weights and JSON metadata."""
        meta = {
            "format": CHECKPOINT_FORMAT,
            "obs_dim": self.obs_dim,
            "num_actions": self.num_actions,
            "hidden_width": self.hidden_width,
            "metadata": self.metadata,
        }
        np.savez(path, __meta__=json.dumps(meta), **self.params)

    @classmethod
    def load(cls, path: str) -> "DuelingQNetwork":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["__meta__"]))
            if meta.get("format") != CHECKPOINT_FORMAT:
                raise ValueError(
                    f"unsupported checkpoint format {meta.get('format')!r}"
                )
            net = cls(
                meta["obs_dim"],
                meta["num_actions"],
                meta["hidden_width"],
                metadata=meta.get("metadata"),
            )
            net.set_params({k: data[k] for k in PARAM_NAMES})
        return net


def clip_gradients(
    grads: dict[str, np.ndarray], max_norm: float
) -> tuple[dict[str, np.ndarray], float]:
    """Scale all gradients so the global L2 norm is at most ``max_norm``."""
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if total > max_norm > 0.0:
        scale = max_norm / total
        grads = {k: g * scale for k, g in grads.items()}
    return grads, total


class Adam:
    """Adaptive-moment estimation with bias correction."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.step_count += 1
        b1c = 1.0 - self.beta1**self.step_count
        b2c = 1.0 - self.beta2**self.step_count
        for k, g in grads.items():
            m = self._m.setdefault(k, np.zeros_like(g))
            v = self._v.setdefault(k, np.zeros_like(g))
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            params[k] = params[k] - self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)
