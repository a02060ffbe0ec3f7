"""Simplex-valued tensors (mean-field flows, Markov policies) and their metrics.

A mean field is a time-indexed family of distributions over states, a policy a
(time, state)-indexed family of distributions over actions.  Both are stored as
dense float64 arrays whose rows are probability vectors.  Constructors
normalize rows exactly after validating them to tolerance; all operations are
pure and inputs are frozen (read-only arrays), so values can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

SIMPLEX_ATOL = 1e-9


def as_distribution(values, *, what: str = "distribution") -> np.ndarray:
    """Validate an array whose last axis holds probability vectors.

    Entries must be nonnegative and each row must sum to 1 within
    ``SIMPLEX_ATOL``.  Returns a float64 copy with rows renormalized exactly
    and the write flag cleared.
    """
    arr = np.array(values, dtype=np.float64)
    if arr.ndim < 1 or arr.shape[-1] < 1:
        raise DimensionError(f"{what} needs at least one category")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} has non-finite entries")
    if np.any(arr < 0.0):
        raise ValueError(f"{what} has negative entries (min {arr.min():g})")
    sums = arr.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > SIMPLEX_ATOL):
        worst = np.abs(sums - 1.0).max()
        raise ValueError(f"{what} rows deviate from sum 1 by {worst:g}")
    arr /= sums[..., None]
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MeanField:
    """State-distribution flow: ``per_time[t, s]`` with one row per time step."""

    per_time: np.ndarray

    def __post_init__(self):
        arr = as_distribution(self.per_time, what="mean field")
        if arr.ndim != 2:
            raise DimensionError(f"mean field must be 2-d (T, S), got {arr.ndim}-d")
        object.__setattr__(self, "per_time", arr)

    @property
    def horizon(self) -> int:
        return self.per_time.shape[0]

    @property
    def num_states(self) -> int:
        return self.per_time.shape[1]

    def at(self, t: int) -> np.ndarray:
        return self.per_time[t]


@dataclass(frozen=True)
class Policy:
    """Markov policy: ``per_time_state[t, s, a]``; also used as the prior."""

    per_time_state: np.ndarray

    def __post_init__(self):
        arr = as_distribution(self.per_time_state, what="policy")
        if arr.ndim != 3:
            raise DimensionError(
                f"policy must be 3-d (T, S, A), got {arr.ndim}-d"
            )
        object.__setattr__(self, "per_time_state", arr)

    @property
    def horizon(self) -> int:
        return self.per_time_state.shape[0]

    @property
    def num_states(self) -> int:
        return self.per_time_state.shape[1]

    @property
    def num_actions(self) -> int:
        return self.per_time_state.shape[2]

    @property
    def is_positive(self) -> bool:
        return bool(np.all(self.per_time_state > 0.0))

    def require_positive(self) -> "Policy":
        """Check suitability as a prior: every entry strictly positive."""
        if not self.is_positive:
            raise ValueError("prior policy must put positive mass on every action")
        return self

    @staticmethod
    def uniform(horizon: int, num_states: int, num_actions: int) -> "Policy":
        return Policy(
            np.full((horizon, num_states, num_actions), 1.0 / num_actions)
        )


def check_temperature(eta: float) -> float:
    eta = float(eta)
    if not np.isfinite(eta) or eta <= 0.0:
        raise ValueError(f"temperature must be a positive real, got {eta}")
    return eta


def tv_distance(p, q) -> float:
    """Total variation distance ``0.5 * sum |p - q|`` between two distributions."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DimensionError(f"length mismatch {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def policy_distance(pi: Policy, pi2: Policy) -> float:
    """Sup metric over (t, s) of the total variation between action rows."""
    a, b = pi.per_time_state, pi2.per_time_state
    if a.shape != b.shape:
        raise DimensionError(f"policy shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum(axis=-1).max())


def meanfield_distance(mu: MeanField, mu2: MeanField) -> float:
    """Sup metric over time of the total variation between state rows."""
    a, b = mu.per_time, mu2.per_time
    if a.shape != b.shape:
        raise DimensionError(f"mean field shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum(axis=-1).max())


def mix(a, b, lam: float):
    """Convex combination ``lam * a + (1 - lam) * b`` of two like-shaped values.

    Accepts two policies or two mean fields; rows are renormalized so the
    result satisfies the simplex invariants exactly.  Used for the
    fictitious-play running averages.
    """
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"mixing weight must lie in [0, 1], got {lam}")
    if isinstance(a, Policy) and isinstance(b, Policy):
        x, y, ctor = a.per_time_state, b.per_time_state, Policy
    elif isinstance(a, MeanField) and isinstance(b, MeanField):
        x, y, ctor = a.per_time, b.per_time, MeanField
    else:
        raise TypeError("mix expects two Policy or two MeanField values")
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    return ctor(lam * x + (1.0 - lam) * y)
