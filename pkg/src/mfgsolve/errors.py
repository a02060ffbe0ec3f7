"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Tensor shapes do not match the operation's contract."""


class CapacityError(RuntimeError):
    """State space too large for an exact tabular computation."""


class ConfigError(ValueError):
    """Invalid experiment or solver configuration."""


class TrainingDivergedError(RuntimeError):
    """Q-network training produced NaN/inf values."""
