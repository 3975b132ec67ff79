"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import numpy as np

from .config import AecConfig
from .exceptions import ConfigError, NumericError, StructuralError


def check_signal(x, name="signal") -> np.ndarray:
    """Return ``x`` as a finite 1-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise StructuralError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains NaN or Inf")
    return arr


def check_pair(mic, far_end):
    """Validate a microphone/far-end pair, zero-padding the shorter one."""
    mic = check_signal(mic, "mic")
    far_end = check_signal(far_end, "far_end")
    n = max(mic.size, far_end.size)
    if mic.size < n:
        mic = np.pad(mic, (0, n - mic.size))
    if far_end.size < n:
        far_end = np.pad(far_end, (0, n - far_end.size))
    return mic, far_end


def check_config(config) -> AecConfig:
    if config is None:
        return AecConfig()
    if isinstance(config, AecConfig):
        config.validate()
        return config
    if isinstance(config, dict):
        return AecConfig.from_mapping(config)
    raise ConfigError(f"expected AecConfig, got {type(config).__name__}")


def check_square(V, name="V") -> np.ndarray:
    V = np.asarray(V)
    if V.ndim < 2 or V.shape[-1] != V.shape[-2]:
        raise StructuralError(f"{name} must be square, got shape {V.shape}")
    return V
