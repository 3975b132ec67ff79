"""Configuration for the echo canceller."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .exceptions import ConfigError

SOLVERS = ("ip", "eiss")


@dataclass(frozen=True)
class AecConfig:
    """All tunables of the semi-blind echo canceller.

    Defaults follow the reference experimental setup: 1024-point Hann frames
    with 75 % overlap at 16 kHz, third-order odd-power expansion, five CTF
    taps, forgetting factor 0.992 and generalized-Gaussian shape 0.4.

    Attributes:
        frame_len: Analysis frame length in samples.
        hop: Frame advance in samples; must divide ``frame_len``.
        fft_size: FFT length. ``None`` means ``frame_len``.
        order: Number of odd-power expansion channels (x, x^3, x^5, ...).
        ctf_len: Number of CTF taps per expansion channel.
        alpha: Forgetting factor of the weighted covariance, in (0, 1).
        beta: Shape parameter of the source prior, > 0.
        r_floor: Lower bound on the auxiliary norm before weighting.
        v_init_scale: Initial covariance is ``v_init_scale * I``.
        solver: ``"ip"`` or ``"eiss"``.
        n_sweeps: EISS coordinate sweeps per frame.
        fs: Sample rate in Hz.
    """

    frame_len: int = 1024
    hop: int = 256
    fft_size: int | None = None
    order: int = 3
    ctf_len: int = 5
    alpha: float = 0.992
    beta: float = 0.4
    r_floor: float = 1e-6
    v_init_scale: float = 1e-3
    solver: str = "eiss"
    n_sweeps: int = 1
    fs: int = 16000

    def __post_init__(self):
        if self.fft_size is None:
            object.__setattr__(self, "fft_size", self.frame_len)
        object.__setattr__(self, "solver", str(self.solver).lower())
        self.validate()

    def validate(self) -> None:
        if self.frame_len <= 0 or self.hop <= 0:
            raise ConfigError("frame_len and hop must be positive")
        if self.frame_len % self.hop:
            raise ConfigError(
                f"hop ({self.hop}) must divide frame_len ({self.frame_len})"
            )
        if self.fft_size != self.frame_len:
            raise ConfigError("fft_size must equal frame_len")
        if self.fft_size % 2:
            raise ConfigError("fft_size must be even")
        if self.order < 1:
            raise ConfigError(f"expansion order must be >= 1, got {self.order}")
        if self.ctf_len < 1:
            raise ConfigError(f"CTF length must be >= 1, got {self.ctf_len}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if not self.r_floor > 0.0:
            raise ConfigError("r_floor must be positive")
        if not self.v_init_scale > 0.0:
            raise ConfigError("v_init_scale must be positive")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.n_sweeps < 1:
            raise ConfigError("n_sweeps must be >= 1")
        if self.fs <= 0:
            raise ConfigError("fs must be positive")

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def dim(self) -> int:
        """Length of the stacked observation, ``order * ctf_len + 1``."""
        return self.order * self.ctf_len + 1

    @property
    def overlap(self) -> float:
        return 1.0 - self.hop / self.frame_len

    def replace(self, **changes) -> "AecConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "AecConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**dict(values))


def load_toml(path: str | Path) -> dict[str, Any]:
    """Read a TOML file; an ``[aec]`` table is used if present."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib

    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return dict(data.get("aec", data))


def resolve_config(toml_path=None, **overrides) -> AecConfig:
    """Defaults < TOML file < explicit overrides (``None`` overrides are ignored)."""
    values: dict[str, Any] = {}
    if toml_path is not None:
        values.update(load_toml(toml_path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return AecConfig.from_mapping(values)
