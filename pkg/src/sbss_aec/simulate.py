"""Synthetic echo scenarios with exact ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve, lfilter

from ._validation import check_signal
from .exceptions import ConfigError, NumericError

FS = 16000


@dataclass
class Scenario:
    """One simulated recording. ``mixture == echo + near_end`` exactly."""

    far_end: np.ndarray
    near_end: np.ndarray
    echo: np.ndarray
    mixture: np.ndarray
    rir: np.ndarray
    clip_threshold: float
    ser_db: float
    fs: int = FS
    params: dict = field(default_factory=dict)

    def measured_ser_db(self) -> float:
        return 10.0 * math.log10(power(self.near_end) / power(self.echo))


def power(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.mean(x * x)) if x.size else 0.0


def hard_clip(x, threshold_frac: float = 0.2) -> np.ndarray:
    """Clamp ``x`` to ``+-threshold_frac * max|x|``."""
    if not 0.0 < threshold_frac <= 1.0:
        raise ConfigError(f"threshold_frac must lie in (0, 1], got {threshold_frac}")
    x = check_signal(x)
    if x.size == 0:
        return x.copy()
    level = threshold_frac * np.max(np.abs(x))
    return np.clip(x, -level, level)


def synth_rir(t60_ms: float = 300.0, fs: int = FS, length: int | None = None,
              seed: int = 0) -> np.ndarray:
    """Exponentially decaying white-noise room response with unit energy.

    The amplitude envelope ``exp(-3 ln(10) t / T60)`` drops 60 dB after
    ``T60``. ``length`` defaults to one ``T60`` worth of samples.
    """
    if not t60_ms > 0:
        raise ConfigError(f"t60_ms must be positive, got {t60_ms}")
    t60 = t60_ms * 1e-3 * fs
    if length is None:
        length = int(round(t60))
    if length <= 0:
        raise ConfigError(f"RIR length must be positive, got {length}")
    rng = np.random.default_rng(seed)
    t = np.arange(length)
    rir = rng.standard_normal(length) * np.exp(-3.0 * math.log(10.0) * t / t60)
    return rir / np.sqrt(np.sum(rir * rir))


def speech_like(n_samples: int, fs: int = FS, seed: int = 0,
                active_frac: float = 0.6) -> np.ndarray:
    """Coloured noise gated into talk spurts and pauses, peak-normalized to 1.

    Stands in for speech in tests: super-Gaussian amplitude distribution,
    low-pass spectral tilt, a few resonances, and silent gaps.
    """
    rng = np.random.default_rng(seed)
    tilt = lfilter([1.0], [1.0, -0.9], rng.standard_normal(n_samples))
    x = tilt.copy()
    for freq in rng.uniform(300.0, 3000.0, size=3):
        theta = 2 * math.pi * freq / fs
        x += 0.05 * lfilter([1.0], [1.0, -1.94 * math.cos(theta), 0.9409], tilt)
    gate = np.zeros(n_samples)
    pos = 0
    while pos < n_samples:
        seg = max(1, int(rng.exponential(0.35) * fs))
        if rng.random() < active_frac:
            gate[pos:pos + seg] = rng.uniform(0.3, 1.0)
        pos += seg
    smooth = np.hanning(max(3, int(0.02 * fs)))
    gate = np.convolve(gate, smooth / smooth.sum(), mode="same")
    # syllable-rate modulation
    t = np.arange(n_samples) / fs
    syll = 0.6 + 0.4 * np.sin(2 * math.pi * 4.0 * t + rng.uniform(0, 2 * math.pi))
    y = x * gate * syll
    peak = np.max(np.abs(y))
    return y / peak if peak > 0 else y


def make_echo(far_end, rir, nonlinearity: Callable | None = None) -> np.ndarray:
    """``rir * f(far_end)`` by direct convolution, truncated to the input length."""
    far_end = check_signal(far_end, "far_end")
    driven = far_end if nonlinearity is None else np.asarray(nonlinearity(far_end))
    return fftconvolve(driven, np.asarray(rir, dtype=np.float64))[: far_end.size]


def mix(near_end, echo, ser_db: float):
    """Scale ``near_end`` to the requested signal-to-echo ratio.

    SER is measured over the whole signal.

    Returns:
        ``(scaled_near_end, mixture)``
    """
    near_end = check_signal(near_end, "near_end")
    echo = check_signal(echo, "echo")
    if near_end.size != echo.size:
        raise ConfigError("near_end and echo lengths differ")
    p_s, p_v = power(near_end), power(echo)
    if not math.isfinite(ser_db):
        raise ConfigError(f"ser_db must be finite, got {ser_db}")
    if p_s <= 0.0 or p_v <= 0.0:
        raise NumericError("SER scaling needs nonzero near-end and echo power")
    gain = math.sqrt(p_v / p_s * 10.0 ** (ser_db / 10.0))
    scaled = near_end * gain
    return scaled, echo + scaled


def make_scenario(duration_s: float = 10.0, fs: int = FS, t60_ms: float = 300.0,
                  ser_db: float | None = 0.0, clip: float = 0.2, seed: int = 42,
                  rir_length: int | None = None, far_peak: float = 0.9,
                  nonlinearity: Callable | None = None) -> Scenario:
    """Hard-clipped loudspeaker, synthetic room, optional near-end talker.

    ``ser_db=None`` produces far-end single talk (zero near-end). A custom
    memoryless ``nonlinearity`` replaces the hard clip when given.
    """
    if duration_s <= 0:
        raise ConfigError("duration_s must be positive")
    n = int(round(duration_s * fs))
    seeds = np.random.SeedSequence(seed).spawn(3)
    far = far_peak * speech_like(n, fs, seed=int(seeds[0].generate_state(1)[0]))
    rir = synth_rir(t60_ms, fs, rir_length, seed=int(seeds[1].generate_state(1)[0]))
    if nonlinearity is None:
        nonlinearity = lambda x: hard_clip(x, clip)  # noqa: E731
    echo = make_echo(far, rir, nonlinearity)
    if ser_db is None:
        near = np.zeros(n)
        mixture = echo.copy()
    else:
        raw = speech_like(n, fs, seed=int(seeds[2].generate_state(1)[0]))
        near, mixture = mix(raw, echo, ser_db)
    params = dict(duration_s=duration_s, fs=fs, t60_ms=t60_ms, ser_db=ser_db,
                  clip=clip, seed=seed, rir_length=len(rir), far_peak=far_peak)
    return Scenario(far, near, echo, mixture, rir, clip * np.max(np.abs(far)),
                    ser_db if ser_db is not None else math.inf, fs, params)


def random_ctf_filters(order: int, n_bins: int, ctf_len: int, seed: int = 0,
                       decay: float = 0.5) -> np.ndarray:
    """Random complex CTF filters ``(order, n_bins, ctf_len)`` with geometric tap decay."""
    rng = np.random.default_rng(seed)
    shape = (order, n_bins, ctf_len)
    taps = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    return taps * decay ** np.arange(ctf_len)


def ctf_echo(ref_data, filters) -> np.ndarray:
    """Echo spectrum generated exactly by the CTF model.

    ``E[i, j] = sum_p sum_l A[p, i, l] X[p, i, j - l]`` with zero pre-history.

    Args:
        ref_data: ``(order, n_bins, n_frames)`` expanded-reference spectra.
        filters: ``(order, n_bins, ctf_len)`` CTF taps.
    """
    ref_data = np.asarray(ref_data)
    filters = np.asarray(filters)
    order, n_bins, n_frames = ref_data.shape
    ctf_len = filters.shape[2]
    out = np.zeros((n_bins, n_frames), dtype=np.complex128)
    for lag in range(min(ctf_len, n_frames)):
        out[:, lag:] += np.einsum("pi,pij->ij", filters[:, :, lag],
                                  ref_data[:, :, : n_frames - lag])
    return out
