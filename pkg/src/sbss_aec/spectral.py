"""STFT analysis and overlap-add synthesis.

Conventions (fixed throughout the package):

* periodic Hann analysis window, no synthesis window;
* forward FFT unnormalized, inverse scaled by ``1/fft_size`` (``numpy.fft``);
* ``frame_len - hop`` zeros are prepended so that frame 0 ends with the first
  hop of the signal; the trailing partial frame is zero-padded.

Frame ``j`` therefore covers padded samples ``[j*hop, j*hop + frame_len)`` and
the number of frames is ``ceil(len / hop)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from ._validation import check_config, check_signal
from .exceptions import ConfigError, StructuralError


@dataclass
class Spectrogram:
    """One-sided STFT, ``data[bin, frame]``."""

    data: np.ndarray
    frame_len: int
    hop: int
    fft_size: int
    n_samples: int = 0

    @property
    def n_bins(self) -> int:
        return self.data.shape[0]

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 2 or self.data.shape[0] != self.fft_size // 2 + 1:
            raise StructuralError(
                f"spectrogram data must have {self.fft_size // 2 + 1} bins, "
                f"got shape {self.data.shape}"
            )

    def same_grid(self, other: "Spectrogram") -> bool:
        return (
            self.data.shape == other.data.shape
            and self.frame_len == other.frame_len
            and self.hop == other.hop
            and self.fft_size == other.fft_size
        )


def hann(frame_len: int) -> np.ndarray:
    return get_window("hann", frame_len, fftbins=True)


def n_frames_for(n_samples: int, hop: int) -> int:
    return -(-n_samples // hop)


def frame_signal(x, frame_len: int, hop: int) -> np.ndarray:
    """Zero-padded, unwindowed frames, shape ``(n_frames, frame_len)``."""
    x = check_signal(x)
    if frame_len % hop:
        raise ConfigError(f"hop ({hop}) must divide frame_len ({frame_len})")
    n_frames = n_frames_for(x.size, hop)
    if n_frames == 0:
        return np.zeros((0, frame_len))
    lead = frame_len - hop
    padded = np.zeros(lead + n_frames * hop)
    padded[lead:lead + x.size] = x
    view = np.lib.stride_tricks.sliding_window_view(padded, frame_len)[::hop]
    return view[:n_frames].copy()


def analyze(signal, config=None) -> Spectrogram:
    """Windowed one-sided STFT of a real signal."""
    config = check_config(config)
    frames = frame_signal(signal, config.frame_len, config.hop)
    data = np.fft.rfft(frames * hann(config.frame_len), n=config.fft_size, axis=1).T
    return Spectrogram(
        data=np.ascontiguousarray(data),
        frame_len=config.frame_len,
        hop=config.hop,
        fft_size=config.fft_size,
        n_samples=len(signal),
    )


def window_envelope(n_frames: int, frame_len: int, hop: int) -> np.ndarray:
    """Overlap-added analysis window over the padded time axis."""
    win = hann(frame_len)
    env = np.zeros((n_frames - 1) * hop + frame_len) if n_frames else np.zeros(0)
    for j in range(n_frames):
        env[j * hop:j * hop + frame_len] += win
    return env


def synthesize(spec: Spectrogram, config=None, n_samples=None) -> np.ndarray:
    """Overlap-add inverse of :func:`analyze`.

    Frames are overlap-added without a synthesis window and divided by the
    overlap-added analysis window. Samples where that envelope drops below
    5 % of its steady-state value (the last few samples of the final partial
    frame) are divided by that floor instead, which keeps processed spectra
    from being amplified at the edge.
    """
    config = check_config(config)
    if (spec.frame_len, spec.hop, spec.fft_size) != (
        config.frame_len, config.hop, config.fft_size
    ):
        raise ConfigError(
            "spectrogram framing "
            f"({spec.frame_len}, {spec.hop}, {spec.fft_size}) does not match config"
        )
    if n_samples is None:
        n_samples = spec.n_samples or spec.n_frames * spec.hop
    if spec.n_frames == 0:
        return np.zeros(n_samples)
    frame_len, hop = spec.frame_len, spec.hop
    frames = np.fft.irfft(spec.data.T, n=spec.fft_size, axis=1)[:, :frame_len]
    out = np.zeros((spec.n_frames - 1) * hop + frame_len)
    for j in range(spec.n_frames):
        out[j * hop:j * hop + frame_len] += frames[j]
    env = window_envelope(spec.n_frames, frame_len, hop)
    cola = frame_len / (2.0 * hop)
    out /= np.maximum(env, 0.05 * cola)
    lead = frame_len - hop
    result = out[lead:lead + n_samples]
    if result.size < n_samples:
        result = np.pad(result, (0, n_samples - result.size))
    return result


def interior_slice(n_samples: int, frame_len: int, hop: int) -> slice:
    """Samples covered by a full set of ``frame_len / hop`` frames."""
    n_frames = n_frames_for(n_samples, hop)
    stop = max(0, (n_frames - 1) * hop - (frame_len - hop) + hop)
    return slice(0, min(stop, n_samples))


def frame_energy(spec: Spectrogram) -> np.ndarray:
    """Per-frame time-domain energy from the one-sided spectrum (Parseval).

    With the unnormalized forward FFT, ``sum(frame**2) = sum(c_k |X_k|^2) / N``
    where ``c_k`` is 1 for DC and Nyquist and 2 otherwise.
    """
    weights = np.full(spec.n_bins, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    return weights @ (np.abs(spec.data) ** 2) / spec.fft_size
