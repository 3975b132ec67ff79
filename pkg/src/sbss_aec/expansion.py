"""Odd-power expansion of the far-end reference and CTF observation stacking."""

from __future__ import annotations

import numpy as np

from ._validation import check_config, check_signal
from .exceptions import ConfigError, StructuralError
from .spectral import Spectrogram, analyze


def expand_reference(x, order: int) -> np.ndarray:
    """Odd powers ``x, x^3, ..., x^(2*order - 1)`` as rows of a ``(order, n)`` array."""
    if int(order) != order or order < 1:
        raise ConfigError(f"expansion order must be a positive integer, got {order}")
    x = check_signal(x, "reference")
    out = np.empty((int(order), x.size))
    out[0] = x
    x2 = x * x
    for p in range(1, int(order)):
        out[p] = out[p - 1] * x2
    return out


def analyze_reference(x, config=None) -> list[Spectrogram]:
    """Expand in the time domain, then STFT every channel."""
    config = check_config(config)
    return [analyze(ch, config) for ch in expand_reference(x, config.order)]


def block_index(p: int, lag: int, ctf_len: int) -> int:
    """Position of ``X[p, j - lag]`` in the stacked observation."""
    return 1 + p * ctf_len + lag


def _check_grids(mic_spec: Spectrogram, ref_specs) -> None:
    if len(ref_specs) == 0:
        raise StructuralError("at least one reference spectrogram is required")
    for p, ref in enumerate(ref_specs):
        if not mic_spec.same_grid(ref):
            raise StructuralError(
                f"reference channel {p} has shape {ref.data.shape}, "
                f"microphone has {mic_spec.data.shape}"
            )


def stack_observation(mic_spec: Spectrogram, ref_specs, i: int, j: int, ctf_len: int):
    """Stacked observation for a single bin ``i`` and frame ``j``.

    Layout is ``[Y, X_0[j], ..., X_0[j-L+1], X_1[j], ..., X_{P-1}[j-L+1]]``;
    frames before the start of the signal contribute zeros.
    """
    _check_grids(mic_spec, ref_specs)
    if ctf_len < 1:
        raise ConfigError("ctf_len must be >= 1")
    order = len(ref_specs)
    y = np.zeros(order * ctf_len + 1, dtype=np.complex128)
    y[0] = mic_spec.data[i, j]
    for p, ref in enumerate(ref_specs):
        lags = np.arange(ctf_len)
        valid = j - lags >= 0
        y[1 + p * ctf_len + lags[valid]] = ref.data[i, j - lags[valid]]
    return y


def delay_stack(ref_data: np.ndarray, ctf_len: int) -> np.ndarray:
    """All reference delay lines at once.

    Args:
        ref_data: ``(order, n_bins, n_frames)`` reference spectra.
        ctf_len: taps per channel.

    Returns:
        ``(n_frames, n_bins, order * ctf_len)`` array whose block ``p`` holds
        ``X_p[j], X_p[j-1], ..., X_p[j-L+1]``.
    """
    order, n_bins, n_frames = ref_data.shape
    out = np.zeros((n_frames, n_bins, order * ctf_len), dtype=np.complex128)
    for p in range(order):
        for lag in range(min(ctf_len, n_frames)):
            out[lag:, :, p * ctf_len + lag] = ref_data[p, :, : n_frames - lag].T
    return out


def stack_all(mic_spec: Spectrogram, ref_specs, ctf_len: int) -> np.ndarray:
    """Stacked observations for every frame and bin, ``(n_frames, n_bins, dim)``."""
    _check_grids(mic_spec, ref_specs)
    ref = np.stack([r.data for r in ref_specs])
    refs = delay_stack(ref, ctf_len)
    return np.concatenate([mic_spec.data.T[:, :, None], refs], axis=2)
