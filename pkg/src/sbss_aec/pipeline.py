"""Streaming frame loop: stack, weight, update covariance, solve, extract."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model
from ._validation import check_config, check_pair, check_signal
from .config import AecConfig
from .exceptions import StructuralError
from .expansion import analyze_reference, stack_all
from .solvers import _kernels
from .solvers.ip import JITTER
from .spectral import Spectrogram, analyze, synthesize

_SOLVER_CODES = {"ip": _kernels.IP, "eiss": _kernels.EISS}


@dataclass
class AecState:
    """Mutable per-stream state; owned by exactly one stream."""

    config: AecConfig
    V: np.ndarray
    w: np.ndarray
    ref_history: np.ndarray
    frame: int = 0
    held: int = 0
    record: bool = False
    trace: list = field(default_factory=list)

    @classmethod
    def initial(cls, config=None, record=False) -> "AecState":
        config = check_config(config)
        n_bins, dim = config.n_bins, config.dim
        return cls(
            config=config,
            V=model.init_covariance(n_bins, dim, config.v_init_scale),
            w=model.init_filters(n_bins, dim),
            ref_history=np.zeros(
                (config.order, n_bins, config.ctf_len), dtype=np.complex128
            ),
            record=record,
        )


@dataclass(frozen=True)
class FilterTrace:
    """Normalized filters after every frame, ``filters[frame, bin, :]``."""

    filters: np.ndarray

    def __post_init__(self):
        self.filters.setflags(write=False)

    @property
    def n_frames(self) -> int:
        return self.filters.shape[0]

    @property
    def n_bins(self) -> int:
        return self.filters.shape[1]

    @property
    def dim(self) -> int:
        return self.filters.shape[2]

    @classmethod
    def identity(cls, n_frames: int, config=None) -> "FilterTrace":
        config = check_config(config)
        filters = np.zeros((n_frames, config.n_bins, config.dim), dtype=np.complex128)
        filters[:, :, 0] = 1.0
        return cls(filters)


def process_frame(state: AecState, mic_frame, ref_frames) -> np.ndarray:
    """Advance the stream by one STFT frame.

    Args:
        state: stream state, updated in place.
        mic_frame: ``(n_bins,)`` microphone spectrum ``Y[:, j]``.
        ref_frames: ``(order, n_bins)`` expanded-reference spectra ``X_p[:, j]``.

    Returns:
        ``(n_bins,)`` near-end estimate computed with the updated filters.
    """
    cfg = state.config
    mic_frame = np.asarray(mic_frame, dtype=np.complex128)
    ref_frames = np.asarray(ref_frames, dtype=np.complex128)
    if mic_frame.shape != (cfg.n_bins,) or ref_frames.shape != (cfg.order, cfg.n_bins):
        raise StructuralError(
            f"expected mic ({cfg.n_bins},) and reference ({cfg.order}, {cfg.n_bins}), "
            f"got {mic_frame.shape} and {ref_frames.shape}"
        )
    hist = state.ref_history
    hist[:, :, 1:] = hist[:, :, :-1]
    hist[:, :, 0] = ref_frames
    y_tilde = np.empty((1, cfg.n_bins, cfg.dim), dtype=np.complex128)
    y_tilde[0, :, 0] = mic_frame
    y_tilde[0, :, 1:] = hist.transpose(1, 0, 2).reshape(cfg.n_bins, -1)

    out = np.empty((1, cfg.n_bins), dtype=np.complex128)
    state.held += _kernels.run_frames(
        state.V,
        state.w,
        y_tilde,
        cfg.alpha,
        cfg.beta,
        cfg.r_floor,
        _SOLVER_CODES[cfg.solver],
        cfg.n_sweeps,
        JITTER,
        out,
        np.empty((0, 0, 0), dtype=np.complex128),
    )
    state.frame += 1
    if state.record:
        state.trace.append(state.w.copy())
    return out[0]


def run_spectra(mic_spec: Spectrogram, ref_specs, config=None, record_trace=True):
    """Run the frame loop over precomputed spectra.

    Returns:
        ``(near_end_spectrogram, trace_or_None, state)``.
    """
    config = check_config(config)
    state = AecState.initial(config, record=record_trace)
    ref = np.stack([r.data for r in ref_specs])
    out = np.empty_like(mic_spec.data, dtype=np.complex128)
    for j in range(mic_spec.n_frames):
        out[:, j] = process_frame(state, mic_spec.data[:, j], ref[:, :, j])
    trace = None
    if record_trace:
        filters = (
            np.stack(state.trace)
            if state.trace
            else np.zeros((0, config.n_bins, config.dim), dtype=np.complex128)
        )
        trace = FilterTrace(filters)
        state.trace = []
    spec = Spectrogram(out, mic_spec.frame_len, mic_spec.hop, mic_spec.fft_size,
                       mic_spec.n_samples)
    return spec, trace, state


def run(mic, far_end, config=None, record_trace=True):
    """Cancel the echo of ``far_end`` in ``mic``.

    Inputs of unequal length are zero-padded to the longer one.

    Returns:
        ``(near_end_estimate, trace)``; the estimate has the (padded) input
        length and ``trace`` holds one filter snapshot per frame (``None`` if
        recording is disabled).
    """
    config = check_config(config)
    mic, far_end = check_pair(mic, far_end)
    mic_spec = analyze(mic, config)
    ref_specs = analyze_reference(far_end, config)
    spec, trace, _ = run_spectra(mic_spec, ref_specs, config, record_trace)
    return synthesize(spec, config, n_samples=mic.size), trace


def apply_trace(trace: FilterTrace, signal, far_end, config=None) -> np.ndarray:
    """Apply recorded filters to ``signal`` with the far-end delay lines, no adaptation."""
    config = check_config(config)
    signal = check_signal(signal, "signal")
    far_end = check_signal(far_end, "far_end")
    if signal.size != far_end.size:
        raise StructuralError("signal and far_end lengths differ")
    spec = analyze(signal, config)
    if (trace.n_bins, trace.dim) != (config.n_bins, config.dim):
        raise StructuralError(
            f"trace has {trace.n_bins} bins x {trace.dim} taps, config implies "
            f"{config.n_bins} x {config.dim}"
        )
    if trace.n_frames != spec.n_frames:
        raise StructuralError(
            f"trace has {trace.n_frames} frames, signal has {spec.n_frames}"
        )
    y_tilde = stack_all(spec, analyze_reference(far_end, config), config.ctf_len)
    out = np.empty((spec.n_frames, spec.n_bins), dtype=np.complex128)
    _kernels.apply_filters(np.ascontiguousarray(trace.filters, dtype=np.complex128),
                           y_tilde, out)
    spec.data = out.T
    return synthesize(spec, config, n_samples=signal.size)


def replay_on_echo(trace: FilterTrace, echo_only, far_end, config=None) -> np.ndarray:
    """Residual echo left by the recorded filters when applied to the echo alone."""
    return apply_trace(trace, echo_only, far_end, config)
