"""scikit-learn style front end for the echo canceller."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import pipeline
from ._validation import check_pair
from .config import AecConfig
from .expansion import analyze_reference
from .spectral import analyze, synthesize


class EchoCanceller(TransformerMixin, BaseEstimator):
    """Semi-blind nonlinear echo canceller in the CTF STFT domain.

    ``fit(mic, far_end)`` runs the online adaptation over the whole recording
    and stores the per-frame extraction filters. ``transform(signal, far_end)``
    applies those stored filters, frame by frame and without adapting, to any
    signal of the same length. On the microphone signal this reproduces the
    adaptive output. On the isolated echo it gives the residual echo used for
    true ERLE.

    Parameters
    ----------
    solver : {"eiss", "ip"}
        Per-bin filter update. ``"eiss"`` is the inverse-free element-wise
        source steering update, ``"ip"`` the iterative projection baseline.
    order : int
        Odd-power expansion order of the far-end reference.
    ctf_len : int
        CTF taps per expansion channel.
    alpha, beta : float
        Forgetting factor and generalized-Gaussian shape parameter.
    frame_len, hop : int
        STFT framing (Hann window, ``fft_size == frame_len``).
    r_floor, v_init_scale : float
        Numerical floor of the auxiliary norm and initial covariance scale.
    n_sweeps : int
        EISS sweeps per frame.
    fs : int
        Sample rate in Hz.

    Attributes
    ----------
    config_ : AecConfig
    trace_ : FilterTrace
        Filters after every frame, shape ``(n_frames, n_bins, order*ctf_len+1)``.
    covariance_ : ndarray
        Final weighted covariance per bin.
    n_frames_ : int
    n_held_ : int
        Number of (bin, frame) updates that kept the previous filter.
    """

    def __init__(self, solver="eiss", order=3, ctf_len=5, alpha=0.992, beta=0.4,
                 frame_len=1024, hop=256, r_floor=1e-6, v_init_scale=1e-3,
                 n_sweeps=1, fs=16000):
        self.solver = solver
        self.order = order
        self.ctf_len = ctf_len
        self.alpha = alpha
        self.beta = beta
        self.frame_len = frame_len
        self.hop = hop
        self.r_floor = r_floor
        self.v_init_scale = v_init_scale
        self.n_sweeps = n_sweeps
        self.fs = fs

    def _make_config(self) -> AecConfig:
        return AecConfig(**self.get_params())

    def _adapt(self, mic, far_end):
        self.config_ = self._make_config()
        mic, far_end = check_pair(mic, far_end)
        mic_spec = analyze(mic, self.config_)
        ref_specs = analyze_reference(far_end, self.config_)
        spec, trace, state = pipeline.run_spectra(mic_spec, ref_specs, self.config_)
        self.trace_ = trace
        self.covariance_ = state.V
        self.filters_ = state.w
        self.n_frames_ = spec.n_frames
        self.n_held_ = state.held
        self.n_samples_ = mic.size
        return spec, mic.size

    def fit(self, mic, far_end):
        self._adapt(mic, far_end)
        return self

    def fit_transform(self, mic, far_end):
        """Adapt on ``(mic, far_end)`` and return the near-end estimate."""
        spec, n = self._adapt(mic, far_end)
        return synthesize(spec, self.config_, n_samples=n)

    def transform(self, signal, far_end):
        """Apply the fitted filter trace to ``signal`` without adaptation."""
        check_is_fitted(self, "trace_")
        signal, far_end = check_pair(signal, far_end)
        return pipeline.apply_trace(self.trace_, signal, far_end, self.config_)

    def residual_echo(self, echo, far_end):
        """Echo left after the fitted filters (alias of :meth:`transform`)."""
        return self.transform(echo, far_end)

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = True
        return tags


def cancel_echo(mic, far_end, **params) -> np.ndarray:
    """One-shot convenience wrapper: ``EchoCanceller(**params).fit_transform``."""
    return EchoCanceller(**params).fit_transform(mic, far_end)
