"""Semi-blind nonlinear acoustic echo cancellation in the CTF STFT domain."""

from .config import AecConfig, load_toml, resolve_config
from .estimator import EchoCanceller, cancel_echo
from .exceptions import (
    AecError,
    ConfigError,
    DegenerateFilterError,
    NumericError,
    SolverError,
    StructuralError,
    WavFormatError,
)
from .pipeline import AecState, FilterTrace, apply_trace, process_frame, run, run_spectra

__version__ = "0.1.0"

__all__ = [
    "AecConfig",
    "AecError",
    "AecState",
    "ConfigError",
    "DegenerateFilterError",
    "EchoCanceller",
    "FilterTrace",
    "NumericError",
    "SolverError",
    "StructuralError",
    "WavFormatError",
    "apply_trace",
    "cancel_echo",
    "load_toml",
    "process_frame",
    "resolve_config",
    "run",
    "run_spectra",
]
