"""ERLE, true ERLE and the IP-versus-EISS runtime benchmark."""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import asdict, dataclass

import numpy as np

from ._validation import check_signal
from .exceptions import StructuralError
from .solvers import _kernels
from .solvers.ip import JITTER

CAP_DB = 80.0
WINDOW_MS = 128.0
BENCH_COLUMNS = ("solver", "P", "L", "frames", "median_us_per_frame", "trials")


def _windowed_ratio_db(num, den, window_ms, fs):
    num = check_signal(num, "reference")
    den = check_signal(den, "residual")
    if num.size != den.size:
        raise StructuralError(f"lengths differ: {num.size} vs {den.size}")
    win = max(1, int(round(window_ms * 1e-3 * fs)))
    n_win = num.size // win
    if n_win == 0:
        return np.zeros(0)
    p_num = np.sum(num[: n_win * win].reshape(n_win, win) ** 2, axis=1)
    p_den = np.sum(den[: n_win * win].reshape(n_win, win) ** 2, axis=1)
    floor = 1e-12 * max(np.sum(num ** 2), np.finfo(float).tiny)
    out = np.full(n_win, CAP_DB)
    ok = p_den >= floor
    with np.errstate(divide="ignore"):
        out[ok] = 10.0 * np.log10(p_num[ok] / p_den[ok])
    return np.minimum(out, CAP_DB)


def erle(mic, output, window_ms: float = WINDOW_MS, fs: int = 16000) -> np.ndarray:
    """Per-window ``10 log10(sum y^2 / sum e^2)`` over non-overlapping windows.

    Meaningful during far-end single talk only. Windows whose residual power is
    below ``1e-12`` of the total input power read +80 dB.
    """
    return _windowed_ratio_db(mic, output, window_ms, fs)


def terle(echo, residual_echo, window_ms: float = WINDOW_MS, fs: int = 16000) -> np.ndarray:
    """True ERLE: echo power over the power of the echo passed through the filters."""
    return _windowed_ratio_db(echo, residual_echo, window_ms, fs)


def steady_state(series, frac: float = 0.25) -> float:
    """Mean of the final ``frac`` of a dB series."""
    series = np.asarray(series)
    if series.size == 0:
        return float("nan")
    start = int(np.floor(series.size * (1.0 - frac)))
    return float(np.mean(series[min(start, series.size - 1):]))


@dataclass
class BenchRow:
    solver: str
    P: int
    L: int
    frames: int
    median_us_per_frame: float
    trials: int

    @property
    def dim(self) -> int:
        return self.P * self.L + 1


def _time_solver(solver, order, ctf_len, frames, trials, n_bins, seed):
    dim = order * ctf_len + 1
    rng = np.random.default_rng(seed)
    shape = (frames, n_bins, dim)
    Yt = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    code = {"ip": _kernels.IP, "eiss": _kernels.EISS, "ip_solve": _kernels.IP_SOLVE}[solver]
    out = np.empty((frames, n_bins), dtype=np.complex128)
    no_trace = np.empty((0, 0, 0), dtype=np.complex128)
    timings = []
    for _ in range(trials):
        V = np.tile(1e-3 * np.eye(dim, dtype=np.complex128), (n_bins, 1, 1))
        w = np.zeros((n_bins, dim), dtype=np.complex128)
        w[:, 0] = 1.0
        t0 = time.perf_counter()
        _kernels.run_frames(V, w, Yt, 0.992, 0.4, 1e-6, code, 1, JITTER, out, no_trace)
        timings.append(time.perf_counter() - t0)
    return statistics.median(timings) / (frames * n_bins) * 1e6


def warm_up():
    """Compile the kernels so the first timed run excludes JIT time."""
    for solver in ("ip", "eiss"):
        _time_solver(solver, 1, 1, 2, 1, 1, 0)


def bench(P_values=(3, 4), L_values=range(2, 13), frames: int = 2000, trials: int = 5,
          n_bins: int = 8, seed: int = 0) -> list[BenchRow]:
    """Median wall-clock cost per frame and bin for every (solver, P, L).

    Each timed run covers the auxiliary norm, weighted-covariance update,
    solver update and output for ``n_bins`` bins over ``frames`` random frames,
    on a single thread. ``median_us_per_frame`` is the median over ``trials``
    runs divided by ``frames * n_bins``.
    """
    warm_up()
    rows = []
    for order in P_values:
        for ctf_len in L_values:
            for solver in ("ip", "eiss"):
                us = _time_solver(solver, order, ctf_len, frames, trials, n_bins, seed)
                rows.append(BenchRow(solver, order, ctf_len, frames, us, trials))
    return rows


def fit_slopes(rows) -> dict[str, float]:
    """Least-squares slope of log(cost) against log(P*L + 1), per solver."""
    slopes = {}
    for solver in sorted({r.solver for r in rows}):
        sel = [r for r in rows if r.solver == solver]
        if len({r.dim for r in sel}) < 2:
            slopes[solver] = float("nan")
            continue
        x = np.log([r.dim for r in sel])
        y = np.log([r.median_us_per_frame for r in sel])
        slopes[solver] = float(np.polyfit(x, y, 1)[0])
    return slopes


def verdict(rows, ip_range=(2.5, 3.5), eiss_range=(1.5, 2.5), min_dim=7) -> dict:
    slopes = fit_slopes(rows)
    by_key = {(r.solver, r.P, r.L): r for r in rows}
    faster = []
    for (solver, p, l), r in by_key.items():
        if solver != "eiss" or r.dim < min_dim or ("ip", p, l) not in by_key:
            continue
        faster.append(r.median_us_per_frame < by_key[("ip", p, l)].median_us_per_frame)
    trials = min((r.trials for r in rows), default=0)
    ip_ok = ip_range[0] <= slopes.get("ip", np.nan) <= ip_range[1]
    eiss_ok = eiss_range[0] <= slopes.get("eiss", np.nan) <= eiss_range[1]
    return {
        "ip_slope": slopes.get("ip"),
        "eiss_slope": slopes.get("eiss"),
        "ip_slope_ok": bool(ip_ok),
        "eiss_slope_ok": bool(eiss_ok),
        "eiss_faster_everywhere": bool(faster) and all(faster),
        "low_confidence": trials < 3,
        "pass": bool(ip_ok and eiss_ok and faster and all(faster)),
    }


def write_bench_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        for r in rows:
            row = asdict(r)
            row["median_us_per_frame"] = f"{r.median_us_per_frame:.4f}"
            writer.writerow(row)


def read_bench_csv(path) -> list[BenchRow]:
    with open(path, newline="") as fh:
        return [
            BenchRow(
                solver=d["solver"],
                P=int(d["P"]),
                L=int(d["L"]),
                frames=int(d["frames"]),
                median_us_per_frame=float(d["median_us_per_frame"]),
                trials=int(d["trials"]),
            )
            for d in csv.DictReader(fh)
        ]
