"""Command-line entry point: ``process``, ``simulate``, ``evaluate``, ``bench``.

Exit codes: 0 success, 1 usage/configuration error, 2 data or format error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import io, metrics, pipeline, simulate
from .config import load_toml, resolve_config
from .exceptions import (
    ConfigError,
    NumericError,
    StructuralError,
    WavFormatError,
)

log = logging.getLogger("sbss_aec")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

SCENARIO_DEFAULTS = dict(duration_s=10.0, fs=16000, t60_ms=300.0, ser_db=0.0,
                         clip=0.2, seed=42, far_peak=0.9, rir_length=None)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_int_list(text: str) -> list[int]:
    """``"3,4"`` -> [3, 4]; ``"2..5"`` -> [2, 3, 4, 5]; mixed forms allowed."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list: {text!r}")
    return out


def _add_aec_options(p):
    g = p.add_argument_group("algorithm (override --config)")
    g.add_argument("--config", type=Path, help="TOML file with AecConfig keys")
    g.add_argument("--solver", choices=["eiss", "ip"])
    g.add_argument("--order", "--P", dest="order", type=int, help="expansion order P")
    g.add_argument("--ctf-len", "--L", dest="ctf_len", type=int, help="CTF length L")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--frame-len", type=int)
    g.add_argument("--hop", type=int)
    g.add_argument("--n-sweeps", type=int)


def _require(path: Path | None) -> None:
    if path is not None and not path.exists():
        raise UsageError(f"no such file: {path}")


def _config_from(args):
    _require(args.config)
    return resolve_config(
        args.config,
        solver=args.solver,
        order=args.order,
        ctf_len=args.ctf_len,
        alpha=args.alpha,
        beta=args.beta,
        frame_len=args.frame_len,
        hop=args.hop,
        n_sweeps=args.n_sweeps,
    )


def _load(path: Path, fs: int) -> np.ndarray:
    _require(path)
    rate, x = io.read_wav(path)
    if rate != fs:
        raise WavFormatError(f"{path}: sample rate {rate} Hz, expected {fs} Hz")
    return x


def cmd_process(args) -> int:
    config = _config_from(args)
    mic = _load(args.mic, config.fs)
    far = _load(args.farend, config.fs)
    if mic.size != far.size:
        log.warning("input lengths differ (%d vs %d); zero-padding", mic.size, far.size)
    t0 = time.perf_counter()
    out, trace = pipeline.run(mic, far, config, record_trace=args.trace is not None)
    wall = time.perf_counter() - t0
    io.write_wav(args.output, config.fs, out[: mic.size])
    if args.trace is not None:
        io.write_trace(args.trace, trace)
    summary = {
        "frames": -(-max(mic.size, far.size) // config.hop),
        "bins": config.n_bins,
        "solver": config.solver,
        "order": config.order,
        "ctf_len": config.ctf_len,
        "samples": int(mic.size),
        "fs": config.fs,
        "wall_time_s": round(wall, 4),
    }
    print(json.dumps(summary))
    return EXIT_OK


def _scenario_params(args) -> dict:
    params = dict(SCENARIO_DEFAULTS)
    _require(args.config)
    if args.config is not None:
        table = load_toml(args.config)
        table = dict(table.get("scenario", table))
        unknown = set(table) - set(params)
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        params.update(table)
    for key in params:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if args.single_talk:
        params["ser_db"] = None
    if not 0.0 < params["clip"] <= 1.0:
        raise ConfigError(f"clip must lie in (0, 1], got {params['clip']}")
    if not params["t60_ms"] > 0 or not params["duration_s"] > 0:
        raise ConfigError("t60_ms and duration_s must be positive")
    return params


def cmd_simulate(args) -> int:
    params = _scenario_params(args)
    sc = simulate.make_scenario(**params)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"farend.wav": sc.far_end, "near.wav": sc.near_end,
             "echo.wav": sc.echo, "mixture.wav": sc.mixture}
    for name, signal in files.items():
        io.write_wav(out / name, sc.fs, signal)
    manifest = {
        "params": params,
        "files": sorted(files),
        "rir_length": int(sc.rir.size),
        "clip_level": float(sc.clip_threshold),
        "measured_ser_db": None if params["ser_db"] is None else round(sc.measured_ser_db(), 6),
        "echo_power": simulate.power(sc.echo),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(json.dumps({"out_dir": str(out), **manifest}, sort_keys=True))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _config_from(args)
    mixture = _load(args.mixture, config.fs)
    echo = _load(args.echo, config.fs)
    far = _load(args.farend, config.fs)
    _require(args.trace)
    if not mixture.size == echo.size == far.size:
        raise StructuralError("mixture, echo and far-end lengths differ")
    trace = io.read_trace(args.trace)
    output = pipeline.apply_trace(trace, mixture, far, config)
    residual = pipeline.replay_on_echo(trace, echo, far, config)
    erle = metrics.erle(mixture, output, args.window_ms, config.fs)
    terle = metrics.terle(echo, residual, args.window_ms, config.fs)
    summary = {
        "windows": int(terle.size),
        "window_ms": args.window_ms,
        "erle_steady_db": metrics.steady_state(erle),
        "terle_steady_db": metrics.steady_state(terle),
        "terle_mean_db": float(np.mean(terle)) if terle.size else math.nan,
    }
    if args.out_dir is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        win_s = args.window_ms * 1e-3
        with open(out / "series.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["window", "t_start_s", "erle_db", "terle_db"])
            for k, (e, t) in enumerate(zip(erle, terle)):
                writer.writerow([k, f"{k * win_s:.4f}", f"{e:.4f}", f"{t:.4f}"])
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.frames < 1 or args.trials < 1 or args.bins < 1:
        raise ConfigError("frames, trials and bins must be positive")
    rows = metrics.bench(args.P, args.L, frames=args.frames, trials=args.trials,
                         n_bins=args.bins)
    metrics.write_bench_csv(rows, args.output)
    verdict = metrics.verdict(rows)
    if args.frames < 1000:
        verdict["low_confidence"] = True
    if args.verdict is not None:
        Path(args.verdict).write_text(json.dumps(verdict, indent=2) + "\n")
    print(json.dumps(verdict))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbss-aec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("process", help="cancel echo in a microphone recording")
    p.add_argument("mic", type=Path)
    p.add_argument("farend", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--trace", type=Path, help="write the per-frame filter trace here")
    _add_aec_options(p)
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("simulate", help="write a synthetic echo scenario")
    p.add_argument("out_dir", type=Path)
    p.add_argument("--config", type=Path, help="scenario TOML ([scenario] table)")
    p.add_argument("--duration", dest="duration_s", type=float)
    p.add_argument("--t60-ms", type=float)
    p.add_argument("--ser-db", type=float)
    p.add_argument("--clip", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--fs", type=int)
    p.add_argument("--far-peak", type=float)
    p.add_argument("--rir-length", type=int)
    p.add_argument("--single-talk", action="store_true", help="no near-end talker")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="ERLE/tERLE from a recorded filter trace")
    p.add_argument("mixture", type=Path)
    p.add_argument("echo", type=Path)
    p.add_argument("farend", type=Path)
    p.add_argument("trace", type=Path)
    p.add_argument("--out-dir", type=Path)
    p.add_argument("--window-ms", type=float, default=metrics.WINDOW_MS)
    _add_aec_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="IP vs EISS per-frame runtime")
    p.add_argument("-o", "--output", type=Path, required=True, help="CSV path")
    p.add_argument("--P", type=parse_int_list, default=[3, 4])
    p.add_argument("--L", type=parse_int_list, default=list(range(2, 13)))
    p.add_argument("--frames", type=int, default=2000)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--bins", type=int, default=8, help="bins per timed frame")
    p.add_argument("--verdict", type=Path, help="also write the JSON verdict here")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"sbss-aec {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WavFormatError, StructuralError, OSError) as exc:
        print(f"sbss-aec {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"sbss-aec {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
