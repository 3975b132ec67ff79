import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sbss_aec import cli
from sbss_aec.io import read_wav, write_trace, write_wav
from sbss_aec.pipeline import FilterTrace
from sbss_aec.config import AecConfig


def _run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def scenario_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("scenario")
    assert cli.main(["simulate", str(out), "--duration", "3"]) == 0
    return out


def test_parse_int_list():
    assert cli.parse_int_list("3,4") == [3, 4]
    assert cli.parse_int_list("2..5") == [2, 3, 4, 5]
    assert cli.parse_int_list("1,3..4") == [1, 3, 4]


def test_simulate_writes_files_and_manifest(scenario_dir):
    names = sorted(p.name for p in scenario_dir.iterdir())
    assert names == ["echo.wav", "farend.wav", "manifest.json", "mixture.wav", "near.wav"]
    manifest = json.loads((scenario_dir / "manifest.json").read_text())
    assert manifest["params"]["seed"] == 42
    assert manifest["params"]["t60_ms"] == 300.0
    assert manifest["params"]["clip"] == 0.2
    assert abs(manifest["measured_ser_db"]) < 1e-6


def test_simulate_ser_in_manifest(tmp_path, capsys):
    code, _, _ = _run(capsys, "simulate", tmp_path, "--duration", "2", "--ser-db", "10")
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert abs(manifest["measured_ser_db"] - 10.0) <= 0.01


def test_simulate_toml_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "scenario.toml"
    cfg.write_text("[scenario]\nduration_s = 1.0\nseed = 7\nclip = 0.5\n")
    code, _, _ = _run(capsys, "simulate", tmp_path / "o", "--config", cfg, "--seed", "9")
    assert code == 0
    params = json.loads((tmp_path / "o" / "manifest.json").read_text())["params"]
    assert params["duration_s"] == 1.0 and params["clip"] == 0.5 and params["seed"] == 9


@pytest.mark.parametrize("argv", [["--clip", "0"], ["--clip", "1.5"], ["--t60-ms", "-3"]])
def test_simulate_bad_parameters(tmp_path, capsys, argv):
    code, _, err = _run(capsys, "simulate", tmp_path, *argv)
    assert code == 1 and err


def test_process_silence(tmp_path, capsys):
    write_wav(tmp_path / "mic.wav", 16000, np.zeros(4000))
    write_wav(tmp_path / "far.wav", 16000, np.zeros(4000))
    code, out, _ = _run(capsys, "process", tmp_path / "mic.wav", tmp_path / "far.wav",
                        "-o", tmp_path / "out.wav", "--trace", tmp_path / "t.bin")
    assert code == 0
    summary = json.loads(out)
    assert summary["frames"] == 16 and summary["bins"] == 513 and summary["solver"] == "eiss"
    assert "wall_time_s" in summary
    rate, y = read_wav(tmp_path / "out.wav")
    assert rate == 16000 and y.size == 4000 and not np.any(y)


def test_process_rejects_wrong_rate(tmp_path, capsys):
    write_wav(tmp_path / "mic.wav", 44100, np.zeros(100))
    write_wav(tmp_path / "far.wav", 16000, np.zeros(100))
    code, _, err = _run(capsys, "process", tmp_path / "mic.wav", tmp_path / "far.wav",
                        "-o", tmp_path / "o.wav")
    assert code == 2
    assert "mic.wav" in err and "44100" in err


def test_process_malformed_wav(tmp_path, capsys):
    (tmp_path / "mic.wav").write_bytes(b"RIFF\x00\x00")
    write_wav(tmp_path / "far.wav", 16000, np.zeros(100))
    code, _, err = _run(capsys, "process", tmp_path / "mic.wav", tmp_path / "far.wav",
                        "-o", tmp_path / "o.wav")
    assert code == 2 and "byte offset" in err


def test_usage_errors(tmp_path, capsys):
    assert _run(capsys, "process")[0] == 1
    assert _run(capsys, "frobnicate")[0] == 1
    code, _, err = _run(capsys, "process", tmp_path / "nope.wav", tmp_path / "nope2.wav",
                        "-o", tmp_path / "o.wav")
    assert code == 1 and "nope.wav" in err


def test_process_flag_overrides_config(tmp_path, capsys):
    write_wav(tmp_path / "mic.wav", 16000, np.zeros(2048))
    write_wav(tmp_path / "far.wav", 16000, np.zeros(2048))
    cfg = tmp_path / "aec.toml"
    cfg.write_text("solver = 'ip'\nframe_len = 512\nhop = 128\n")
    code, out, _ = _run(capsys, "process", tmp_path / "mic.wav", tmp_path / "far.wav",
                        "-o", tmp_path / "o.wav", "--config", cfg, "--solver", "eiss")
    assert code == 0
    summary = json.loads(out)
    assert summary["solver"] == "eiss" and summary["bins"] == 257 and summary["frames"] == 16
    cfg.write_text("alpha = 3\n")
    assert _run(capsys, "process", tmp_path / "mic.wav", tmp_path / "far.wav",
                "-o", tmp_path / "o.wav", "--config", cfg)[0] == 1


def test_evaluate_identity_trace(scenario_dir, tmp_path, capsys):
    n = read_wav(scenario_dir / "mixture.wav")[1].size
    write_trace(tmp_path / "id.bin", FilterTrace.identity(-(-n // 256), AecConfig()))
    code, out, _ = _run(capsys, "evaluate", scenario_dir / "mixture.wav",
                        scenario_dir / "echo.wav", scenario_dir / "farend.wav",
                        tmp_path / "id.bin", "--out-dir", tmp_path / "ev")
    assert code == 0
    summary = json.loads(out)
    assert abs(summary["terle_steady_db"]) < 1e-3
    rows = list(csv.DictReader(open(tmp_path / "ev" / "series.csv")))
    assert len(rows) == summary["windows"] and set(rows[0]) >= {"erle_db", "terle_db"}
    assert json.loads((tmp_path / "ev" / "summary.json").read_text()) == summary


def test_evaluate_missing_echo_is_usage_error(scenario_dir, tmp_path, capsys):
    code, _, err = _run(capsys, "evaluate", scenario_dir / "mixture.wav",
                        tmp_path / "echo.wav", scenario_dir / "farend.wav", tmp_path / "t.bin")
    assert code == 1 and "echo.wav" in err


def test_evaluate_trace_config_mismatch(scenario_dir, tmp_path, capsys):
    n = read_wav(scenario_dir / "mixture.wav")[1].size
    write_trace(tmp_path / "id.bin", FilterTrace.identity(-(-n // 256), AecConfig()))
    code, _, err = _run(capsys, "evaluate", scenario_dir / "mixture.wav",
                        scenario_dir / "echo.wav", scenario_dir / "farend.wav",
                        tmp_path / "id.bin", "--L", "4")
    assert code == 2 and "trace" in err


def test_process_then_evaluate_end_to_end(scenario_dir, tmp_path, capsys):
    code, _, _ = _run(capsys, "process", scenario_dir / "mixture.wav",
                      scenario_dir / "farend.wav", "-o", tmp_path / "est.wav",
                      "--trace", tmp_path / "t.bin")
    assert code == 0
    code, out, _ = _run(capsys, "evaluate", scenario_dir / "mixture.wav",
                        scenario_dir / "echo.wav", scenario_dir / "farend.wav",
                        tmp_path / "t.bin")
    assert code == 0
    assert json.loads(out)["terle_steady_db"] > 5.0


def test_bench_small_grid(tmp_path, capsys):
    code, out, _ = _run(capsys, "bench", "-o", tmp_path / "b.csv", "--P", "1,2",
                        "--L", "1..3", "--frames", "50", "--trials", "1",
                        "--verdict", tmp_path / "v.json")
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "b.csv")))
    assert len(rows) == 2 * 2 * 3
    verdict = json.loads(out)
    assert verdict["low_confidence"] is True
    assert {"ip_slope", "eiss_slope", "pass"} <= set(verdict)
    assert json.loads((tmp_path / "v.json").read_text()) == verdict


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sbss_aec", "bench"], capture_output=True,
                          text=True)
    assert proc.returncode == 1 and "--output" in proc.stderr
