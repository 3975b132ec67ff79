import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from sbss_aec import ConfigError, NumericError
from sbss_aec.simulate import (
    ctf_echo,
    hard_clip,
    make_echo,
    make_scenario,
    mix,
    power,
    random_ctf_filters,
    speech_like,
    synth_rir,
)

signals = arrays(np.float64, st.integers(1, 200), elements=st.floats(-10, 10))


def test_hard_clip_examples():
    np.testing.assert_allclose(hard_clip([0.1, -0.5, 1.0], 0.2), [0.1, -0.2, 0.2])
    x = np.array([0.3, -2.0, 1.5])
    np.testing.assert_array_equal(hard_clip(x, 1.0), x)
    assert not np.any(hard_clip(np.zeros(5), 0.2))


def test_hard_clip_peak_on_speech_like():
    x = speech_like(16000, seed=1)
    assert np.max(np.abs(hard_clip(x, 0.2))) == pytest.approx(0.2 * np.max(np.abs(x)), rel=1e-15)


@pytest.mark.parametrize("frac", [0.0, -0.1, 1.5])
def test_hard_clip_rejects_bad_fraction(frac):
    with pytest.raises(ConfigError):
        hard_clip([1.0], frac)


@given(signals, st.floats(0.01, 1.0))
def test_hard_clip_idempotent(x, frac):
    once = hard_clip(x, frac)
    np.testing.assert_array_equal(hard_clip(once, 1.0), once)


@given(signals, st.floats(0.01, 1.0))
def test_hard_clip_monotone(x, frac):
    order = np.argsort(x, kind="stable")
    assert np.all(np.diff(hard_clip(x, frac)[order]) >= 0)


def test_rir_decay_slope():
    rir = synth_rir(300.0, 16000, length=4800, seed=11)
    blocks = (rir ** 2).reshape(48, 100).mean(axis=1)
    t = (np.arange(48) + 0.5) * 100
    slope = np.polyfit(t, 10 * np.log10(blocks), 1)[0]
    assert slope * 4800 == pytest.approx(-60.0, rel=0.05)


def test_rir_deterministic_unit_energy():
    a = synth_rir(300.0, seed=5)
    assert a.size == 4800
    np.testing.assert_array_equal(a, synth_rir(300.0, seed=5))
    assert np.sum(a ** 2) == pytest.approx(1.0, abs=1e-9)
    assert not np.array_equal(a, synth_rir(300.0, seed=6))


def test_rir_bad_parameters():
    with pytest.raises(ConfigError):
        synth_rir(300.0, length=0)
    with pytest.raises(ConfigError):
        synth_rir(-1.0)


def test_mix_equal_power_keeps_near_end(rng):
    echo = rng.standard_normal(1000)
    near, mixture = mix(-echo[::-1].copy(), echo, 0.0)
    np.testing.assert_array_equal(near, -echo[::-1])
    np.testing.assert_array_equal(mixture, echo + near)


def test_mix_power_ratio(rng):
    near, mixture = mix(rng.standard_normal(5000), 3 * rng.standard_normal(5000), 10.0)
    echo = mixture - near
    assert 10 * np.log10(power(near) / power(echo)) == pytest.approx(10.0, abs=1e-9)


def test_mix_zero_near_end_is_error():
    with pytest.raises(NumericError):
        mix(np.zeros(10), np.ones(10), 0.0)


def test_echo_is_direct_convolution(rng):
    far = rng.standard_normal(3000)
    rir = synth_rir(100.0, seed=2)
    expected = np.convolve(hard_clip(far, 0.2), rir)[:3000]
    np.testing.assert_allclose(make_echo(far, rir, lambda x: hard_clip(x, 0.2)), expected,
                               atol=1e-12)


def test_scenario_ground_truth_and_determinism():
    a = make_scenario(duration_s=2.0, seed=3)
    b = make_scenario(duration_s=2.0, seed=3)
    for name in ("far_end", "near_end", "echo", "mixture", "rir"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    np.testing.assert_allclose(a.mixture - a.echo, a.near_end, atol=1e-15)
    assert a.measured_ser_db() == pytest.approx(0.0, abs=1e-9)
    clipped = hard_clip(a.far_end, 0.2)
    np.testing.assert_allclose(a.echo, np.convolve(clipped, a.rir)[:a.far_end.size], atol=1e-12)


def test_clip_one_gives_linear_echo():
    sc = make_scenario(duration_s=1.0, clip=1.0, seed=2)
    np.testing.assert_allclose(sc.echo, np.convolve(sc.far_end, sc.rir)[:16000], atol=1e-12)


def test_single_talk_scenario():
    sc = make_scenario(duration_s=1.0, ser_db=None)
    assert not np.any(sc.near_end)
    np.testing.assert_array_equal(sc.mixture, sc.echo)


def test_ctf_echo_matches_loop_oracle(rng):
    ref = rng.standard_normal((2, 4, 9)) + 1j * rng.standard_normal((2, 4, 9))
    A = random_ctf_filters(2, 4, 3, seed=1)
    np.testing.assert_allclose(ctf_echo(ref, A), oracles.ctf_echo(ref, A), atol=1e-12)


def test_speech_like_peak_and_gaps():
    x = speech_like(32000, seed=0)
    assert np.max(np.abs(x)) == pytest.approx(1.0)
    env = np.abs(x).reshape(-1, 320).max(axis=1)
    assert np.mean(env < 1e-3) > 0.05
