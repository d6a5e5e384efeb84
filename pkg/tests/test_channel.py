import numpy as np
import pytest
from scipy import stats

from conftest import small_cfg
from sparse_ofdm.channel import (
    ActiveScenario,
    draw_scenario,
    noiseless_frame,
    read_frame,
    transmit,
    write_frame,
)
from sparse_ofdm.codebook import Codebook
from sparse_ofdm.config import reference_config


def test_draw_scenario_ranges():
    cfg = reference_config(100, 0, gain_min=0.5, gain_max=2.0)
    sc = draw_scenario(cfg, 3)
    assert len(set(sc.devices)) == 100
    assert all(0 <= k < 2**38 for k in sc.devices)
    assert set(sc.delays) == {0}
    assert all(0.5 <= abs(a) <= 2.0 for a in sc.gains)
    assert draw_scenario(cfg, 3) == sc
    assert draw_scenario(cfg, 4) != sc


def test_unit_gains():
    sc = draw_scenario(reference_config(50, 20), 1)
    assert np.allclose(np.abs(sc.gains), 1.0)


def test_small_population_without_replacement():
    cfg = small_cfg(k=10, n_population=10, c1=4)
    assert sorted(draw_scenario(cfg, 0).devices) == list(range(10))


def test_delay_histogram_uniform():
    cfg = reference_config(10, 20)
    delays = np.concatenate([draw_scenario(cfg, s).delays for s in range(1000)])
    counts = np.bincount(delays, minlength=21)
    assert counts.size == 21
    assert stats.chisquare(counts).pvalue > 1e-3
    sigma = np.sqrt(delays.size / 21 * (1 - 1 / 21))
    assert np.all(np.abs(counts - delays.size / 21) <= 3.5 * sigma)


def test_identity_channel():
    cfg = small_cfg(k=1, m=3)
    cb = Codebook(cfg)
    frame = transmit(cfg, cb, ActiveScenario((5,), (1 + 0j,), (0,)), 0)
    assert len(frame) == cfg.code_length + 3
    assert np.array_equal(frame.samples[: cfg.code_length], cb.waveform(5))
    assert not frame.samples[cfg.code_length :].any()


def test_empty_scenario_is_zero():
    cfg = small_cfg(k=0)
    assert not transmit(cfg, Codebook(cfg), ActiveScenario(), 0).samples.any()


def test_linearity_equal_devices():
    cfg = small_cfg(k=2, m=2)
    cb = Codebook(cfg)
    one = noiseless_frame(cfg, cb, ActiveScenario((3,), (0.3 + 0.4j,), (1,)))
    # two copies of the same signature superpose exactly
    two = noiseless_frame(cfg, cb, ActiveScenario((3,), (0.6 + 0.8j,), (1,)))
    assert np.allclose(two, 2 * one, atol=1e-12)


def test_union_linearity(rng):
    cfg = small_cfg(k=6, m=4, gain_min=0.5, gain_max=1.5)
    cb = Codebook(cfg)
    sc = draw_scenario(cfg, 11)
    a = ActiveScenario(sc.devices[:3], sc.gains[:3], sc.delays[:3])
    b = ActiveScenario(sc.devices[3:], sc.gains[3:], sc.delays[3:])
    total = noiseless_frame(cfg, cb, a.union(b))
    assert np.abs(total - noiseless_frame(cfg, cb, a) - noiseless_frame(cfg, cb, b)).max() <= 1e-12


def test_delay_shift():
    cfg = small_cfg(k=1, m=6)
    cb = Codebook(cfg)
    base = noiseless_frame(cfg, cb, ActiveScenario((7,), (1j,), (0,)))
    for m in range(7):
        shifted = noiseless_frame(cfg, cb, ActiveScenario((7,), (1j,), (m,)))
        assert np.array_equal(shifted[m:], base[: base.size - m])
        assert not shifted[:m].any()


def test_noise_variance():
    cfg = reference_config(1, 20, snr_db=0.0)
    frame = transmit(cfg, Codebook(cfg), ActiveScenario(), 5).samples
    n = frame.size
    v = cfg.noise_variance
    assert abs(np.mean(np.abs(frame) ** 2) - v) <= 3 * v / np.sqrt(n)
    assert abs(np.var(frame.real) - v / 2) <= 3 * (v / 2) * np.sqrt(2 / n)


def test_scenario_validation():
    cfg = small_cfg(k=1, m=2)
    with pytest.raises(ValueError):
        ActiveScenario((1, 1), (1, 1), (0, 0))
    with pytest.raises(ValueError):
        transmit(cfg, Codebook(cfg), ActiveScenario((1,), (1,), (3,)), 0)
    with pytest.raises(ValueError):
        transmit(cfg, Codebook(cfg), ActiveScenario((1,), (2,), (0,)), 0)


def test_frame_dump_round_trip(tmp_path):
    cfg = small_cfg(k=3, m=2, noise=0.1)
    cb = Codebook(cfg)
    frame = transmit(cfg, cb, draw_scenario(cfg, 2), 9)
    path = tmp_path / "frame.bin"
    write_frame(frame, path)
    raw = path.read_bytes()
    assert len(raw) == 16 * len(frame)
    # interleaved little-endian float64 real/imag
    assert np.frombuffer(raw[:8], "<f8")[0] == frame.samples[0].real
    assert np.frombuffer(raw[8:16], "<f8")[0] == frame.samples[0].imag
    assert np.array_equal(read_frame(path).samples, frame.samples)
