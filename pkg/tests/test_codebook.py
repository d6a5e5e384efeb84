from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from conftest import small_cfg
from sparse_ofdm.codebook import Codebook, dump_signatures, signature, synthesize_waveform, tone_sum
from sparse_ofdm.codec import codec_for
from sparse_ofdm.config import reference_config
from sparse_ofdm.frontend import dft_bins

GOLDEN = Path(__file__).parent / "golden" / "signatures.txt"


def golden_codebook():
    cfg = reference_config(20, 5, master_seed=7)
    return Codebook(cfg)


def test_signature_is_deterministic():
    cfg = reference_config(100, 20)
    codec = codec_for(cfg)
    a, b = signature(cfg, codec, 123456789), signature(cfg, codec, 123456789)
    assert a == b
    assert signature(cfg, codec, 123456790) != a


def test_signature_structure():
    cfg = reference_config(100, 20)
    cb = Codebook(cfg)
    sig = cb.signature(2**38 - 1)
    assert len(sig.bins) == len(set(sig.bins)) == 3
    assert all(0 <= b < 450 for b in sig.bins)
    g = sig.design_vector
    assert g.shape == (55,) and set(np.unique(g)) <= {-1.0, 1.0}
    assert (g[:6] == 1).all()
    assert np.array_equal(g[6:49], 1 - 2.0 * cb.codec.encode(2**38 - 1))
    assert sig.sync_pilot.shape == (450 * 8,)
    with pytest.raises(ValueError):
        cb.signature(2**38)


def test_full_bin_set_when_t_equals_b():
    cfg = small_cfg(k=1, b_bins=5, t_degree=5)
    assert Codebook(cfg).bins(17) == (0, 1, 2, 3, 4)


def test_bin_membership_is_uniform():
    cfg = reference_config(100)
    cb = Codebook(cfg)
    counts = np.zeros(450)
    for k in range(10_000):
        counts[list(cb.bins(k))] += 1
    n, p = 10_000, 3 / 450
    sigma = np.sqrt(n * p * (1 - p))
    inside = np.abs(counts - n * p) <= 3 * sigma
    # 450 simultaneous 3-sigma checks: about 1.2 bins are expected outside by chance
    assert inside.mean() >= 0.99
    assert stats.chisquare(counts).pvalue > 1e-3


def test_pilot_statistics():
    pilot = Codebook(reference_config(100)).pilot(5)
    n = pilot.size
    assert abs(np.mean(np.abs(pilot) ** 2) - 1) < 3 / np.sqrt(n)
    assert abs(pilot.mean()) < 3 / np.sqrt(n)


def test_dc_tone_symbols_are_constant_one():
    cfg = small_cfg(k=1, b_bins=8, t_degree=1, c0=2, c1=12, c2=2, c3=1)
    wave = synthesize_waveform(cfg, Codebook(cfg, bins_override={0: (0,)}).signature(0))
    # device 0 under the identity codec has an all-zero index: g == 1 except the spread part
    assert np.allclose(wave[: 8 * 14], 1.0)


def test_tone_periodicity():
    cfg = small_cfg(k=1, b_bins=16, m_max_delay=5, t_degree=1)
    s = tone_sum(cfg, [3])
    assert np.allclose(s[:5], s[16:21], atol=1e-12)


@pytest.mark.parametrize("b,m,t", [(16, 0, 3), (45, 0, 5), (16, 4, 3), (12, 7, 2)])
def test_symbol_energy(b, m, t):
    cfg = small_cfg(k=1, b_bins=b, m_max_delay=m, t_degree=t)
    bins = Codebook(cfg).bins(9)
    energy = np.sum(np.abs(tone_sum(cfg, bins)) ** 2)
    # closed form: T(B+M) plus the cross terms that the cyclic extension leaves behind
    cross = sum(
        np.exp(2j * np.pi * (b1 - b2) * i / b)
        for b1 in bins
        for b2 in bins
        if b1 != b2
        for i in range(b, b + m)
    )
    expected = t * (b + m) + np.real(cross)
    assert energy == pytest.approx(expected, rel=1e-9)
    if m == 0:
        assert energy == pytest.approx(t * b, rel=1e-9)


def test_waveform_layout_and_dft(rng):
    for _ in range(20):
        b = int(rng.integers(6, 40))
        cfg = small_cfg(k=1, b_bins=b, t_degree=int(rng.integers(1, 4)))
        cb = Codebook(cfg)
        dev = int(rng.integers(0, cfg.n_population))
        wave = cb.waveform(dev)
        assert wave.size == cfg.code_length
        assert np.array_equal(wave[cfg.sync_offset :], cb.pilot(dev))
        g = cb.design_vector(dev)
        sym = wave[: cfg.sync_offset].reshape(cfg.n_symbols, b)
        spectrum = dft_bins(sym.T)  # B x C
        mask = np.zeros(b, bool)
        mask[list(cb.bins(dev))] = True
        assert np.allclose(spectrum[mask], np.broadcast_to(g, (mask.sum(), g.size)), atol=1e-9)
        assert np.abs(spectrum[~mask]).max(initial=0) <= 1e-9


def test_signature_dump_golden():
    text = dump_signatures(golden_codebook(), [0, 1, 99, 2**38 - 1])
    assert text == GOLDEN.read_text()
