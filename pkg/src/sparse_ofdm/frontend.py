"""Cyclic-prefix removal and per-symbol B-point DFT."""

from __future__ import annotations

import numpy as np

from .config import SystemConfig


def extract_symbol(frame, c: int, cfg: SystemConfig) -> np.ndarray:
    """y^c_i = x_{i + c(B+M) + M}, i = 0..B-1."""
    samples = getattr(frame, "samples", frame)
    if not 0 <= c < cfg.n_symbols:
        raise IndexError(f"symbol {c} outside [0, {cfg.n_symbols})")
    start = c * cfg.symbol_length + cfg.m_max_delay
    return np.asarray(samples[start : start + cfg.b_bins])


def naive_dft(y: np.ndarray) -> np.ndarray:
    """O(B^2) reference: Y_b = (1/B) sum_i exp(-2 pi j b i / B) y_i (columns for 2-D input)."""
    y = np.asarray(y, dtype=complex)
    n = y.shape[0]
    idx = np.arange(n)
    # integer product reduced mod n keeps the twiddle angles exact for large n
    w = np.exp(-2j * np.pi * (np.outer(idx, idx) % n) / n)
    return w @ y / n


def dft_bins(symbol: np.ndarray) -> np.ndarray:
    """Normalised forward DFT, (1/B) scaling; pocketfft handles any length."""
    return np.fft.fft(symbol, axis=0) / len(symbol)


class BinObservation:
    """B x C matrix of DFT values, row b holding (Y_bar | Y_tilde | Y_dot) of bin b."""

    def __init__(self, values: np.ndarray, cfg: SystemConfig):
        if values.shape != (cfg.b_bins, cfg.n_symbols):
            raise ValueError(f"expected shape {(cfg.b_bins, cfg.n_symbols)}, got {values.shape}")
        self.values = values
        self.cfg = cfg

    def row(self, b: int) -> np.ndarray:
        return self.values[b]

    def segments(self, b: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ref, idx, ver = self.cfg.segments
        r = self.values[b]
        return r[ref], r[idx], r[ver]

    def copy(self) -> "BinObservation":
        return BinObservation(self.values.copy(), self.cfg)


def build_observation(frame, cfg: SystemConfig) -> BinObservation:
    samples = np.asarray(getattr(frame, "samples", frame))
    if len(samples) < cfg.sync_offset:
        raise ValueError("frame shorter than the identification subframe")
    ident = samples[: cfg.sync_offset].reshape(cfg.n_symbols, cfg.symbol_length)
    kept = ident[:, cfg.m_max_delay :]  # C x B
    return BinObservation(dft_bins(kept.T), cfg)
