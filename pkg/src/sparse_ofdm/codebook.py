"""Per-device signatures and transmit waveforms.

A signature is a pure function of ``(master_seed, device)``: the receiver
regenerates any candidate's bins, design vector and pilot on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import IndexCodec, codec_for
from .config import SystemConfig
from .seeding import ROLE_BINS, ROLE_PILOT, ROLE_SPREAD, derive_rng


@dataclass(frozen=True, eq=False)
class DeviceSignature:
    device: int
    bins: tuple[int, ...]
    design_vector: np.ndarray  # +-1, length C0 + C1 + C2
    sync_pilot: np.ndarray  # complex, length B * C3

    def __eq__(self, other):
        if not isinstance(other, DeviceSignature):
            return NotImplemented
        return (
            self.device == other.device
            and self.bins == other.bins
            and np.array_equal(self.design_vector, other.design_vector)
            and np.array_equal(self.sync_pilot, other.sync_pilot)
        )


class Codebook:
    """Lazily evaluated, memoised map from device index to signature.

    ``bins_override`` pins the bin sets of chosen devices, which is how the
    hand-drawn example graphs are reproduced in tests.
    """

    def __init__(self, cfg: SystemConfig, codec: IndexCodec | None = None, bins_override=None):
        self.cfg = cfg
        self.codec = codec if codec is not None else codec_for(cfg)
        self._bins_override = {int(k): tuple(sorted(v)) for k, v in (bins_override or {}).items()}
        self._bins: dict[int, tuple[int, ...]] = {}
        self._design: dict[int, np.ndarray] = {}
        self._pilot: dict[int, np.ndarray] = {}

    def _check(self, device: int):
        if not 0 <= device < self.cfg.n_population:
            raise ValueError(f"device {device} outside [0, {self.cfg.n_population})")

    def bins(self, device: int) -> tuple[int, ...]:
        out = self._bins.get(device)
        if out is None:
            if device in self._bins_override:
                out = self._bins_override[device]
            else:
                self._check(device)
                rng = derive_rng(self.cfg.master_seed, ROLE_BINS, device)
                out = tuple(sorted(int(b) for b in rng.choice(self.cfg.b_bins, self.cfg.t_degree, replace=False)))
            self._bins[device] = out
        return out

    def design_vector(self, device: int) -> np.ndarray:
        out = self._design.get(device)
        if out is None:
            self._check(device)
            cfg = self.cfg
            coded = self.codec.encode(device)
            rng = derive_rng(cfg.master_seed, ROLE_SPREAD, device)
            spread = rng.integers(0, 2, cfg.c2)
            out = np.concatenate([np.ones(cfg.c0), 1.0 - 2.0 * coded, 1.0 - 2.0 * spread])
            out.flags.writeable = False
            self._design[device] = out
        return out

    def verification_vector(self, device: int) -> np.ndarray:
        return self.design_vector(device)[self.cfg.c0 + self.cfg.c1 :]

    def pilot(self, device: int) -> np.ndarray:
        out = self._pilot.get(device)
        if out is None:
            self._check(device)
            n = self.cfg.b_bins * self.cfg.c3
            rng = derive_rng(self.cfg.master_seed, ROLE_PILOT, device)
            z = rng.standard_normal((n, 2))
            out = (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)
            out.flags.writeable = False
            self._pilot[device] = out
        return out

    def signature(self, device: int) -> DeviceSignature:
        return DeviceSignature(device, self.bins(device), self.design_vector(device), self.pilot(device))

    def waveform(self, device: int) -> np.ndarray:
        return synthesize_waveform(self.cfg, self.signature(device))


def signature(cfg: SystemConfig, codec: IndexCodec, device: int) -> DeviceSignature:
    return Codebook(cfg, codec).signature(device)


def tone_sum(cfg: SystemConfig, bins) -> np.ndarray:
    """One unit-gain identification symbol: sum of the device's tones over B+M samples."""
    i = np.arange(cfg.symbol_length)
    return np.exp(2j * np.pi * np.outer(i, np.asarray(bins)) / cfg.b_bins).sum(axis=1)


def synthesize_waveform(cfg: SystemConfig, sig: DeviceSignature) -> np.ndarray:
    """Length-L codeword: C identification symbols, then the sync pilot."""
    ident = np.outer(sig.design_vector, tone_sum(cfg, sig.bins)).ravel()
    return np.concatenate([ident, sig.sync_pilot])


def dump_signatures(codebook: Codebook, devices) -> str:
    """Text dump used for golden files: bins, design signs, first 8 pilot samples."""
    lines = ["# device signatures v1"]
    for k in devices:
        sig = codebook.signature(k)
        lines.append(f"device {k}")
        lines.append("bins " + " ".join(map(str, sig.bins)))
        lines.append("design " + "".join("+" if g > 0 else "-" for g in sig.design_vector))
        head = sig.sync_pilot[:8]
        lines.append("pilot " + " ".join(f"{z.real:.12e},{z.imag:.12e}" for z in head))
    return "\n".join(lines) + "\n"
