"""Frame-asynchronous, symbol-synchronous multiuser channel.

x_i = sum_k a_k s_{k, i - m_k} + w_i over a window of L + M samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .codebook import Codebook
from .config import SystemConfig
from .seeding import ROLE_NOISE, ROLE_SCENARIO, derive_rng


@dataclass(frozen=True)
class ActiveScenario:
    devices: tuple[int, ...] = ()
    gains: tuple[complex, ...] = ()
    delays: tuple[int, ...] = ()

    def __post_init__(self):
        if not len(self.devices) == len(self.gains) == len(self.delays):
            raise ValueError("devices, gains and delays must have equal length")
        if len(set(self.devices)) != len(self.devices):
            raise ValueError("active devices must be distinct")

    def __len__(self):
        return len(self.devices)

    def __iter__(self):
        return iter(zip(self.devices, self.gains, self.delays))

    def validate(self, cfg: SystemConfig) -> None:
        for k, a, m in self:
            if not 0 <= k < cfg.n_population:
                raise ValueError(f"device {k} out of range")
            if not 0 <= m <= cfg.m_max_delay:
                raise ValueError(f"delay {m} outside [0, {cfg.m_max_delay}]")
            if not cfg.gain_min - 1e-12 <= abs(a) <= cfg.gain_max + 1e-12:
                raise ValueError(f"|gain| {abs(a)} outside [{cfg.gain_min}, {cfg.gain_max}]")

    def union(self, other: "ActiveScenario") -> "ActiveScenario":
        return ActiveScenario(
            self.devices + other.devices, self.gains + other.gains, self.delays + other.delays
        )


@dataclass
class ReceivedFrame:
    samples: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.samples)


def _sample_devices(rng: np.random.Generator, n: int, k: int) -> list[int]:
    if n <= 1 << 20:
        return [int(d) for d in rng.choice(n, k, replace=False)]
    # huge populations: rejection sampling keeps memory flat
    chosen: dict[int, None] = {}
    while len(chosen) < k:
        chosen.setdefault(int(rng.integers(0, n)), None)
    return list(chosen)


def draw_scenario(cfg: SystemConfig, rng_seed: int) -> ActiveScenario:
    """K distinct devices, uniform |a| in [gain_min, gain_max], uniform phase and delay."""
    if cfg.k_active > cfg.n_population:
        raise ValueError("k_active exceeds n_population")
    rng = derive_rng(rng_seed, ROLE_SCENARIO)
    k = cfg.k_active
    devices = _sample_devices(rng, cfg.n_population, k)
    mag = rng.uniform(cfg.gain_min, cfg.gain_max, k)
    phase = rng.uniform(0.0, 2 * np.pi, k)
    delays = rng.integers(0, cfg.m_max_delay + 1, k)
    gains = mag * np.exp(1j * phase)
    return ActiveScenario(tuple(devices), tuple(complex(g) for g in gains), tuple(int(m) for m in delays))


def noiseless_frame(cfg: SystemConfig, codebook: Codebook, scenario: ActiveScenario) -> np.ndarray:
    x = np.zeros(cfg.frame_length, dtype=complex)
    length = cfg.code_length
    for k, a, m in scenario:
        x[m : m + length] += a * codebook.waveform(k)
    return x


def add_noise(cfg: SystemConfig, samples: np.ndarray, noise_seed: int) -> np.ndarray:
    if cfg.noise_variance == 0:
        return samples
    rng = derive_rng(noise_seed, ROLE_NOISE)
    w = rng.standard_normal((len(samples), 2)) @ np.array([1.0, 1j])
    return samples + np.sqrt(cfg.noise_variance / 2.0) * w


def transmit(cfg: SystemConfig, codebook: Codebook, scenario: ActiveScenario, noise_seed: int) -> ReceivedFrame:
    scenario.validate(cfg)
    x = add_noise(cfg, noiseless_frame(cfg, codebook, scenario), noise_seed)
    return ReceivedFrame(x)


def write_frame(frame: ReceivedFrame, path: str | Path) -> None:
    """Interleaved real/imag little-endian float64."""
    Path(path).write_bytes(np.asarray(frame.samples, dtype="<c16").tobytes())


def read_frame(path: str | Path) -> ReceivedFrame:
    return ReceivedFrame(np.frombuffer(Path(path).read_bytes(), dtype="<c16").astype(complex))
