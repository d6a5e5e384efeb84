"""Peeling decoder: global singleton pass then successive cancellation.

Every detected device gets one delay estimate (pilot correlation over the
sync subframe) and one gain estimate (matched filter on the bin it was
detected from); its contribution is then subtracted from the unresolved
bins it touches and those bins are re-examined.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .codebook import Codebook
from .codec import IndexCodec
from .config import SystemConfig, energy_threshold
from .detector import Singleton, detect
from .frontend import BinObservation, build_observation


@dataclass(frozen=True)
class DeviceEstimate:
    delay: int
    gain: complex
    bin: int  # bin the device was resolved from
    phase: str  # "global" or "cancellation"


@dataclass
class DecoderOutput:
    estimates: dict[int, DeviceEstimate] = field(default_factory=dict)
    iterations: int = 0  # bin detections during successive cancellation
    resolved: dict[int, int] = field(default_factory=dict)  # bin -> device it resolved to
    outcome_counts: Counter = field(default_factory=Counter)
    duplicates: int = 0
    cap_hit: bool = False
    residual: BinObservation | None = field(default=None, repr=False)  # observation after cancellation

    @property
    def bins_resolved(self) -> int:
        return len(self.resolved)

    @property
    def detected(self) -> set[int]:
        return set(self.estimates)

    def diagnostics(self) -> dict:
        return {
            "detected": len(self.estimates),
            "iterations": self.iterations,
            "bins_resolved": self.bins_resolved,
            "duplicates": self.duplicates,
            "zeroton": self.outcome_counts.get("Zeroton", 0),
            "singleton": self.outcome_counts.get("Singleton", 0),
            "multiton": self.outcome_counts.get("Multiton", 0),
            "cap_hit": self.cap_hit,
        }


def decision_statistic(samples: np.ndarray, pilot: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """T(m) = sum_{i in I} y_{i+m} conj(s_{k,i}), m = 0..M, I the sync subframe."""
    samples = np.asarray(getattr(samples, "samples", samples))
    start = cfg.sync_offset
    n = cfg.b_bins * cfg.c3
    if len(samples) < start + n + cfg.m_max_delay:
        raise ValueError("frame too short for the synchronization subframe")
    if n == 0:
        return np.zeros(cfg.m_max_delay + 1, dtype=complex)
    window = samples[start : start + n + cfg.m_max_delay]
    # np.correlate conjugates its second argument
    return np.correlate(window, pilot, mode="valid")


def estimate_delay(stat: np.ndarray) -> int:
    """argmax_m |T(m)|; np.argmax already breaks ties towards the smallest m."""
    return int(np.argmax(np.abs(stat)))


def _rotation(cfg: SystemConfig, b: int, delay: int) -> complex:
    return np.exp(2j * np.pi * b * (cfg.m_max_delay - delay) / cfg.b_bins)


def estimate_gain(row: np.ndarray, design: np.ndarray, b: int, delay: int, cfg: SystemConfig) -> complex:
    """a_hat = (1/C) g^T Y_b exp(-2 pi j b (M - m_hat) / B)."""
    return complex(design @ row) / len(design) / _rotation(cfg, b, delay)


def cancel(obs: BinObservation, b: int, gain: complex, delay: int, design: np.ndarray) -> None:
    """In-place Y_b <- Y_b - a_hat exp(2 pi j b (M - m_hat) / B) g."""
    obs.values[b] -= gain * _rotation(obs.cfg, b, delay) * design


class PeelingDecoder:
    def __init__(self, cfg: SystemConfig, codec: IndexCodec, codebook: Codebook, eta: float | None = None):
        self.cfg = cfg
        self.codec = codec
        self.codebook = codebook
        self.eta = energy_threshold(cfg) if eta is None else eta

    @property
    def iteration_cap(self) -> int:
        return 4 * self.cfg.k_active * self.cfg.t_degree

    def run(self, frame) -> DecoderOutput:
        cfg = self.cfg
        samples = np.asarray(getattr(frame, "samples", frame))
        obs = build_observation(samples, cfg)
        out = DecoderOutput(residual=obs)
        unprocessed = np.ones(cfg.b_bins, dtype=bool)
        pending: deque[int] = deque()

        def examine(b: int, phase: str) -> None:
            outcome = detect(obs.segments(b), b, cfg, self.codec, self.codebook, self.eta)
            out.outcome_counts[type(outcome).__name__] += 1
            if not isinstance(outcome, Singleton):
                return
            unprocessed[b] = False
            k = outcome.device
            out.resolved[b] = k
            if k in out.estimates:
                out.duplicates += 1
                return
            delay = estimate_delay(decision_statistic(samples, self.codebook.pilot(k), cfg))
            gain = estimate_gain(obs.row(b), self.codebook.design_vector(k), b, delay, cfg)
            out.estimates[k] = DeviceEstimate(delay, gain, b, phase)
            pending.append(k)

        for b in range(cfg.b_bins):
            examine(b, "global")

        cap = self.iteration_cap
        while pending:
            k = pending.popleft()
            est = out.estimates[k]
            design = self.codebook.design_vector(k)
            for b in self.codebook.bins(k):
                if not unprocessed[b]:
                    continue
                if out.iterations >= cap:
                    out.cap_hit = True
                    return out
                cancel(obs, b, est.gain, est.delay, design)
                out.iterations += 1
                examine(b, "cancellation")
        return out


def run(frame, cfg: SystemConfig, codec: IndexCodec, codebook: Codebook, eta: float | None = None) -> DecoderOutput:
    return PeelingDecoder(cfg, codec, codebook, eta).run(frame)
