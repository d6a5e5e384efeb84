"""Slotted ALOHA and CSMA neighbor-discovery baselines (miss probability and symbol counts)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RandomAccessModel:
    protocol: str  # "aloha" | "csma"
    k_active: int
    n_slots: int
    access_prob: float | None = None
    snr_linear: float = 1.0

    def __post_init__(self):
        if self.protocol not in ("aloha", "csma"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.n_slots < 1:
            raise ValueError("n_slots must be >= 1")
        if self.access_prob is not None and not 0 < self.access_prob <= 1:
            raise ValueError("access_prob must lie in (0, 1]")

    def miss_probability(self) -> float:
        if self.protocol == "aloha":
            return aloha_miss_probability(self.k_active, self.access_prob, self.n_slots)
        return csma_miss_probability(self.k_active, self.n_slots)


def aloha_miss_probability(k: int, p: float | None, n_slots: int) -> float:
    """(1 - (1-p)^(K-1) p)^Ns; p defaults to the optimum 1/K."""
    if k < 1:
        raise ValueError("K must be >= 1")
    if p is None:
        p = 1.0 / k
    return (1.0 - (1.0 - p) ** (k - 1) * p) ** n_slots


def csma_miss_probability(k: int, n_slots: int) -> float:
    """(1 - 1/K)^Ns: with i.i.d. continuous timers each device wins a slot w.p. 1/K."""
    if k < 1:
        raise ValueError("K must be >= 1")
    return (1.0 - 1.0 / k) ** n_slots


def _slots_for(per_slot_success: float, target: float) -> int:
    if per_slot_success >= 1.0:
        return 1
    n = math.ceil(math.log(target) / math.log1p(-per_slot_success))
    return max(1, n)


def aloha_slots_for_target(k: int, target: float, p: float | None = None) -> int:
    p = 1.0 / k if p is None else p
    n = _slots_for((1.0 - p) ** (k - 1) * p, target)
    # guard the float inversion at the boundary
    while aloha_miss_probability(k, p, n) > target:
        n += 1
    return n


def csma_slots_for_target(k: int, target: float) -> int:
    n = _slots_for(1.0 / k, target)
    while csma_miss_probability(k, n) > target:
        n += 1
    return n


def symbols_required(n_population: int, snr_linear: float, n_slots: int) -> int:
    """ceil(Ns * ceil(log2 N) / log2(1 + SNR))."""
    if snr_linear <= 0:
        raise ValueError("snr_linear must be > 0")
    bits = math.ceil(math.log2(n_population))
    return math.ceil(n_slots * bits / math.log2(1.0 + snr_linear))


def simulate_aloha_miss(k: int, p: float | None, n_slots: int, n_runs: int, rng: np.random.Generator) -> float:
    """Monte Carlo: fraction of runs in which device 0 never transmits alone."""
    p = 1.0 / k if p is None else p
    missed = 0
    chunk = max(1, 2_000_000 // max(1, k * n_slots))
    done = 0
    while done < n_runs:
        n = min(chunk, n_runs - done)
        tx = rng.random((n, n_slots, k)) < p
        alone = tx[:, :, 0] & (tx.sum(axis=2) == 1)
        missed += int((~alone.any(axis=1)).sum())
        done += n
    return missed / n_runs


def simulate_csma_miss(k: int, n_slots: int, n_runs: int, rng: np.random.Generator) -> float:
    """Monte Carlo: fraction of runs in which device 0's timer never expires first."""
    missed = 0
    chunk = max(1, 2_000_000 // max(1, k * n_slots))
    done = 0
    while done < n_runs:
        n = min(chunk, n_runs - done)
        timers = rng.random((n, n_slots, k))
        wins = timers.argmin(axis=2) == 0
        missed += int((~wins.any(axis=1)).sum())
        done += n
    return missed / n_runs
