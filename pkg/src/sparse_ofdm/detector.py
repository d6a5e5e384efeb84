"""Robust bin detection: zeroton / singleton / multiton classification."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook
from .codec import IndexCodec
from .config import SystemConfig, energy_threshold


@dataclass(frozen=True)
class Zeroton:
    pass


@dataclass(frozen=True)
class Multiton:
    reason: str = "verification"  # decode_failure | not_member | verification


@dataclass(frozen=True)
class Singleton:
    device: int
    verified_gain: complex
    phase_estimate: float


BinOutcome = Zeroton | Multiton | Singleton


def estimate_phase(ref_segment: np.ndarray) -> float:
    """Angle of the reference-segment mean in (-pi, pi]; 0 for an exactly zero mean."""
    mean = np.mean(ref_segment)
    if mean == 0:
        return 0.0
    theta = float(np.angle(mean))
    return math.pi if theta == -math.pi else theta


def hard_bits(index_segment: np.ndarray, theta: float) -> np.ndarray:
    # bit 0 <-> symbol +1, since g = (-1)^r
    return (np.real(index_segment * np.exp(-1j * theta)) < 0).astype(np.int64)


def slice_and_decode(index_segment: np.ndarray, theta: float, codec: IndexCodec) -> int | None:
    return codec.decode_hard(hard_bits(index_segment, theta))


def verify_singleton(verif_segment: np.ndarray, spread: np.ndarray, eta: float) -> tuple[bool, complex]:
    """Least-squares gain on the candidate's +-1 vector and the residual energy test."""
    gain = complex(spread @ verif_segment) / len(spread)
    residual = verif_segment - gain * spread
    return float(np.vdot(residual, residual).real) <= eta, gain


def detect(
    bin_values,
    b: int,
    cfg: SystemConfig,
    codec: IndexCodec,
    codebook: Codebook,
    eta: float | None = None,
) -> BinOutcome:
    """Classify bin ``b`` from its three segments ``(ref, index, verification)``."""
    ref, idx, ver = bin_values
    if eta is None:
        eta = energy_threshold(cfg)
    if float(np.vdot(ver, ver).real) < eta:
        return Zeroton()
    theta = estimate_phase(ref)
    k = slice_and_decode(idx, theta, codec)
    if k is None:
        return Multiton("decode_failure")
    if b not in codebook.bins(k):
        return Multiton("not_member")
    ok, gain = verify_singleton(ver, codebook.verification_vector(k), eta)
    if not ok:
        return Multiton("verification")
    return Singleton(k, gain, theta)
