"""System parameters, validation, and energy-threshold helpers."""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np

from .seeding import ROLE_CALIBRATION, derive_rng

# smallest tau0 handed out by calibration; keeps the zeroton test meaningful
# against floating point residue when there is no noise at all
TAU0_FLOOR = 1e-9

CODEC_VARIANTS = ("random_ldpc", "identity")


class ConfigError(ValueError):
    """Raised when a configuration cannot be used."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConfigWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SystemConfig:
    """Frame and channel parameters shared by every stage of the simulator.

    ``noise_variance`` is the per-sample complex noise variance (2 sigma^2).
    SNR is defined as ``1 / noise_variance`` for unit-amplitude tones.
    """

    n_population: int = 2**38
    k_active: int = 100
    b_bins: int = 450
    m_max_delay: int = 0
    t_degree: int = 3
    c0: int = 6
    c1: int = 43
    c2: int = 6
    c3: int = 8
    code_rate: float = 0.9
    tau0: float = 1.0
    noise_variance: float = 0.25
    gain_min: float = 1.0
    gain_max: float = 1.0
    master_seed: int = 0
    codec_variant: str = "random_ldpc"

    @property
    def index_bits(self) -> int:
        return max(1, (self.n_population - 1).bit_length())

    @property
    def n_symbols(self) -> int:
        """C = C0 + C1 + C2, identification symbols per frame."""
        return self.c0 + self.c1 + self.c2

    @property
    def symbol_length(self) -> int:
        return self.b_bins + self.m_max_delay

    @property
    def sync_offset(self) -> int:
        """First sample of the synchronization subframe."""
        return self.symbol_length * self.n_symbols

    @property
    def code_length(self) -> int:
        return self.sync_offset + self.b_bins * self.c3

    @property
    def frame_length(self) -> int:
        """Received window: code length plus a tail for the latest arrival."""
        return self.code_length + self.m_max_delay

    @property
    def snr_db(self) -> float:
        if self.noise_variance == 0:
            return math.inf
        return -10.0 * math.log10(self.noise_variance)

    @property
    def segments(self) -> tuple[slice, slice, slice]:
        c0, c1 = self.c0, self.c0 + self.c1
        return slice(0, c0), slice(c0, c1), slice(c1, self.n_symbols)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


def min_c1(index_bits: int, code_rate: float) -> int:
    # Fraction avoids ceil(36 / 0.9) == 41 style float artefacts
    rate = Fraction(code_rate).limit_denominator(10**6)
    return math.ceil(Fraction(index_bits) / rate)


def reference_config(
    k_active: int = 100,
    m_max_delay: int = 0,
    snr_db: float = 6.0,
    *,
    n_population: int = 2**38,
    c3: int = 8,
    **overrides,
) -> SystemConfig:
    """Operating point of the simulation study: T=3, B=ceil(4.5K), C0=C2=6, R=0.9."""
    index_bits = max(1, (n_population - 1).bit_length())
    base = dict(
        n_population=n_population,
        k_active=k_active,
        b_bins=math.ceil(4.5 * k_active),
        m_max_delay=m_max_delay,
        t_degree=3,
        c0=6,
        c1=min_c1(index_bits, 0.9),
        c2=6,
        c3=c3,
        code_rate=0.9,
        noise_variance=snr_to_noise_variance(snr_db),
    )
    base.update(overrides)
    return SystemConfig(**base)


def snr_to_noise_variance(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)


def validate(cfg: SystemConfig, *, warn: bool = True) -> list[str]:
    """Return every violated invariant (empty list means the config is usable)."""
    v = []
    if cfg.n_population < 2:
        v.append("n_population >= 2")
    if cfg.k_active < 0:
        v.append("k_active >= 0")
    if cfg.k_active > cfg.n_population:
        v.append("k_active <= n_population")
    if cfg.t_degree < 1:
        v.append("t_degree >= 1")
    if cfg.b_bins < cfg.t_degree:
        v.append("b_bins >= t_degree")
    if cfg.m_max_delay < 0:
        v.append("m_max_delay >= 0")
    if cfg.c0 < 1:
        v.append("c0 >= 1")
    if cfg.c2 < 1:
        v.append("c2 >= 1")
    if cfg.c3 < 0:
        v.append("c3 >= 0")
    if not 0 < cfg.code_rate <= 1:
        v.append("code_rate in (0, 1]")
    elif cfg.c1 < min_c1(cfg.index_bits, cfg.code_rate):
        v.append(f"c1 >= ceil(index_bits / code_rate) = {min_c1(cfg.index_bits, cfg.code_rate)}")
    if cfg.codec_variant not in CODEC_VARIANTS:
        v.append(f"codec_variant in {CODEC_VARIANTS}")
    elif cfg.codec_variant == "identity" and cfg.c1 != cfg.index_bits:
        v.append("identity codec requires c1 == index_bits")
    if not cfg.tau0 > 0:
        v.append("tau0 > 0")
    if not cfg.noise_variance >= 0:
        v.append("noise_variance >= 0")
    if not 0 < cfg.gain_min <= cfg.gain_max:
        v.append("0 < gain_min <= gain_max")
    if not 0 <= cfg.master_seed < 2**64:
        v.append("master_seed is a 64-bit unsigned integer")

    if warn and not v:
        if cfg.t_degree < 3:
            warnings.warn("t_degree < 3: peeling guarantees assume T >= 3", ConfigWarning, stacklevel=2)
        if cfg.b_bins < 4.5 * cfg.k_active:
            warnings.warn("b_bins < 4.5 * k_active: below the simulated operating point", ConfigWarning, stacklevel=2)
        if cfg.m_max_delay > 0 and cfg.c3 == 0:
            warnings.warn("m_max_delay > 0 with c3 == 0: delays cannot be estimated", ConfigWarning, stacklevel=2)
    return v


def check(cfg: SystemConfig) -> SystemConfig:
    violations = validate(cfg, warn=False)
    if violations:
        raise ConfigError(violations)
    return cfg


def energy_threshold(cfg: SystemConfig) -> float:
    """eta = C2 * tau0 / sqrt(B), shared by the zeroton and verification tests."""
    return cfg.c2 * cfg.tau0 / math.sqrt(cfg.b_bins)


def calibrate_tau0(
    cfg: SystemConfig,
    target_zeroton_fp: float,
    n_samples: int = 100_000,
    rng_seed: int = 0,
) -> float:
    """Smallest tau0 whose noise-only zeroton false-positive rate is <= target.

    Draws ``n_samples`` verification segments of pure noise (entries
    CN(0, noise_variance / B)) and places eta just above the energy that would
    be the first excess false positive.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100 for a meaningful calibration")
    if not 0 < target_zeroton_fp < 1:
        raise ValueError("target_zeroton_fp must lie in (0, 1)")
    if cfg.noise_variance == 0:
        return TAU0_FLOOR

    rng = derive_rng(rng_seed, ROLE_CALIBRATION)
    z = rng.standard_normal((n_samples, cfg.c2, 2))
    # identical draws at every noise level, so eta scales exactly with variance
    energy = np.sort((z**2).sum(axis=(1, 2)))[::-1] * (cfg.noise_variance / (2 * cfg.b_bins))
    allowed = int(math.floor(target_zeroton_fp * n_samples))
    eta = float(np.nextafter(energy[allowed], np.inf))
    return max(eta * math.sqrt(cfg.b_bins) / cfg.c2, TAU0_FLOOR)


# ---- plain-text key/value files ------------------------------------------

FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SystemConfig)}
VIRTUAL_KEYS = ("snr_db", "beta0")


def _coerce(name: str, raw: str):
    kind = FIELD_TYPES[name]
    raw = raw.strip()
    try:
        if kind == "int":
            if "**" in raw:
                base, exp = raw.split("**")
                return int(base) ** int(exp)
            return int(raw, 0)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError([f"{name}: cannot parse {raw!r} as {kind}"]) from None
    return raw


def apply_overrides(cfg: SystemConfig, overrides: Mapping[str, object]) -> SystemConfig:
    """Apply ``key -> value`` settings, including two derived keys.

    ``snr_db`` sets ``noise_variance``; ``beta0`` sets ``b_bins =
    ceil(beta0 * k_active)`` after every other key has been applied.
    """
    changes = {}
    beta0 = None
    for key, value in overrides.items():
        if key == "snr_db":
            changes["noise_variance"] = snr_to_noise_variance(float(value))
        elif key == "beta0":
            beta0 = float(value)
        elif key in FIELD_TYPES:
            if isinstance(value, str):
                value = _coerce(key, value)
            elif FIELD_TYPES[key] == "int" and isinstance(value, float):
                if not value.is_integer():
                    raise ConfigError([f"{key} must be an integer, got {value!r}"])
                value = int(value)
            changes[key] = value
        else:
            raise ConfigError([f"unknown config key {key!r}"])
    cfg = dataclasses.replace(cfg, **changes)
    if beta0 is not None:
        cfg = dataclasses.replace(cfg, b_bins=math.ceil(beta0 * cfg.k_active))
    return cfg


def parse_text(text: str) -> dict[str, str]:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError([f"line {lineno}: expected 'key = value'"])
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key] = value
    return entries


def to_text(cfg: SystemConfig) -> str:
    lines = ["# sparse-ofdm system configuration"]
    for f in dataclasses.fields(cfg):
        lines.append(f"{f.name} = {getattr(cfg, f.name)!r}".replace("'", ""))
    return "\n".join(lines) + "\n"


def from_text(text: str, base: SystemConfig | None = None) -> SystemConfig:
    return apply_overrides(base or SystemConfig(), parse_text(text))


def load(path: str | Path, base: SystemConfig | None = None) -> SystemConfig:
    return from_text(Path(path).read_text(), base)


def save(cfg: SystemConfig, path: str | Path) -> None:
    Path(path).write_text(to_text(cfg))
