"""Sparse-OFDM asynchronous neighbor discovery simulator."""

__version__ = "0.1.0"

from .config import SystemConfig, energy_threshold, reference_config, validate  # noqa: E402
from .decoder import DecoderOutput, PeelingDecoder  # noqa: E402

__all__ = [
    "SystemConfig",
    "energy_threshold",
    "reference_config",
    "validate",
    "DecoderOutput",
    "PeelingDecoder",
]
