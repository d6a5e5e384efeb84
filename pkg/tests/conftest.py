import math

import numpy as np
import pytest

from sparse_ofdm.config import TAU0_FLOOR, SystemConfig


def small_cfg(k=4, m=0, noise=0.0, **kw) -> SystemConfig:
    """Small noiseless-friendly config with the identity codec over 2**12 devices."""
    base = dict(
        n_population=2**12,
        k_active=k,
        b_bins=max(3, math.ceil(4.5 * k)),
        m_max_delay=m,
        t_degree=3,
        c0=4,
        c1=12,
        c2=12,
        c3=4,
        code_rate=1.0,
        tau0=TAU0_FLOOR,
        noise_variance=noise,
        codec_variant="identity",
    )
    base.update(kw)
    return SystemConfig(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
