"""Key derivation for every random stream in the simulator.

All randomness hangs off one 64-bit master seed. A stream is identified by
``(master_seed, role, *keys)`` where ``role`` is a small integer tag, so the
transmitter and receiver regenerate the same device signatures and trial
seeds are independent of how work is split across processes.
"""

import numpy as np

# role tags; never renumber, golden files depend on them
ROLE_BINS = 1
ROLE_SPREAD = 2
ROLE_PILOT = 3
ROLE_CODEC = 4
ROLE_TRIAL = 5
ROLE_SCENARIO = 6
ROLE_NOISE = 7
ROLE_CALIBRATION = 8

MASK64 = (1 << 64) - 1


def seed_sequence(master_seed: int, role: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=int(master_seed) & MASK64,
        spawn_key=(int(role),) + tuple(int(k) for k in keys),
    )


def derive_rng(master_seed: int, role: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, role, *keys)))


def derive_seed(master_seed: int, role: int, *keys: int) -> int:
    """A 64-bit child seed, e.g. one per Monte Carlo trial."""
    state = seed_sequence(master_seed, role, *keys).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
