"""Binary subcode carrying the device index.

The index (``message_bits`` wide, MSB first) is multiplied by a generator
matrix over GF(2). The default code is a random column-weight-3 LDPC code in
systematic form, decoded from hard decisions with Gallager-B message passing.
The identity variant (rate 1) exists for noiseless tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .seeding import ROLE_CODEC, derive_rng

COLUMN_WEIGHT = 3
MAX_ITERATIONS = 50
MAX_CONSTRUCTION_ATTEMPTS = 100


@dataclass(frozen=True)
class CodecSpec:
    message_bits: int
    coded_bits: int
    construction_seed: int = 0
    variant: str = "random_ldpc"

    def __post_init__(self):
        if self.message_bits < 1:
            raise ValueError("message_bits must be >= 1")
        if self.coded_bits < self.message_bits:
            raise ValueError("coded_bits must be >= message_bits")
        if self.variant == "identity" and self.coded_bits != self.message_bits:
            raise ValueError("identity codec requires coded_bits == message_bits")
        if self.variant not in ("identity", "random_ldpc"):
            raise ValueError(f"unknown codec variant {self.variant!r}")

    @property
    def rate(self) -> float:
        return self.message_bits / self.coded_bits


def int_to_bits(value: int, width: int) -> np.ndarray:
    """MSB-first binary representation."""
    if not 0 <= value < 1 << width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - j)) & 1 for j in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def gf2_rref(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and the pivot columns."""
    a = mat.copy() % 2
    pivots = []
    row = 0
    for col in range(a.shape[1]):
        if row == a.shape[0]:
            break
        hits = np.nonzero(a[row:, col])[0]
        if hits.size == 0:
            continue
        p = row + hits[0]
        if p != row:
            a[[row, p]] = a[[p, row]]
        others = np.nonzero(a[:, col])[0]
        others = others[others != row]
        a[others] ^= a[row]
        pivots.append(col)
        row += 1
    return a[:row], pivots


def _random_parity_check(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    # column-regular; each column lands on the least loaded rows, random tie-break
    w = min(COLUMN_WEIGHT, m)
    h = np.zeros((m, n), dtype=np.uint8)
    load = np.zeros(m)
    for col in rng.permutation(n):
        order = np.lexsort((rng.random(m), load))
        rows = order[:w]
        h[rows, col] = 1
        load[rows] += 1
    return h


class IndexCodec:
    """Encoder / hard-decision decoder built deterministically from a CodecSpec."""

    def __init__(self, spec: CodecSpec, n_population: int | None = None):
        self.spec = spec
        self.n_population = n_population if n_population is not None else 2**spec.message_bits
        if self.n_population > 2**spec.message_bits:
            raise ValueError("n_population does not fit in message_bits")
        k, n = spec.message_bits, spec.coded_bits
        m = n - k
        if spec.variant == "identity" or m == 0:
            self.H = np.zeros((0, n), dtype=np.uint8)
            self.G = np.eye(k, n, dtype=np.uint8)
            self.info_positions = np.arange(k)
            self._pinned = np.zeros(0, dtype=int)
        else:
            rng = derive_rng(spec.construction_seed, ROLE_CODEC, k, n)
            for _ in range(MAX_CONSTRUCTION_ATTEMPTS):
                h = _random_parity_check(n, m, rng)
                rref, pivots = gf2_rref(h)
                if len(pivots) == m:
                    break
            # a rank-deficient H (only reachable with very few checks) leaves
            # spare information positions; they are pinned to zero (shortening)
            free = [c for c in range(n) if c not in pivots]
            info = np.array(free[:k])
            self.H = h
            self._pinned = np.array(free[k:], dtype=int)
            g = np.zeros((k, n), dtype=np.uint8)
            g[:, info] = np.eye(k, dtype=np.uint8)
            # parity bit at pivot i is the sum of the info bits its RREF row touches
            g[:, pivots] = rref[:, info].T
            self.G = g
            self.info_positions = info
        self._check_e, self._var_e = np.nonzero(self.H)
        self._var_degree = np.bincount(self._var_e, minlength=n)
        dv = int(self._var_degree.max()) if self._var_e.size else 0
        self._flip_threshold = max(1, dv - 1) if dv <= 3 else dv // 2 + 1

    @property
    def message_bits(self) -> int:
        return self.spec.message_bits

    @property
    def coded_bits(self) -> int:
        return self.spec.coded_bits

    def encode(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_population:
            raise ValueError(f"index {index} outside [0, {self.n_population})")
        msg = int_to_bits(index, self.message_bits)
        return (msg.astype(np.int64) @ self.G % 2).astype(np.uint8)

    def syndrome(self, word: np.ndarray) -> np.ndarray:
        return (self.H.astype(np.int64) @ word) % 2

    def _gallager_b(self, received: np.ndarray) -> np.ndarray | None:
        chk, var = self._check_e, self._var_e
        n, m = self.coded_bits, self.H.shape[0]
        r_e = received[var].astype(np.int64)
        v2c = r_e.copy()
        votes_total = self._var_degree + 1
        for _ in range(MAX_ITERATIONS):
            parity = np.bincount(chk, weights=v2c, minlength=m).astype(np.int64) % 2
            c2v = parity[chk] ^ v2c
            ones = received + np.bincount(var, weights=c2v, minlength=n).astype(np.int64)
            decision = np.where(2 * ones > votes_total, 1, np.where(2 * ones < votes_total, 0, received))
            if not self.syndrome(decision).any():
                return decision.astype(np.uint8)
            disagree = (c2v != r_e).astype(np.int64)
            other = np.bincount(var, weights=disagree, minlength=n).astype(np.int64)[var] - disagree
            v2c = np.where(other >= self._flip_threshold, 1 - r_e, r_e)
        return None

    def decode_hard(self, hard_bits) -> int | None:
        """Index whose codeword the decoder converges to, or None on failure."""
        word = np.asarray(hard_bits, dtype=np.int64)
        if word.shape != (self.coded_bits,):
            raise ValueError(f"expected {self.coded_bits} coded bits, got shape {word.shape}")
        if self.H.shape[0] and self.syndrome(word).any():
            word = self._gallager_b(word)
            if word is None:
                return None
        if word[self._pinned].any():
            return None
        index = bits_to_int(word[self.info_positions])
        if index >= self.n_population:
            return None
        return index

    def to_text(self) -> str:
        """Generator and parity-check matrices, one row of 0/1 characters per line."""
        lines = [
            "# index-codec v1",
            f"variant {self.spec.variant}",
            f"message_bits {self.message_bits}",
            f"coded_bits {self.coded_bits}",
            f"construction_seed {self.spec.construction_seed}",
            f"G {self.G.shape[0]} {self.G.shape[1]}",
        ]
        lines += ["".join(map(str, row)) for row in self.G]
        lines.append(f"H {self.H.shape[0]} {self.H.shape[1]}")
        lines += ["".join(map(str, row)) for row in self.H]
        return "\n".join(lines) + "\n"


def read_matrices(text: str) -> dict[str, np.ndarray]:
    """Parse the ``G`` and ``H`` blocks written by :meth:`IndexCodec.to_text`."""
    out = {}
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if parts[0] in ("G", "H"):
            rows, cols = int(parts[1]), int(parts[2])
            block = lines[i + 1 : i + 1 + rows]
            out[parts[0]] = np.array([[int(ch) for ch in row] for row in block], dtype=np.uint8).reshape(rows, cols)
            i += rows + 1
        else:
            i += 1
    return out


@lru_cache(maxsize=32)
def _build(spec: CodecSpec, n_population: int) -> IndexCodec:
    return IndexCodec(spec, n_population)


def codec_for(cfg) -> IndexCodec:
    """Codec matching a SystemConfig (cached; codecs are immutable)."""
    spec = CodecSpec(cfg.index_bits, cfg.c1, cfg.master_seed, cfg.codec_variant)
    return _build(spec, cfg.n_population)
