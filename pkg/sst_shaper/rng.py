"""
Deterministic randomness for every experiment in the package.

All draws come from a splitmix64 stream so covers, messages, masks and paths
are bit-exact functions of their seeds, independent of platform or numpy
version. States are immutable values; every call returns the advanced state.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PathError

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MUL_1 = 0xBF58476D1CE4E5B9
MIX_MUL_2 = 0x94D049BB133111EB

_F64_SCALE = 1.0 / (1 << 53)


@dataclass(frozen=True)
class RngState:
    state: int

    def __post_init__(self):
        if not 0 <= self.state <= MASK64:
            raise ValueError(f"rng state must fit in 64 bits, got {self.state}")

    @classmethod
    def from_seed(cls, seed):
        return cls(int(seed) & MASK64)


def _mix(z):
    z = ((z ^ (z >> 30)) * MIX_MUL_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_MUL_2) & MASK64
    return z ^ (z >> 31)


def next_u64(st):
    """
    Advance the stream by one step.

    Returns:
        (value, new_state) with value a 64-bit unsigned integer
    """
    state = (st.state + GOLDEN_GAMMA) & MASK64
    return _mix(state), RngState(state)


def next_f64(st):
    """Uniform real in [0, 1) from the top 53 bits of the next u64."""
    value, st = next_u64(st)
    return (value >> 11) * _F64_SCALE, st


def u64_block(st, n):
    """
    Vectorized form of n consecutive next_u64 calls.

    The stream state after i steps is st + i*gamma, so the whole block is
    mixed at once with wrapping uint64 arithmetic.

    Returns:
        (uint64 array of length n, state after n steps)
    """
    if n < 0:
        raise ValueError(f"block length must be non-negative, got {n}")
    with np.errstate(over="ignore"):
        steps = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(st.state) + steps * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_MUL_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_MUL_2)
        z = z ^ (z >> np.uint64(31))
    return z, RngState((st.state + n * GOLDEN_GAMMA) & MASK64)


def f64_block(st, n):
    """Vectorized form of n consecutive next_f64 calls."""
    values, st = u64_block(st, n)
    return (values >> np.uint64(11)).astype(np.float64) * _F64_SCALE, st


def derive_seed(master, ordinal):
    """Seed for the ordinal-th independent sub-experiment of a master seed."""
    base = (int(master) ^ (((int(ordinal) + 1) * GOLDEN_GAMMA) & MASK64)) & MASK64
    value, _ = next_u64(RngState(base))
    return value


def random_bits(st, n):
    """
    n bits from the stream: bit t is bit (t mod 64), least significant first,
    of word t // 64.
    """
    words, st = u64_block(st, -(-n // 64))
    raw = words.astype("<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n], st


def mask_bits(session_seed, h, n):
    """Deterministic binary mask r_h of n bits, drawn from the stream seeded with session_seed XOR (h+1)*gamma."""
    if n < 0 or h < 0:
        raise ValueError(f"mask needs h >= 0 and n >= 0, got h={h}, n={n}")
    seed = (int(session_seed) ^ (((int(h) + 1) * GOLDEN_GAMMA) & MASK64)) & MASK64
    bits, _ = random_bits(RngState(seed), n)
    return bits


def keyed_path(key, m, l):
    """
    First l positions of a keyed partial Fisher-Yates shuffle of range(m).

    Args:
        key: 64-bit path key
        m: number of pixels in the cover
        l: path length

    Returns:
        int64 array of l distinct indices in [0, m)
    """
    if l < 0 or m < 0:
        raise PathError(f"path and cover sizes must be non-negative, got l={l}, m={m}")
    if l > m:
        raise PathError(f"path longer than cover: {l} > {m}")
    draws, _ = u64_block(RngState.from_seed(key), l)
    order = list(range(m))
    for i, draw in enumerate(draws.tolist()):
        j = i + draw % (m - i)
        order[i], order[j] = order[j], order[i]
    return np.asarray(order[:l], dtype=np.int64)
