"""
Syndrome-coding insertion cost, and shaping against it.

Pixels are picked along a keyed path; their LSBs form the cover bit sequence.
Consecutive groups of n positions form blocks, and each block must carry m
payload bits as the syndrome H (c XOR f) of its cover bits c under the flip
set f. A dynamic program over the 2^m partial syndromes finds the cheapest f
for every block, with flip weights taken from local image texture.

Syndromes are handled as integers: bit r of a column value (counted from the
most significant of m bits) is row r of H.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PathError
from .imaging import check_image
from .lsb import as_bits
from .rng import MASK64, keyed_path
from .shaping import build_payload

logger = logging.getLogger(__name__)

BLOCK_COVER_BITS = 8
BLOCK_SYNDROME_BITS = 4

# candidate payloads evaluated per vectorized DP batch
_CANDIDATE_BATCH = 256


def default_check_matrix(n=BLOCK_COVER_BITS, m=BLOCK_SYNDROME_BITS):
    """m x n matrix whose column j is j+1 written MSB-first in m bits."""
    return np.array([[((j + 1) >> (m - 1 - r)) & 1 for j in range(n)] for r in range(m)],
                    dtype=np.uint8)


def check_matrix_columns(check_matrix):
    """Column values of H as integers, row 0 being the most significant bit."""
    check_matrix = np.asarray(check_matrix, dtype=np.int64)
    m = check_matrix.shape[0]
    weights = 1 << np.arange(m - 1, -1, -1)
    return (weights @ check_matrix).astype(np.int64)


def _reachable_syndromes(columns):
    reachable = {0}
    for col in columns:
        reachable |= {s ^ int(col) for s in reachable}
    return reachable


@dataclass(frozen=True)
class StcConfig:
    key: int = 0
    n: int = BLOCK_COVER_BITS
    m: int = BLOCK_SYNDROME_BITS
    check_matrix: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        if not 0 <= self.key <= MASK64:
            raise ConfigError(f"path key must fit in 64 bits, got {self.key}")
        if self.n < 1 or self.m < 1:
            raise ConfigError(f"block sizes must be positive, got n={self.n}, m={self.m}")
        matrix = self.check_matrix
        if matrix is None:
            matrix = default_check_matrix(self.n, self.m)
        matrix = np.asarray(matrix, dtype=np.uint8)
        if matrix.shape != (self.m, self.n):
            raise ConfigError(f"check matrix must be {self.m}x{self.n}, got {matrix.shape}")
        if len(_reachable_syndromes(check_matrix_columns(matrix))) != 1 << self.m:
            raise ConfigError("check matrix columns must span every syndrome")
        object.__setattr__(self, "check_matrix", matrix)

    @property
    def columns(self):
        return check_matrix_columns(self.check_matrix)

    def blocks_for(self, payload_bits):
        return -(-payload_bits // self.m)


@dataclass
class StcOutcome:
    total_cost: float
    flips: np.ndarray
    chosen_h: int = 0
    block_costs: np.ndarray = None
    per_candidate: list = field(default_factory=list)


def local_weights(img, positions):
    """
    Flip weight 1 / (1 + sigma) per position, sigma being the population
    standard deviation of the edge-replicated 3x3 neighborhood.
    """
    img = check_image(img)
    positions = np.asarray(positions, dtype=np.int64)
    height, width = img.shape
    padded = np.pad(img.astype(np.float64), 1, mode="edge")
    rows, cols = np.divmod(positions, width)
    neighborhood = np.stack([padded[rows + dr, cols + dc]
                             for dr in range(3) for dc in range(3)], axis=-1)
    return 1.0 / (1.0 + neighborhood.std(axis=-1))


def _syndromes(bits, columns):
    """Syndrome integer of each row of a (..., n) bit array."""
    selected = np.where(bits.astype(bool), columns, 0)
    return np.bitwise_xor.reduce(selected, axis=-1)


def _payload_targets(payload, m, blocks):
    """Split payload into m-bit MSB-first block targets, zero-padding the tail."""
    padded = np.zeros(blocks * m, dtype=np.int64)
    padded[:payload.size] = payload
    weights = 1 << np.arange(m - 1, -1, -1)
    return padded.reshape(blocks, m) @ weights


def _cost_to_go(weights, deltas, columns, m):
    """
    Backward DP tables.

    Args:
        weights: (B, n) flip weights
        deltas: (B,) syndrome each flip set has to produce
        columns: (n,) column values of H

    Returns:
        (n+1, B, 2^m) array; entry [j, b, s] is the cheapest cost of reaching
        deltas[b] from partial syndrome s using columns j..n-1
    """
    n = columns.size
    states = np.arange(1 << m)
    tables = np.empty((n + 1, deltas.size, 1 << m))
    tables[n] = np.where(states[None, :] == deltas[:, None], 0.0, np.inf)
    for j in range(n - 1, -1, -1):
        nxt = tables[j + 1]
        flipped = weights[:, j, None] + nxt[:, states ^ columns[j]]
        tables[j] = np.minimum(nxt, flipped)
    return tables


def _block_costs(weights, deltas, columns, m):
    n = columns.size
    states = np.arange(1 << m)
    cost = np.where(states[None, :] == deltas[:, None], 0.0, np.inf)
    for j in range(n - 1, -1, -1):
        cost = np.minimum(cost, weights[:, j, None] + cost[:, states ^ columns[j]])
    return cost[:, 0]


def _block_flips(weights, deltas, columns, m):
    """
    Minimum-cost flip sets, (B, n) bits.

    Walking forward, a column is left alone whenever that keeps the optimum,
    which yields the lexicographically smallest optimal flip vector.
    """
    tables = _cost_to_go(weights, deltas, columns, m)
    if not np.all(np.isfinite(tables[0, :, 0])):
        raise AssertionError("target syndrome unreachable with this check matrix")
    blocks = np.arange(deltas.size)
    state = np.zeros(deltas.size, dtype=np.int64)
    flips = np.zeros((deltas.size, columns.size), dtype=np.uint8)
    for j in range(columns.size):
        keep = tables[j, blocks, state] == tables[j + 1, blocks, state]
        flips[:, j] = ~keep
        state = np.where(keep, state, state ^ columns[j])
    return tables[0, :, 0], flips


def block_min_cost(c, w, t, check_matrix=None):
    """
    Cheapest flip set realizing syndrome t on one block.

    Args:
        c: n cover bits
        w: n flip weights
        t: m target bits, MSB-first
        check_matrix: m x n binary H (default: column j = j+1)

    Returns:
        (cost, tuple of flipped in-block indices)
    """
    c = as_bits(c)
    t = as_bits(t)
    if check_matrix is None:
        check_matrix = default_check_matrix(c.size, t.size)
    columns = check_matrix_columns(check_matrix)
    m = t.size
    target = int(_payload_targets(t, m, 1)[0])
    delta = np.array([target ^ int(_syndromes(c, columns))])
    costs, flips = _block_flips(np.asarray(w, dtype=np.float64)[None, :], delta, columns, m)
    return float(costs[0]), tuple(np.flatnonzero(flips[0]).tolist())


def _block_layout(img, cfg, payload_bits):
    blocks = cfg.blocks_for(payload_bits)
    needed = blocks * cfg.n
    if needed > img.size:
        raise PathError(f"insufficient pixels: {blocks} blocks need {needed} of {img.size}")
    positions = keyed_path(cfg.key, img.size, needed)
    cover_bits = (img.reshape(-1)[positions] & 1).reshape(blocks, cfg.n)
    weights = local_weights(img, positions).reshape(blocks, cfg.n)
    return positions, cover_bits, weights


def stc_total_cost(img, cfg, payload):
    """Sum of per-block minimum flip costs for carrying payload in img."""
    img = check_image(img)
    payload = as_bits(payload)
    positions, cover_bits, weights = _block_layout(img, cfg, payload.size)
    columns = cfg.columns
    blocks = cover_bits.shape[0]
    deltas = _payload_targets(payload, cfg.m, blocks) ^ _syndromes(cover_bits, columns)
    costs, flips = _block_flips(weights, deltas, columns, cfg.m)
    return StcOutcome(
        total_cost=float(costs.sum()),
        flips=positions.reshape(blocks, cfg.n)[flips.astype(bool)],
        block_costs=costs,
    )


def stc_shape_select(img, s, shaping_cfg, stc_cfg):
    """
    Pick the shaping index whose payload has the lowest total syndrome cost.

    K = 0 leaves one candidate, the unshaped message, which is the reference.
    """
    img = check_image(img)
    s = as_bits(s)
    payload_bits = s.size + shaping_cfg.k
    _, cover_bits, weights = _block_layout(img, stc_cfg, payload_bits)
    columns = stc_cfg.columns
    blocks = cover_bits.shape[0]
    cover_syndromes = _syndromes(cover_bits, columns)

    totals = np.empty(shaping_cfg.candidates)
    for start in range(0, shaping_cfg.candidates, _CANDIDATE_BATCH):
        stop = min(start + _CANDIDATE_BATCH, shaping_cfg.candidates)
        deltas = np.stack([
            _payload_targets(build_payload(h, s, shaping_cfg), stc_cfg.m, blocks) ^ cover_syndromes
            for h in range(start, stop)
        ])
        batch_weights = np.broadcast_to(weights, (stop - start, blocks, stc_cfg.n))
        costs = _block_costs(batch_weights.reshape(-1, stc_cfg.n), deltas.reshape(-1), columns, stc_cfg.m)
        totals[start:stop] = costs.reshape(stop - start, blocks).sum(axis=1)

    chosen = int(np.argmin(totals))
    outcome = stc_total_cost(img, stc_cfg, build_payload(chosen, s, shaping_cfg))
    outcome.chosen_h = chosen
    outcome.per_candidate = list(enumerate(totals.tolist()))
    logger.debug("syndrome shaping K=%d: chose h=%d, cost %.6g", shaping_cfg.k, chosen, outcome.total_cost)
    return outcome


def realize_payload(img, cfg, outcome, payload_bits):
    """
    Apply the outcome's flips to the selected LSBs and read the block
    syndromes back as payload bits.
    """
    img = check_image(img)
    positions, cover_bits, _ = _block_layout(img, cfg, payload_bits)
    flipped = np.isin(positions, outcome.flips).reshape(cover_bits.shape)
    syndromes = _syndromes(cover_bits ^ flipped, cfg.columns)
    shifts = np.arange(cfg.m - 1, -1, -1)
    bits = ((syndromes[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)
    return bits[:payload_bits]
