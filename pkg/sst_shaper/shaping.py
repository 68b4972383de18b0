"""
Reversible payload shaping in front of a fixed embedder.

A shaping overhead of K index bits defines 2^K equivalent payloads
z(h) = bin_K(h) || (s XOR r_h). The encoder embeds every candidate, scores the
resulting stego against an objective and keeps the minimizer; the decoder reads
h back from the first K bits and removes the mask.

With K = 0 the family holds a single member, the unmasked message, which is
exactly the fair baseline payload.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, PathError, ShapingError
from .imaging import check_image, histogram
from .lsb import as_bits, check_path, embed_lsb
from .metrics import kl_div, smooth_normalize
from .rng import MASK64, mask_bits

logger = logging.getLogger(__name__)

MAX_INDEX_BITS = 24


class Objective(str, Enum):
    KL_HISTOGRAM = "kl_histogram"
    SYNDROME_COST = "syndrome_cost"


@dataclass(frozen=True)
class ShapingConfig:
    k: int
    session_seed: int = 0
    objective: Objective = Objective.KL_HISTOGRAM

    def __post_init__(self):
        if not 0 <= self.k <= MAX_INDEX_BITS:
            raise ShapingError(f"shaping overhead K must be in [0, {MAX_INDEX_BITS}], got {self.k}")
        if not 0 <= self.session_seed <= MASK64:
            raise ConfigError(f"session seed must fit in 64 bits, got {self.session_seed}")
        object.__setattr__(self, "objective", Objective(self.objective))

    @property
    def candidates(self):
        return 1 << self.k


@dataclass
class ShapingResult:
    chosen_h: int
    payload: np.ndarray
    stego: np.ndarray
    objective_value: float
    per_candidate: list = field(default_factory=list)


@dataclass(frozen=True)
class IndexStat:
    mean_normalized_h: float
    largest_bucket_share: float


def _check_index(h, k):
    if not 0 <= h < (1 << k):
        raise ShapingError(f"shaping index {h} out of range for K={k}")


def bin_index(h, k):
    """K-bit representation of h, most significant bit first."""
    _check_index(h, k)
    if k == 0:
        return np.zeros(0, dtype=np.uint8)
    return np.array([(h >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)


def build_payload(h, s, cfg):
    """Candidate payload bin_K(h) || (s XOR r_h); with K = 0 the message itself."""
    s = as_bits(s)
    _check_index(h, cfg.k)
    if cfg.k == 0:
        return s.copy()
    masked = s ^ mask_bits(cfg.session_seed, h, s.size)
    return np.concatenate([bin_index(h, cfg.k), masked])


def fair_baseline_payload(s, k):
    """K zero bits followed by the unshaped message."""
    s = as_bits(s)
    return np.concatenate([np.zeros(k, dtype=np.uint8), s])


def decode_payload(z, k, session_seed):
    """
    Invert build_payload.

    Returns:
        (h, s) with h read MSB-first from the first K bits
    """
    z = as_bits(z)
    if z.size < k:
        raise ShapingError(f"payload of {z.size} bits is shorter than the {k} index bits")
    if k == 0:
        return 0, z.copy()
    h = 0
    for bit in z[:k].tolist():
        h = (h << 1) | bit
    body = z[k:]
    return h, body ^ mask_bits(session_seed, h, body.size)


def kl_histogram_objective(cover):
    """Objective scoring a stego by D_KL(P || Q_h) against the cover histogram."""
    cover_dist = smooth_normalize(histogram(cover))

    def objective(stego):
        counts = np.bincount(stego.reshape(-1), minlength=256)
        return kl_div(cover_dist, smooth_normalize(counts))

    return objective


def shape_select(cover, s, cfg, path, objective_fn=None, embedder=embed_lsb):
    """
    Exhaustive candidate search over h in [0, 2^K).

    Args:
        cover: uint8 cover image
        s: message bits
        cfg: ShapingConfig
        path: flat pixel positions, at least N+K long, shared by every candidate
        objective_fn: stego -> float, lower is better; defaults to the KL
            histogram objective for cfg.objective == KL_HISTOGRAM
        embedder: (cover, payload, path, validate) -> stego

    Returns:
        ShapingResult of the smallest-h minimizer
    """
    cover = check_image(cover)
    s = as_bits(s)
    path = check_path(path, cover.size)
    if path.size < s.size + cfg.k:
        raise PathError(f"path of {path.size} positions cannot carry {s.size + cfg.k} bits")
    if objective_fn is None:
        if cfg.objective is not Objective.KL_HISTOGRAM:
            raise ConfigError(f"objective {cfg.objective.value} needs an explicit objective function")
        objective_fn = kl_histogram_objective(cover)

    values = np.empty(cfg.candidates, dtype=np.float64)
    for h in range(cfg.candidates):
        stego = embedder(cover, build_payload(h, s, cfg), path, validate=False)
        values[h] = objective_fn(stego)

    # argmin returns the first minimizer, i.e. the smallest h
    chosen = int(np.argmin(values))
    payload = build_payload(chosen, s, cfg)
    logger.debug("K=%d: chose h=%d of %d candidates, objective %.6g",
                 cfg.k, chosen, cfg.candidates, values[chosen])
    return ShapingResult(
        chosen_h=chosen,
        payload=payload,
        stego=embedder(cover, payload, path, validate=False),
        objective_value=float(values[chosen]),
        per_candidate=list(enumerate(values.tolist())),
    )


def index_stat(results, k):
    """
    Dispersion of the selected shaping index over a set of runs.

    Args:
        results: objects with a chosen_h attribute (ShapingResult, run records)
        k: shaping overhead the runs used, >= 1

    Returns:
        IndexStat(mean of h / (2^K - 1), largest share of runs choosing one h)
    """
    if k < 1:
        raise ShapingError("index statistics need K >= 1")
    chosen = np.array([r.chosen_h for r in results], dtype=np.int64)
    if chosen.size == 0:
        raise ShapingError("index statistics need at least one run")
    if chosen.min() < 0 or chosen.max() >= (1 << k):
        raise ShapingError(f"chosen index out of range for K={k}")
    counts = np.bincount(chosen, minlength=1 << k)
    return IndexStat(
        mean_normalized_h=float(np.mean(chosen / ((1 << k) - 1))),
        largest_bucket_share=float(counts.max() / chosen.size),
    )
