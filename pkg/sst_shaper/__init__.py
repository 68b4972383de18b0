"""
Reversible payload shaping for LSB and syndrome-cost steganographic embedders.
"""

__version__ = "0.1.0"

from .imaging import CoverModel, CoverParams, generate_cover, histogram, cooccurrence, read_pgm, write_pgm
from .lsb import embed_lsb, extract_lsb, sequential_path
from .metrics import DistanceReport, distance_report, kl_div, js_div, tv_dist, chi2_sym, cooc_l1, relative_gain
from .rng import RngState, keyed_path, mask_bits
from .shaping import (Objective, ShapingConfig, ShapingResult, bin_index, build_payload, decode_payload,
                      fair_baseline_payload, index_stat, shape_select)
from .stc import StcConfig, StcOutcome, block_min_cost, local_weights, stc_shape_select, stc_total_cost

__all__ = [
    "CoverModel", "CoverParams", "generate_cover", "histogram", "cooccurrence", "read_pgm", "write_pgm",
    "embed_lsb", "extract_lsb", "sequential_path",
    "DistanceReport", "distance_report", "kl_div", "js_div", "tv_dist", "chi2_sym", "cooc_l1", "relative_gain",
    "RngState", "keyed_path", "mask_bits",
    "Objective", "ShapingConfig", "ShapingResult", "bin_index", "build_payload", "decode_payload",
    "fair_baseline_payload", "index_stat", "shape_select",
    "StcConfig", "StcOutcome", "block_min_cost", "local_weights", "stc_shape_select", "stc_total_cost",
]
