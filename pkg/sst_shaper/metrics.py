"""
Distances between cover and stego intensity statistics.

All divergences are in bits. Histograms are turned into distributions with a
small additive pseudo-count so that logarithms stay defined; the same
pseudo-count is applied to the cover and to every candidate stego.
"""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import rel_entr

from .errors import DegenerateBaselineError, MetricError
from .imaging import cooccurrence, histogram

SMOOTHING_EPS = 1e-3
LN2 = np.log(2.0)

METRIC_NAMES = ("kl", "js", "tv", "chi2", "cooc_l1")


def smooth_normalize(counts, eps=SMOOTHING_EPS):
    """P(v) = (c_v + eps) / (sum(c) + 256 eps)."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.shape != (256,):
        raise MetricError(f"expected 256 bin counts, got shape {counts.shape}")
    if np.any(counts < 0):
        raise MetricError("bin counts must be non-negative")
    total = counts.sum()
    if total <= 0:
        raise MetricError("cannot normalize an all-zero histogram")
    return (counts + eps) / (total + 256 * eps)


def _check_dist(p):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise MetricError(f"expected a 1-D distribution, got shape {p.shape}")
    if np.any(p < 0):
        raise MetricError("probabilities must be non-negative")
    return p


def _check_pair(p, q):
    p, q = _check_dist(p), _check_dist(q)
    if p.shape != q.shape:
        raise MetricError(f"distribution sizes differ: {p.shape} vs {q.shape}")
    return p, q


def kl_div(p, q):
    """D_KL(p || q) = sum p log2(p / q); zero-probability bins of p contribute 0."""
    p, q = _check_pair(p, q)
    # rounding can leave a tiny negative sum for near-equal inputs
    return max(0.0, float(rel_entr(p, q).sum() / LN2))


def js_div(p, q):
    p, q = _check_pair(p, q)
    m = 0.5 * (p + q)
    return max(0.0, float(0.5 * (rel_entr(p, m).sum() + rel_entr(q, m).sum()) / LN2))


def tv_dist(p, q):
    p, q = _check_pair(p, q)
    return float(0.5 * np.abs(p - q).sum())


def chi2_sym(p, q):
    """Symmetric chi-square sum (p-q)^2 / (p+q), with 0/0 bins counted as 0."""
    p, q = _check_pair(p, q)
    total = p + q
    diff = np.square(p - q)
    terms = np.divide(diff, total, out=np.zeros_like(total), where=total > 0)
    return float(terms.sum())


def cooc_l1(a, b):
    """L1 distance between co-occurrence matrices after normalizing each to unit mass."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise MetricError(f"co-occurrence shapes differ: {a.shape} vs {b.shape}")
    total_a, total_b = a.sum(), b.sum()
    if total_a <= 0 or total_b <= 0:
        raise MetricError("co-occurrence matrix has zero total")
    return float(np.abs(a / total_a - b / total_b).sum())


def relative_gain(base, sst):
    """(base - sst) / base; negative when shaping did worse than the baseline."""
    if not base > 0:
        raise DegenerateBaselineError(f"degenerate baseline: {base}")
    return (base - sst) / base


@dataclass(frozen=True)
class DistanceReport:
    kl: float
    js: float
    tv: float
    chi2: float
    cooc_l1: float

    def as_dict(self):
        return asdict(self)


def distance_report(cover, stego, cover_dist=None, cover_cooc=None):
    """
    All five cover-vs-stego distances.

    cover_dist and cover_cooc may be passed in when the same cover is compared
    against many stegos.
    """
    if cover_dist is None:
        cover_dist = smooth_normalize(histogram(cover))
    if cover_cooc is None:
        cover_cooc = cooccurrence(cover)
    stego_dist = smooth_normalize(histogram(stego))
    return DistanceReport(
        kl=kl_div(cover_dist, stego_dist),
        js=js_div(cover_dist, stego_dist),
        tv=tv_dist(cover_dist, stego_dist),
        chi2=chi2_sym(cover_dist, stego_dist),
        cooc_l1=cooc_l1(cover_cooc, cooccurrence(stego)),
    )
