import math

import numpy as np
import pytest

from sst_shaper.errors import DegenerateBaselineError, MetricError
from sst_shaper.metrics import (chi2_sym, cooc_l1, distance_report, js_div, kl_div, relative_gain,
                                smooth_normalize, tv_dist)


def random_pairs(rng, count, size=256):
    for _ in range(count):
        yield rng.dirichlet(np.ones(size)), rng.dirichlet(np.ones(size))


def test_smooth_normalize_uniform():
    p = smooth_normalize(np.full(256, 10))
    assert np.allclose(p, 1 / 256)


def test_smooth_normalize_single_bin():
    counts = np.zeros(256)
    counts[0] = 500
    p = smooth_normalize(counts)
    assert p[0] < 1.0
    assert (p > 0).all()
    assert abs(p.sum() - 1.0) < 1e-12


def test_smooth_normalize_hand_value():
    counts = np.zeros(256)
    counts[:2] = 1
    p = smooth_normalize(counts)
    assert p[0] == pytest.approx(1.001 / 2.256, rel=1e-12)
    assert p[1] == p[0]


def test_smooth_normalize_rejects_empty():
    with pytest.raises(MetricError):
        smooth_normalize(np.zeros(256))
    with pytest.raises(MetricError):
        smooth_normalize(np.ones(10))


def test_kl_hand_value_and_asymmetry():
    p = np.array([0.5, 0.5])
    q = np.array([0.25, 0.75])
    assert kl_div(p, q) == pytest.approx(0.5 + 0.5 * math.log2(2 / 3), abs=1e-12)
    assert kl_div(p, q) == pytest.approx(0.20752, abs=1e-5)
    assert kl_div(q, p) != pytest.approx(kl_div(p, q), abs=1e-3)


def test_disjoint_distributions():
    p = np.array([1.0, 0.0])
    q = np.array([0.0, 1.0])
    assert tv_dist(p, q) == pytest.approx(1.0)
    assert js_div(p, q) == pytest.approx(1.0)
    assert chi2_sym(p, q) == pytest.approx(2.0)


def test_chi2_empty_bins_count_zero():
    p = np.array([0.5, 0.5, 0.0])
    assert chi2_sym(p, p) == 0.0


def test_identity(np_rng):
    for p, _ in random_pairs(np_rng, 50):
        assert kl_div(p, p) < 1e-12
        assert js_div(p, p) < 1e-12
        assert tv_dist(p, p) == 0.0
        assert chi2_sym(p, p) == 0.0


def test_axioms_on_random_pairs(np_rng):
    for p, q in random_pairs(np_rng, 100):
        assert kl_div(p, q) > 0
        assert 0 < js_div(p, q) <= 1
        assert 0 < tv_dist(p, q) <= 1
        assert chi2_sym(p, q) > 0
        assert js_div(p, q) == pytest.approx(js_div(q, p), rel=1e-12)
        assert tv_dist(p, q) == pytest.approx(tv_dist(q, p), rel=1e-12)
        assert chi2_sym(p, q) == pytest.approx(chi2_sym(q, p), rel=1e-12)


def test_pinsker(np_rng):
    for p, q in random_pairs(np_rng, 1000):
        assert tv_dist(p, q) <= math.sqrt(kl_div(p, q) * math.log(2) / 2) + 1e-12


def test_mismatched_sizes():
    with pytest.raises(MetricError):
        kl_div(np.ones(3) / 3, np.ones(4) / 4)


def test_cooc_l1():
    a = np.zeros((256, 256))
    b = np.zeros((256, 256))
    a[0, 0] = 10
    b[1, 1] = 3
    assert cooc_l1(a, a) == 0.0
    assert cooc_l1(a, b) == pytest.approx(2.0)
    assert cooc_l1(b, a) == cooc_l1(a, b)
    with pytest.raises(MetricError):
        cooc_l1(a, np.zeros((256, 256)))


def test_relative_gain():
    assert relative_gain(0.3, 0.3) == 0.0
    assert relative_gain(0.008954637, 0.004340269) == pytest.approx(0.5153, abs=1e-4)
    assert relative_gain(1.0, 1.5) == -0.5


@pytest.mark.parametrize("base", [0.0, -1.0])
def test_degenerate_baseline(base):
    with pytest.raises(DegenerateBaselineError, match="degenerate baseline"):
        relative_gain(base, 0.1)
    with pytest.raises(ValueError):
        relative_gain(base, 0.1)


def test_distance_report(smooth_cover):
    same = distance_report(smooth_cover, smooth_cover)
    assert all(value == pytest.approx(0.0, abs=1e-12) for value in same.as_dict().values())

    stego = smooth_cover ^ 1
    report = distance_report(smooth_cover, stego)
    assert set(report.as_dict()) == {"kl", "js", "tv", "chi2", "cooc_l1"}
    assert report.kl > 0 and report.js > 0 and report.tv > 0 and report.chi2 > 0 and report.cooc_l1 > 0
