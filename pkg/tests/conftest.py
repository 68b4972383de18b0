import numpy as np
import pytest

from sst_shaper.imaging import CoverModel, generate_cover
from sst_shaper.rng import RngState, random_bits


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def smooth_cover():
    return generate_cover(CoverModel.SMOOTH, 32, 32, RngState(11))


@pytest.fixture
def cover_100():
    return generate_cover(CoverModel.UNIFORM, 100, 100, RngState(5))


def make_message(n, seed=1):
    bits, _ = random_bits(RngState(seed), n)
    return bits


@pytest.fixture
def message():
    return make_message
