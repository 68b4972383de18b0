"""
Cover images: synthetic cover models, binary PGM I/O and raw pixel statistics.

An image is a uint8 numpy array of shape (height, width). Pixel order
everywhere in the package is row-major, so flat index = row * width + column.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import cv2
import numpy as np

from .errors import ConfigError, ImageFormatError
from .rng import f64_block, u64_block

logger = logging.getLogger(__name__)


class CoverModel(str, Enum):
    UNIFORM = "uniform"
    SMOOTH = "smooth"
    GRADIENT = "gradient"
    BIMODAL = "bimodal"


@dataclass(frozen=True)
class CoverParams:
    blur_passes: int = 3
    gradient_sigma: float = 16.0
    bimodal_means: tuple = (80, 176)
    bimodal_sigma: float = 12.0

    def __post_init__(self):
        if self.blur_passes < 0:
            raise ConfigError(f"blur_passes must be >= 0, got {self.blur_passes}")
        if self.gradient_sigma < 0 or self.bimodal_sigma < 0:
            raise ConfigError("noise sigmas must be non-negative")
        if len(self.bimodal_means) != 2:
            raise ConfigError(f"bimodal_means needs two values, got {self.bimodal_means}")


DEFAULT_COVER_PARAMS = CoverParams()


def check_image(img):
    """Validate the image representation and return it as a uint8 array."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ImageFormatError(f"expected a 2-D grayscale image, got shape {img.shape}")
    if img.dtype != np.uint8:
        if img.size and (img.min() < 0 or img.max() > 255):
            raise ImageFormatError("pixel values must lie in [0, 255]")
        pixels = img.astype(np.uint8)
        if not np.array_equal(img, pixels):
            raise ImageFormatError("pixel values must be integers")
        img = pixels
    return img


def _round_half_up(values):
    return np.floor(values + 0.5)


def _to_pixels(values):
    return np.clip(_round_half_up(values), 0, 255).astype(np.uint8)


def _standard_normals(draws):
    # Box-Muller, cosine branch only; u1 is mapped into (0, 1]
    u1 = 1.0 - draws[:, 0]
    u2 = draws[:, 1]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _uniform_cover(width, height, st):
    values, _ = u64_block(st, width * height)
    return (values % np.uint64(256)).astype(np.uint8).reshape(height, width)


def _smooth_cover(width, height, st, params):
    img = _uniform_cover(width, height, st).astype(np.float64)
    for _ in range(params.blur_passes):
        blurred = cv2.blur(img, (3, 3), borderType=cv2.BORDER_REPLICATE)
        img = np.clip(_round_half_up(blurred), 0, 255)
    return img.astype(np.uint8)


def _gradient_cover(width, height, st, params):
    ramp = _round_half_up(255.0 * np.arange(width) / (width - 1))
    draws, _ = f64_block(st, 2 * width * height)
    noise = _standard_normals(draws.reshape(-1, 2)).reshape(height, width)
    return np.clip(ramp[None, :] + _round_half_up(noise * params.gradient_sigma), 0, 255).astype(np.uint8)


def _bimodal_cover(width, height, st, params):
    draws, _ = f64_block(st, 3 * width * height)
    draws = draws.reshape(-1, 3)
    low, high = params.bimodal_means
    means = np.where(draws[:, 0] < 0.5, float(low), float(high))
    values = means + params.bimodal_sigma * _standard_normals(draws[:, 1:])
    return _to_pixels(values).reshape(height, width)


def generate_cover(model, width, height, st, params=DEFAULT_COVER_PARAMS):
    """
    Generate a synthetic grayscale cover.

    Args:
        model: CoverModel (or its string value)
        width, height: image size, both >= 2
        st: RngState driving every random draw
        params: CoverParams constants for the structured models

    Returns:
        uint8 array of shape (height, width)
    """
    model = CoverModel(model)
    if width < 2 or height < 2:
        raise ConfigError(f"cover must be at least 2x2, got {width}x{height}")
    if model is CoverModel.UNIFORM:
        return _uniform_cover(width, height, st)
    if model is CoverModel.SMOOTH:
        return _smooth_cover(width, height, st, params)
    if model is CoverModel.GRADIENT:
        return _gradient_cover(width, height, st, params)
    return _bimodal_cover(width, height, st, params)


def histogram(img):
    """256-bin intensity counts."""
    img = check_image(img)
    return np.bincount(img.ravel(), minlength=256).astype(np.int64)


def cooccurrence(img):
    """256x256 counts of horizontally adjacent pixel pairs (left, right)."""
    img = check_image(img)
    if img.shape[1] < 2:
        raise ImageFormatError(f"co-occurrence needs width >= 2, got {img.shape[1]}")
    left = img[:, :-1].ravel().astype(np.int64)
    right = img[:, 1:].ravel().astype(np.int64)
    counts = np.bincount(left * 256 + right, minlength=256 * 256)
    return counts.reshape(256, 256)


_PGM_HEADER = re.compile(rb"\A(P5)((?:\s+|#[^\n]*\n)+)")
_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\d+)")


def read_pgm(data):
    """
    Parse a binary (P5) 8-bit PGM.

    Header tokens may be separated by any whitespace and comments; exactly one
    whitespace byte separates maxval from the raster.
    """
    data = bytes(data)
    if not _PGM_HEADER.match(data):
        raise ImageFormatError("not a binary PGM (missing P5 magic)")
    pos = 2
    tokens = []
    for _ in range(3):
        match = _PGM_TOKEN.match(data, pos)
        if match is None:
            raise ImageFormatError("malformed PGM header")
        tokens.append(int(match.group(1)))
        pos = match.end()
    width, height, maxval = tokens
    if maxval != 255:
        raise ImageFormatError(f"only maxval 255 is supported, got {maxval}")
    if width < 1 or height < 1:
        raise ImageFormatError(f"invalid PGM size {width}x{height}")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ImageFormatError("malformed PGM header")
    pos += 1
    raster = data[pos:]
    if len(raster) < width * height:
        raise ImageFormatError(f"truncated PGM payload: {len(raster)} of {width * height} bytes")
    if len(raster) > width * height:
        raise ImageFormatError("trailing bytes after PGM payload")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(img):
    """Serialize to the canonical P5 form "P5\\n<w> <h>\\n255\\n" + raster."""
    img = check_image(img)
    height, width = img.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(img).tobytes()


def load_pgm(path):
    return read_pgm(Path(path).read_bytes())


def save_pgm(path, img):
    Path(path).write_bytes(write_pgm(img))
    logger.debug("wrote %s", path)
