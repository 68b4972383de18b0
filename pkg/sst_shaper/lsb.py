"""
The fixed embedder: LSB substitution along a pixel path, and extraction.

The embedder only sees (cover, payload, path), so any payload shaping in
front of it stays independent of how bits are written.
"""

import numpy as np

from .errors import PathError, ShapingError
from .imaging import check_image


def as_bits(bits):
    """Coerce a sequence of 0/1 values to a uint8 bit vector."""
    bits = np.asarray(bits)
    if bits.ndim != 1:
        raise ShapingError(f"bit vector must be 1-D, got shape {bits.shape}")
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ShapingError("bit vector values must be 0 or 1")
    out = bits.astype(np.uint8)
    if not np.array_equal(bits, out):
        raise ShapingError("bit vector values must be 0 or 1")
    return out


def sequential_path(length, pixel_count):
    """Row-major indices 0..length-1, i.e. the first `length` pixels."""
    if length > pixel_count:
        raise PathError(f"path longer than cover: {length} > {pixel_count}")
    return np.arange(length, dtype=np.int64)


def check_path(path, pixel_count):
    path = np.asarray(path, dtype=np.int64)
    if path.ndim != 1:
        raise PathError(f"path must be 1-D, got shape {path.shape}")
    if path.size > pixel_count:
        raise PathError(f"path longer than cover: {path.size} > {pixel_count}")
    if path.size:
        if path.min() < 0 or path.max() >= pixel_count:
            raise PathError("path position outside the cover")
        if np.unique(path).size != path.size:
            raise PathError("path positions must be distinct")
    return path


def embed_lsb(cover, payload, path, validate=True):
    """
    Write payload[i] into the LSB of the pixel at path[i].

    Args:
        cover: uint8 image, left untouched
        payload: bit vector, no longer than path
        path: distinct flat pixel indices
        validate: skip input checks when the caller already ran them

    Returns:
        New stego image; pixels off the first len(payload) path positions are copied as is
    """
    if validate:
        cover = check_image(cover)
        payload = as_bits(payload)
        path = check_path(path, cover.size)
    if payload.size > path.size:
        raise PathError(f"payload longer than path: {payload.size} > {path.size}")
    stego = cover.copy()
    flat = stego.reshape(-1)
    positions = path[:payload.size]
    flat[positions] = (flat[positions] & 0xFE) | payload
    return stego


def extract_lsb(stego, length, path):
    """Read `length` bits from the LSBs along path."""
    stego = check_image(stego)
    path = check_path(path, stego.size)
    if length < 0 or length > path.size:
        raise PathError(f"cannot extract {length} bits from a path of {path.size}")
    return (stego.reshape(-1)[path[:length]] & 1).astype(np.uint8)
