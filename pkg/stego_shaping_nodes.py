"""
Nodes for shaped LSB embedding inside ComfyUI.

Provides three nodes:
1. SyntheticCoverNode - Generate one of the synthetic grayscale cover models
2. ShapedLsbEmbedNode - Shape a bit message and embed it with the LSB rule
3. ShapedLsbExtractNode - Read the payload back and undo the shaping mask
"""

import json

import cv2
import numpy as np
import torch

from .sst_shaper.imaging import CoverModel, generate_cover
from .sst_shaper.lsb import extract_lsb, sequential_path
from .sst_shaper.rng import RngState, keyed_path
from .sst_shaper.shaping import ShapingConfig, decode_payload, shape_select

try:
    from comfy.utils import ProgressBar
except ImportError:
    ProgressBar = None

SEED_MAX = 0xFFFFFFFFFFFFFFFF


def image_to_gray(image):
    """
    First image of a ComfyUI IMAGE batch as a uint8 grayscale array.

    Args:
        image: torch tensor (B, H, W, C) with values in [0, 1]

    Returns:
        uint8 array of shape (H, W)
    """
    pixels = np.rint(image[0].cpu().numpy() * 255.0).clip(0, 255).astype(np.uint8)
    if pixels.ndim == 3 and pixels.shape[2] == 1:
        return pixels[:, :, 0]
    if pixels.ndim == 3:
        return cv2.cvtColor(pixels[:, :, :3], cv2.COLOR_RGB2GRAY)
    return pixels


def gray_to_image(gray):
    """uint8 (H, W) array to a one-image IMAGE batch with three equal channels."""
    rgb = np.repeat(gray[:, :, None], 3, axis=2).astype(np.float32) / 255
    return torch.from_numpy(rgb[None, ...])


def parse_bits(text):
    bits = "".join(text.split())
    if set(bits) - {"0", "1"}:
        raise ValueError("message may only contain the characters 0 and 1")
    return np.array([int(b) for b in bits], dtype=np.uint8)


def embedding_path(path_mode, path_key, length, pixel_count):
    if path_mode == "keyed":
        return keyed_path(path_key, pixel_count, length)
    return sequential_path(length, pixel_count)


class SyntheticCoverNode:
    @classmethod
    def INPUT_TYPES(s):
        return {
            "required": {
                "model": ([m.value for m in CoverModel], {"default": "smooth"}),
                "width": ("INT", {"default": 100, "min": 2, "max": 8192}),
                "height": ("INT", {"default": 100, "min": 2, "max": 8192}),
                "seed": ("INT", {"default": 0, "min": 0, "max": SEED_MAX}),
            },
        }

    RETURN_NAMES = ("COVER",)
    RETURN_TYPES = ("IMAGE",)
    FUNCTION = "generate"
    CATEGORY = "sst-stego"

    def generate(self, model, width, height, seed):
        return (gray_to_image(generate_cover(model, width, height, RngState(seed))),)


class ShapedLsbEmbedNode:
    """
    Try all 2^K masked versions of the message and keep the one whose stego
    histogram is closest to the cover histogram in KL divergence.
    """

    @classmethod
    def INPUT_TYPES(s):
        return {
            "required": {
                "COVER": ("IMAGE",),
                "message_bits": ("STRING", {"multiline": True, "default": "",
                                            "tooltip": "Message as a string of 0 and 1 characters"}),
                "shaping_bits": ("INT", {"default": 8, "min": 0, "max": 16,
                                         "tooltip": "K index bits; 2^K candidate payloads are tried"}),
                "session_seed": ("INT", {"default": 0, "min": 0, "max": SEED_MAX,
                                         "tooltip": "Seed the decoder needs to regenerate the masks"}),
            },
            "optional": {
                "path_mode": (["sequential", "keyed"], {"default": "sequential"}),
                "path_key": ("INT", {"default": 0, "min": 0, "max": SEED_MAX,
                                     "tooltip": "Key of the embedding path when path_mode is keyed"}),
            },
        }

    RETURN_NAMES = ("STEGO", "CHOSEN_INDEX", "REPORT")
    RETURN_TYPES = ("IMAGE", "INT", "STRING")
    FUNCTION = "embed"
    CATEGORY = "sst-stego"

    def embed(self, COVER, message_bits, shaping_bits, session_seed, path_mode="sequential", path_key=0):
        """
        Args:
            COVER: cover image batch; only the first image is used
            message_bits: bit string to hide
            shaping_bits: shaping overhead K
            session_seed: mask seed
            path_mode: "sequential" or "keyed"
            path_key: key for keyed paths

        Returns:
            Stego image, chosen shaping index and a JSON report of all candidates
        """
        cover = image_to_gray(COVER)
        message = parse_bits(message_bits)
        cfg = ShapingConfig(k=shaping_bits, session_seed=session_seed)
        path = embedding_path(path_mode, path_key, message.size + shaping_bits, cover.size)

        pbar = ProgressBar(1) if ProgressBar is not None else None
        result = shape_select(cover, message, cfg, path)
        if pbar is not None:
            pbar.update(1)

        report = {
            "chosen_h": result.chosen_h,
            "kl": result.objective_value,
            "payload_bits": int(result.payload.size),
            "candidates": [{"h": h, "kl": value} for h, value in result.per_candidate],
        }
        return (gray_to_image(result.stego), result.chosen_h, json.dumps(report, indent=4))


class ShapedLsbExtractNode:
    @classmethod
    def INPUT_TYPES(s):
        return {
            "required": {
                "STEGO": ("IMAGE",),
                "message_length": ("INT", {"default": 1000, "min": 0, "max": 1 << 26}),
                "shaping_bits": ("INT", {"default": 8, "min": 0, "max": 16}),
                "session_seed": ("INT", {"default": 0, "min": 0, "max": SEED_MAX}),
            },
            "optional": {
                "path_mode": (["sequential", "keyed"], {"default": "sequential"}),
                "path_key": ("INT", {"default": 0, "min": 0, "max": SEED_MAX}),
            },
        }

    RETURN_NAMES = ("MESSAGE_BITS", "CHOSEN_INDEX")
    RETURN_TYPES = ("STRING", "INT")
    FUNCTION = "extract"
    CATEGORY = "sst-stego"

    def extract(self, STEGO, message_length, shaping_bits, session_seed, path_mode="sequential", path_key=0):
        stego = image_to_gray(STEGO)
        length = message_length + shaping_bits
        path = embedding_path(path_mode, path_key, length, stego.size)
        h, message = decode_payload(extract_lsb(stego, length, path), shaping_bits, session_seed)
        return ("".join(str(b) for b in message.tolist()), h)


# Node class mappings for ComfyUI
NODE_CLASS_MAPPINGS = {
    "SyntheticCover": SyntheticCoverNode,
    "ShapedLsbEmbed": ShapedLsbEmbedNode,
    "ShapedLsbExtract": ShapedLsbExtractNode,
}

NODE_DISPLAY_NAME_MAPPINGS = {
    "SyntheticCover": "Synthetic Cover",
    "ShapedLsbEmbed": "Shaped LSB Embed",
    "ShapedLsbExtract": "Shaped LSB Extract",
}
