import json

from .sst_shaper.metrics import distance_report
from .stego_shaping_nodes import image_to_gray


class StegoDistanceReportNode:
    """
    Compare a stego image with its cover: KL, JS, TV and symmetric chi-square
    on the smoothed intensity histograms, plus the L1 distance between
    horizontal co-occurrence matrices.
    """

    @classmethod
    def INPUT_TYPES(s):
        return {
            "required": {
                "COVER": ("IMAGE",),
                "STEGO": ("IMAGE",),
            },
        }

    RETURN_NAMES = ("REPORT", "KL")
    RETURN_TYPES = ("STRING", "FLOAT")
    FUNCTION = "report"
    CATEGORY = "sst-stego"

    def report(self, COVER, STEGO):
        cover = image_to_gray(COVER)
        stego = image_to_gray(STEGO)
        if cover.shape != stego.shape:
            raise ValueError(f"cover {cover.shape} and stego {stego.shape} sizes differ")
        distances = distance_report(cover, stego)
        return (json.dumps(distances.as_dict(), indent=4), distances.kl)


NODE_CLASS_MAPPINGS = {
    "StegoDistanceReport": StegoDistanceReportNode,
}

NODE_DISPLAY_NAME_MAPPINGS = {
    "StegoDistanceReport": "Stego Distance Report",
}
