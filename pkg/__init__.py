from .stego_shaping_nodes import (
    SyntheticCoverNode,
    ShapedLsbEmbedNode,
    ShapedLsbExtractNode,
)
from .stego_report_node import StegoDistanceReportNode


NODE_CLASS_MAPPINGS = {
    "SyntheticCover": SyntheticCoverNode,
    "ShapedLsbEmbed": ShapedLsbEmbedNode,
    "ShapedLsbExtract": ShapedLsbExtractNode,
    "StegoDistanceReport": StegoDistanceReportNode,
}

NODE_DISPLAY_NAME_MAPPINGS = {
    "SyntheticCover": "Synthetic Cover",
    "ShapedLsbEmbed": "Shaped LSB Embed",
    "ShapedLsbExtract": "Shaped LSB Extract",
    "StegoDistanceReport": "Stego Distance Report",
}

__all__ = ["NODE_CLASS_MAPPINGS", "NODE_DISPLAY_NAME_MAPPINGS"]
