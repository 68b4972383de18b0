"""
Exception hierarchy for the payload shaping library.

Every error is also a ValueError so callers that only know the builtin
still catch them; the CLI maps the classes to exit codes.
"""


class SSTError(Exception):
    """Base class for all library errors."""


class ConfigError(SSTError, ValueError):
    """Invalid or inconsistent configuration."""


class ImageFormatError(SSTError, ValueError):
    """Malformed or unsupported image data."""


class PathError(SSTError, ValueError):
    """Embedding path does not fit the cover or the payload."""


class ShapingError(SSTError, ValueError):
    """Bad shaping index, overhead or payload."""


class MetricError(SSTError, ValueError):
    """Distribution or count table unusable for a distance."""


class DegenerateBaselineError(SSTError, ValueError):
    """Relative gain requested against a non-positive baseline."""
