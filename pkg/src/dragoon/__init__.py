"""Landmark placement and latency-based IP geolocation."""

__version__ = "0.1.0"

from .geo import GeoPoint, orthodromic_distance  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = ["GeoPoint", "orthodromic_distance", "BACKEND", "__version__"]
