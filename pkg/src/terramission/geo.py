"""WGS84 <-> local East-North-Up conversion.

Uses an equirectangular tangent-plane approximation anchored at a mission
origin. Valid for mission-scale extents; a warning is emitted beyond 10 km
from the origin. Altitudes are meters above the origin's datum (no geoid or
ellipsoid height conversion).
"""

import math
import warnings
from dataclasses import dataclass

from .errors import InputError

# WGS84 semi-major axis; flattening ignored (sub-centimeter at mission scale).
EARTH_RADIUS_M = 6378137.0

# Meters of arc per degree along a great circle of radius EARTH_RADIUS_M.
METERS_PER_DEGREE = EARTH_RADIUS_M * math.pi / 180.0

# Beyond this horizontal distance the flat-earth approximation degrades.
VALIDITY_RADIUS_M = 10_000.0


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 geodetic position; alt is meters above the mission datum."""

    lat: float
    lon: float
    alt: float = 0.0

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0):
            raise InputError(f"latitude {self.lat} outside [-90, 90]")
        if not (-180.0 < self.lon <= 180.0):
            raise InputError(f"longitude {self.lon} outside (-180, 180]")
        if not math.isfinite(self.alt):
            raise InputError(f"altitude {self.alt} is not finite")


@dataclass(frozen=True)
class LocalPoint:
    """Metric coordinates in the local tangent frame: x east, y north, z up."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"local coordinate {name} is not finite")

    def as_tuple(self):
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Origin:
    """Anchor of the local frame; fixed for the lifetime of a mission."""

    anchor: GeoPoint

    @property
    def cos_lat(self):
        return math.cos(math.radians(self.anchor.lat))


def to_local(origin: Origin, p: GeoPoint) -> LocalPoint:
    """Project a geodetic point into the origin's East-North-Up frame."""
    a = origin.anchor
    x = (p.lon - a.lon) * origin.cos_lat * METERS_PER_DEGREE
    y = (p.lat - a.lat) * METERS_PER_DEGREE
    z = p.alt - a.alt
    if math.hypot(x, y) > VALIDITY_RADIUS_M:
        warnings.warn(
            f"point {math.hypot(x, y) / 1000:.1f} km from origin exceeds the "
            f"{VALIDITY_RADIUS_M / 1000:.0f} km validity radius of the "
            "tangent-plane approximation",
            stacklevel=2,
        )
    return LocalPoint(x, y, z)


def to_wgs84(origin: Origin, p: LocalPoint) -> GeoPoint:
    """Exact inverse of :func:`to_local`."""
    a = origin.anchor
    lon = a.lon + p.x / (origin.cos_lat * METERS_PER_DEGREE)
    lat = a.lat + p.y / METERS_PER_DEGREE
    alt = a.alt + p.z
    return GeoPoint(lat, lon, alt)
