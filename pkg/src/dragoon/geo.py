"""Geodetic primitives: points, great-circle distance, a local azimuthal
equidistant plane, and planar circle intersection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import CoincidentCenters, OutOfProjectionRange, ValidationError

EARTH_RADIUS_KM = 6371.0088
PROJECTION_LIMIT_KM = 5000.0
INTERSECTION_TOL_KM = 1e-6
COINCIDENT_TOL_KM = 1e-9


def _normalize_lon(lon: float) -> float:
    if -180.0 <= lon < 180.0:
        return float(lon)
    return (lon + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 coordinate in degrees. Longitude is normalized to [-180, 180)."""

    lat: float
    lon: float

    def __post_init__(self):
        lat, lon = float(self.lat), float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise ValidationError(f"non-finite coordinate ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise ValidationError(f"latitude {lat} outside [-90, 90]")
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", _normalize_lon(lon))


@dataclass(frozen=True)
class PlanarPoint:
    x: float
    y: float

    def __sub__(self, other: "PlanarPoint") -> "PlanarPoint":
        return PlanarPoint(self.x - other.x, self.y - other.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class Circle:
    center: PlanarPoint
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError(f"circle radius must be positive, got {self.radius}")


def orthodromic_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on the mean-radius sphere (haversine form)."""
    p1, p2 = math.radians(a.lat), math.radians(b.lat)
    dp = p2 - p1
    dl = math.radians(b.lon - a.lon)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(1.0, h)))


def geodesic_midpoint(a: GeoPoint, b: GeoPoint) -> GeoPoint:
    """Midpoint of the great-circle arc between ``a`` and ``b``."""
    va, vb = _to_vec(a), _to_vec(b)
    m = va + vb
    norm = np.linalg.norm(m)
    if norm < 1e-12:
        # antipodal: every great circle through a works, pick any
        return a
    return _from_vec(m / norm)


def spherical_centroid(points) -> GeoPoint:
    """Normalized mean of unit vectors; safe across the antimeridian."""
    v = np.sum([_to_vec(p) for p in points], axis=0)
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        return points[0]
    return _from_vec(v / norm)


def _to_vec(p: GeoPoint) -> np.ndarray:
    lat, lon = math.radians(p.lat), math.radians(p.lon)
    return np.array([math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)])


def _from_vec(v) -> GeoPoint:
    x, y, z = v
    return GeoPoint(math.degrees(math.atan2(z, math.hypot(x, y))), math.degrees(math.atan2(y, x)))


@dataclass(frozen=True)
class Projection:
    """Spherical azimuthal-equidistant projection about ``origin``.

    Planar distance from the origin equals the great-circle distance. Points
    are accepted up to ``PROJECTION_LIMIT_KM`` away.
    """

    origin: GeoPoint
    mode: str = "azimuthal-equidistant"

    def project(self, g: GeoPoint) -> PlanarPoint:
        rho = orthodromic_distance(self.origin, g)
        if rho >= PROJECTION_LIMIT_KM:
            raise OutOfProjectionRange(f"{g} is {rho:.1f} km from projection origin")
        if rho == 0.0:
            return PlanarPoint(0.0, 0.0)
        p0, p = math.radians(self.origin.lat), math.radians(g.lat)
        dl = math.radians(g.lon - self.origin.lon)
        az = math.atan2(
            math.sin(dl) * math.cos(p),
            math.cos(p0) * math.sin(p) - math.sin(p0) * math.cos(p) * math.cos(dl),
        )
        return PlanarPoint(rho * math.sin(az), rho * math.cos(az))

    def unproject(self, pt: PlanarPoint) -> GeoPoint:
        rho = math.hypot(pt.x, pt.y)
        if rho >= PROJECTION_LIMIT_KM:
            raise OutOfProjectionRange(f"planar point at {rho:.1f} km from origin")
        if rho == 0.0:
            return self.origin
        c = rho / EARTH_RADIUS_KM
        az = math.atan2(pt.x, pt.y)
        p0, l0 = math.radians(self.origin.lat), math.radians(self.origin.lon)
        sin_lat = math.sin(p0) * math.cos(c) + math.cos(p0) * math.sin(c) * math.cos(az)
        lat = math.asin(max(-1.0, min(1.0, sin_lat)))
        lon = l0 + math.atan2(
            math.sin(az) * math.sin(c) * math.cos(p0),
            math.cos(c) - math.sin(p0) * sin_lat,
        )
        return GeoPoint(math.degrees(lat), math.degrees(lon))


def project(p: Projection, g: GeoPoint) -> PlanarPoint:
    return p.project(g)


def unproject(p: Projection, pt: PlanarPoint) -> GeoPoint:
    return p.unproject(pt)


# -- circle intersection ---------------------------------------------------

@dataclass(frozen=True)
class TwoPoints:
    p: PlanarPoint
    q: PlanarPoint


@dataclass(frozen=True)
class OnePoint:
    p: PlanarPoint
    shrunk: bool = False


@dataclass(frozen=True)
class DisjointOutside:
    gap_midpoint: PlanarPoint


@dataclass(frozen=True)
class Contained:
    inner_circle_id: int  # 1 or 2
    inner_center: PlanarPoint


IntersectionResult = Union[TwoPoints, OnePoint, DisjointOutside, Contained]


def intersect_circles(c1: Circle, c2: Circle, shrink_to_tangent: bool = False) -> IntersectionResult:
    """Intersect two planar circles via the radical line.

    With ``shrink_to_tangent`` the larger radius is moved to the nearest
    tangency radius whenever the circles do not meet, and a single
    ``OnePoint(shrunk=True)`` is returned instead of ``Contained`` or
    ``DisjointOutside``.

    Raises:
        CoincidentCenters: centers closer than ``COINCIDENT_TOL_KM``.
    """
    dx = c2.center.x - c1.center.x
    dy = c2.center.y - c1.center.y
    dist = math.hypot(dx, dy)
    if dist < COINCIDENT_TOL_KM:
        raise CoincidentCenters("circle centers coincide")
    ux, uy = dx / dist, dy / dist
    r1, r2 = c1.radius, c2.radius

    def along(a: float) -> PlanarPoint:
        return PlanarPoint(c1.center.x + a * ux, c1.center.y + a * uy)

    if abs(dist - (r1 + r2)) <= INTERSECTION_TOL_KM:
        return OnePoint(along(r1))
    if abs(dist - abs(r1 - r2)) <= INTERSECTION_TOL_KM:
        return OnePoint(along(r1 if r1 >= r2 else -r1))

    if dist > r1 + r2:
        if shrink_to_tangent:
            # tangency radius of the larger circle is dist - r_small
            return OnePoint(along(r1 if r1 < r2 else dist - r2), shrunk=True)
        return DisjointOutside(along(0.5 * (r1 + dist - r2)))

    if dist < abs(r1 - r2):
        inner = 2 if r2 < r1 else 1
        if shrink_to_tangent:
            # internal tangency: the large circle touches the far side of the small one
            return OnePoint(along(dist + r2 if inner == 2 else -r1), shrunk=True)
        return Contained(inner, c2.center if inner == 2 else c1.center)

    a = (r1 * r1 - r2 * r2 + dist * dist) / (2.0 * dist)
    h = math.sqrt(max(r1 * r1 - a * a, 0.0))
    base = along(a)
    return TwoPoints(
        PlanarPoint(base.x - h * uy, base.y + h * ux),
        PlanarPoint(base.x + h * uy, base.y - h * ux),
    )


def intersect_circles_quadratic(c1: Circle, c2: Circle, tol: float = 1e-6) -> list[PlanarPoint]:
    """Intersections from the closed form quadratic in ``y' = y - y1``.

    Solves ``y'^2 - (a+b)d/(c^2+d^2) y' - r1^2 - ((a+b)/(2c))^2 = 0`` with
    ``a = x1^2+y1^2-r1^2-x2^2-y2^2+r2^2``, ``b = -2(x1-x2)x1 - 2(y1-y2)y1``,
    ``c = x1-x2``, ``d = y1-y2``; each y root yields up to two x values from
    circle 1, and only candidates lying on both circles (within ``tol``
    relative to the radius) are returned.

    This is a cross-check only. The constant term disagrees with the
    radical-line derivation except when ``a + b == 0`` and ``d == 0``, so
    :func:`intersect_circles` is the solver used by the pipeline.
    """
    x1, y1, r1 = c1.center.x, c1.center.y, c1.radius
    x2, y2, r2 = c2.center.x, c2.center.y, c2.radius
    a = x1**2 + y1**2 - r1**2 - x2**2 - y2**2 + r2**2
    b = -2.0 * (x1 - x2) * x1 - 2.0 * (y1 - y2) * y1
    c = x1 - x2
    d = y1 - y2
    if abs(c) < COINCIDENT_TOL_KM:
        return []
    lin = -(a + b) * d / (c * c + d * d)
    const = -(r1**2) - ((a + b) / (2.0 * c)) ** 2
    disc = lin * lin - 4.0 * const
    if disc < 0:
        return []
    roots = {(-lin + s * math.sqrt(disc)) / 2.0 for s in (1.0, -1.0)}
    found: list[PlanarPoint] = []
    for yp in sorted(roots):
        rem = r1 * r1 - yp * yp
        if rem < 0:
            continue
        for xp in sorted({math.sqrt(rem), -math.sqrt(rem)}):
            cand = PlanarPoint(x1 + xp, y1 + yp)
            ok1 = abs(math.hypot(cand.x - x1, cand.y - y1) - r1) <= tol * r1
            ok2 = abs(math.hypot(cand.x - x2, cand.y - y2) - r2) <= tol * r2
            if ok1 and ok2 and cand not in found:
                found.append(cand)
    return found


def circle_residual(pt: PlanarPoint, circle: Circle) -> float:
    """Relative radial misfit ``| |pt - center| - r | / r``."""
    return abs(math.hypot(pt.x - circle.center.x, pt.y - circle.center.y) - circle.radius) / circle.radius
