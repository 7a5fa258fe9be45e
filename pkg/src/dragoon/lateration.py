"""Pairwise circle intersection of landmark distance estimates into a point cloud."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from .errors import (
    AllPairsDegenerate,
    CoincidentCenters,
    OutOfProjectionRange,
    TooFewConstraints,
    ValidationError,
)
from .geo import (
    Circle,
    Contained,
    DisjointOutside,
    GeoPoint,
    OnePoint,
    Projection,
    TwoPoints,
    geodesic_midpoint,
    intersect_circles,
    orthodromic_distance,
)

CASE_TAGS = ("two-a", "two-b", "tangent", "gap-midpoint", "contained-center", "shrunk-tangent")
RESIDUAL_TIE_KM = 1e-6

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DistanceConstraint:
    landmark_id: str
    landmark: GeoPoint
    estimated_distance: float

    def __post_init__(self):
        if not self.estimated_distance > 0:
            raise ValidationError(
                f"estimated distance for {self.landmark_id} must be positive, got {self.estimated_distance}"
            )


@dataclass(frozen=True)
class CloudPoint:
    location: GeoPoint
    source_pair: tuple[str, str]
    case_tag: str


@dataclass(frozen=True)
class PointCloud:
    points: tuple[CloudPoint, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def locations(self) -> list[GeoPoint]:
        return [p.location for p in self.points]

    def to_geojson(self, extra_properties: dict | None = None) -> dict:
        return {"type": "FeatureCollection", "features": [cloud_feature(p, extra_properties) for p in self.points]}


def cloud_feature(p: CloudPoint, extra: dict | None = None) -> dict:
    props = {"case_tag": p.case_tag, "source_pair": list(p.source_pair)}
    if extra:
        props.update(extra)
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [p.location.lon, p.location.lat]},
        "properties": props,
    }


@dataclass(frozen=True)
class CasePolicy:
    """How non-intersecting pairs contribute to the cloud.

    By default separated circles give the midpoint of the gap and nested
    circles give the center of the inner one. With ``shrink_to_tangent``
    both cases instead give the touching point obtained by adjusting the
    larger radius.
    """

    shrink_to_tangent: bool = False


def _support_residual(pt: GeoPoint, others) -> float:
    return sum(abs(orthodromic_distance(pt, c.landmark) - c.estimated_distance) for c in others)


def multilaterate(constraints, policy: CasePolicy = CasePolicy()) -> PointCloud:
    """Intersect every landmark pair and keep the points chosen by ``policy``.

    Each pair is solved in an azimuthal-equidistant plane centered on the
    geodesic midpoint of its two landmarks. Where a pair yields two points,
    the one with the smaller summed radial misfit against the remaining
    constraints is kept; both are kept on a tie or with only two
    constraints.
    """
    constraints = list(constraints)
    if len(constraints) < 2:
        raise TooFewConstraints(f"need at least 2 distance constraints, got {len(constraints)}")
    ids = [c.landmark_id for c in constraints]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate landmark ids among constraints")

    out: list[CloudPoint] = []
    for i, j in itertools.combinations(range(len(constraints)), 2):
        a, b = constraints[i], constraints[j]
        pair = (a.landmark_id, b.landmark_id)
        proj = Projection(geodesic_midpoint(a.landmark, b.landmark))
        try:
            res = intersect_circles(
                Circle(proj.project(a.landmark), a.estimated_distance),
                Circle(proj.project(b.landmark), b.estimated_distance),
                shrink_to_tangent=policy.shrink_to_tangent,
            )
            kept = _resolve(res, proj, pair, a, b, [c for k, c in enumerate(constraints) if k not in (i, j)])
        except (CoincidentCenters, OutOfProjectionRange) as exc:
            log.debug("skipping pair %s: %s", pair, exc)
            continue
        out.extend(kept)
    if not out:
        raise AllPairsDegenerate("no landmark pair produced a cloud point")
    return PointCloud(tuple(out))


def _resolve(res, proj, pair, a, b, others) -> list[CloudPoint]:
    if isinstance(res, TwoPoints):
        cands = [
            CloudPoint(proj.unproject(res.p), pair, "two-a"),
            CloudPoint(proj.unproject(res.q), pair, "two-b"),
        ]
        if others:
            ra = _support_residual(cands[0].location, others)
            rb = _support_residual(cands[1].location, others)
            if abs(ra - rb) > RESIDUAL_TIE_KM:
                cands = [cands[0] if ra < rb else cands[1]]
        return cands
    if isinstance(res, OnePoint):
        return [CloudPoint(proj.unproject(res.p), pair, "shrunk-tangent" if res.shrunk else "tangent")]
    if isinstance(res, DisjointOutside):
        return [CloudPoint(proj.unproject(res.gap_midpoint), pair, "gap-midpoint")]
    if isinstance(res, Contained):
        inner = a if res.inner_circle_id == 1 else b
        return [CloudPoint(inner.landmark, pair, "contained-center")]
    raise TypeError(f"unexpected intersection result {res!r}")
