"""Collapse an intersection cloud to one location.

A pattern search over a local square grid minimizes the mean great-circle
distance to the cloud, halving the grid spacing whenever none of the eight
surrounding grid points improves. Outliers are trimmed in rounds around the
current center before the final search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import EmptyCloud, OutOfProjectionRange, TooFewPoints, ValidationError
from .geo import EARTH_RADIUS_KM, GeoPoint, PlanarPoint, Projection, spherical_centroid
from .lateration import CloudPoint, PointCloud, cloud_feature

# E, NE, N, NW, W, SW, S, SE; earlier entries win ties
NEIGHBOR_OFFSETS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
MAX_STEPS = 100_000


@dataclass(frozen=True)
class GridSearchConfig:
    epsilon_initial: float | None = None  # None: quarter of the cloud bbox diagonal, at least 1 km
    epsilon_min: float = 0.1

    def __post_init__(self):
        if not self.epsilon_min > 0:
            raise ValidationError("epsilon_min must be positive")
        if self.epsilon_initial is not None and self.epsilon_initial < self.epsilon_min:
            raise ValidationError("epsilon_initial must be >= epsilon_min")


@dataclass(frozen=True)
class FilterConfig:
    drop_fraction: float = 0.1
    rounds: int = 3
    min_points: int = 4

    def __post_init__(self):
        if not 0 < self.drop_fraction < 0.5:
            raise ValidationError("drop_fraction must lie in (0, 0.5)")
        if self.rounds < 0 or self.min_points < 1:
            raise ValidationError("rounds must be >= 0 and min_points >= 1")


@dataclass(frozen=True)
class GridResult:
    point: GeoPoint
    objective: float
    history: tuple[float, ...]  # objective after every accepted move
    moves: int
    halvings: int


@dataclass(frozen=True)
class FilterRound:
    center: GeoPoint
    objective: float  # mean distance from center to the round's input cloud
    survivor_objective: float  # mean distance from center to the points kept
    dropped: tuple[CloudPoint, ...]


@dataclass(frozen=True)
class LocationEstimate:
    point: GeoPoint
    cloud_initial: PointCloud
    cloud_final: PointCloud
    mean_residual_km: float
    trace: tuple[FilterRound, ...] = field(default_factory=tuple)

    def to_geojson(self, properties: dict | None = None) -> dict:
        """Estimate point first, then every initial cloud point flagged ``kept``."""
        props = {
            "role": "estimate",
            "mean_residual_km": self.mean_residual_km,
            "n_initial": len(self.cloud_initial),
            "n_final": len(self.cloud_final),
            "trace": [
                {
                    "round": i,
                    "center": [r.center.lon, r.center.lat],
                    "objective_km": r.objective,
                    "survivor_objective_km": r.survivor_objective,
                    "dropped": [[p.location.lon, p.location.lat] for p in r.dropped],
                }
                for i, r in enumerate(self.trace)
            ],
        }
        if properties:
            props.update(properties)
        kept = set(self.cloud_final.points)
        feats = [
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [self.point.lon, self.point.lat]},
                "properties": props,
            }
        ]
        base = {k: properties[k] for k in ("target",) if properties and k in properties}
        for p in self.cloud_initial:
            feats.append(cloud_feature(p, {"role": "cloud", "kept": p in kept, **base}))
        return {"type": "FeatureCollection", "features": feats}


def _arrays(points):
    lats = np.ascontiguousarray([p.lat for p in points], dtype=np.float64)
    lons = np.ascontiguousarray([p.lon for p in points], dtype=np.float64)
    return lats, lons


def _mean_distance(pt: GeoPoint, lats, lons) -> float:
    return kernels.gc_mean_distance(pt.lat, pt.lon, lats, lons, EARTH_RADIUS_KM)


def _default_epsilon(start: GeoPoint, points) -> float:
    proj = Projection(start)
    try:
        xy = np.array([[q.x, q.y] for q in map(proj.project, points)])
        diag = float(np.hypot(*(xy.max(axis=0) - xy.min(axis=0))))
    except OutOfProjectionRange:
        diag = 2.0 * max(kernels.gc_distances(start.lat, start.lon, *_arrays(points), EARTH_RADIUS_KM))
    return max(1.0, diag / 4.0)


def grid_search(points, cfg: GridSearchConfig = GridSearchConfig(), start: GeoPoint | None = None) -> GridResult:
    """Local grid descent on the mean distance to ``points`` (GeoPoints).

    Starts at ``start`` or the spherical centroid; grid offsets are laid out
    in an azimuthal-equidistant plane centered on the current point.
    """
    points = list(points)
    if not points:
        raise EmptyCloud("cannot center an empty cloud")
    lats, lons = _arrays(points)
    cur = start if start is not None else spherical_centroid(points)
    eps = cfg.epsilon_initial if cfg.epsilon_initial is not None else _default_epsilon(cur, points)
    eps = max(eps, cfg.epsilon_min)
    best = _mean_distance(cur, lats, lons)
    history = [best]
    moves = halvings = 0
    while eps >= cfg.epsilon_min and moves < MAX_STEPS:
        proj = Projection(cur)
        step_pt, step_val = None, best
        for dx, dy in NEIGHBOR_OFFSETS:
            cand = proj.unproject(PlanarPoint(dx * eps, dy * eps))
            val = _mean_distance(cand, lats, lons)
            if val < step_val:
                step_pt, step_val = cand, val
        if step_pt is None:
            eps /= 2.0
            halvings += 1
        else:
            cur, best = step_pt, step_val
            history.append(best)
            moves += 1
    return GridResult(cur, best, tuple(history), moves, halvings)


def grid_center(cloud, cfg: GridSearchConfig = GridSearchConfig()) -> GeoPoint:
    return grid_search(_locations(cloud), cfg).point


def _locations(cloud):
    if isinstance(cloud, PointCloud):
        return cloud.locations
    return [p.location if isinstance(p, CloudPoint) else p for p in cloud]


def _best_start(points, previous: GeoPoint | None) -> GeoPoint:
    centroid = spherical_centroid(points)
    if previous is None:
        return centroid
    lats, lons = _arrays(points)
    if _mean_distance(previous, lats, lons) < _mean_distance(centroid, lats, lons):
        return previous
    return centroid


def filter_outliers(cloud: PointCloud, fcfg: FilterConfig = FilterConfig(), gcfg: GridSearchConfig = GridSearchConfig()):
    """Trim the points farthest from the grid center, round by round.

    Each round drops ``ceil(drop_fraction * size)`` points but never goes
    below ``min_points``. From the second round on the search starts from
    the previous center when that is better than the centroid, so the
    objective over surviving points never goes up.

    Returns:
        ``(filtered_cloud, trace)`` where ``trace`` is a tuple of FilterRound.
    """
    if len(cloud) < fcfg.min_points:
        raise TooFewPoints(f"cloud has {len(cloud)} points, filtering needs {fcfg.min_points}")
    current = list(cloud.points)
    trace = []
    center = None
    for _ in range(fcfg.rounds):
        n_drop = min(math.ceil(fcfg.drop_fraction * len(current)), len(current) - fcfg.min_points)
        if n_drop <= 0:
            break
        locs = [p.location for p in current]
        res = grid_search(locs, gcfg, _best_start(locs, center))
        center = res.point
        dist = kernels.gc_distances(center.lat, center.lon, *_arrays(locs), EARTH_RADIUS_KM)
        # farthest first; equal distances drop the earlier cloud point
        order = sorted(range(len(current)), key=lambda i: (-dist[i], i))
        drop = set(order[:n_drop])
        kept = [p for i, p in enumerate(current) if i not in drop]
        survivor_obj = float(np.mean([d for i, d in enumerate(dist) if i not in drop]))
        trace.append(FilterRound(center, res.objective, survivor_obj, tuple(current[i] for i in sorted(drop))))
        current = kept
    return PointCloud(tuple(current)), tuple(trace)


def estimate(cloud: PointCloud, fcfg: FilterConfig = FilterConfig(), gcfg: GridSearchConfig = GridSearchConfig()) -> LocationEstimate:
    if len(cloud) == 0:
        raise EmptyCloud("cannot estimate from an empty cloud")
    if len(cloud) >= fcfg.min_points:
        final, trace = filter_outliers(cloud, fcfg, gcfg)
    else:
        final, trace = cloud, ()
    locs = final.locations
    previous = trace[-1].center if trace else None
    res = grid_search(locs, gcfg, _best_start(locs, previous))
    return LocationEstimate(res.point, cloud, final, res.objective, trace)
