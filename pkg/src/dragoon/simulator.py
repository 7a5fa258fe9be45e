"""Seeded synthetic RTT measurements over a topology.

One-way delay on a path is a deterministic part (propagation along every
edge, a fixed processing time per hop, and a constant last-mile extra) plus
a non-negative random excess per probe, drawn from an exponential
distribution. A probe's RTT is twice the deterministic part plus the
excess, so the minimum over many probes approaches the deterministic floor.
"""

from __future__ import annotations

import itertools
import math
import zlib
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import NoPath, ValidationError
from .geo import GeoPoint, PlanarPoint, Projection, orthodromic_distance
from .ingest import MeasurementSample
from .topology import Node, Topology

SPEED_OF_LIGHT_KM_MS = 299.792458


@dataclass(frozen=True)
class DelayModel:
    propagation_speed: float = 200.0  # km/ms
    per_hop_processing: float = 0.1  # ms
    last_mile_extra: float = 2.0  # ms, one way
    mean_extra_per_sample: float = 1.0  # ms, mean of the random excess per probe
    seed: int = 0
    path_factor: float = 1.0  # multiplies edge lengths to emulate road routing

    def __post_init__(self):
        if not 133.0 <= self.propagation_speed <= 300.0:
            raise ValidationError("propagation_speed must lie in [133, 300] km/ms")
        if min(self.per_hop_processing, self.last_mile_extra, self.mean_extra_per_sample) < 0:
            raise ValidationError("delays must be non-negative")
        if self.path_factor < 1.0:
            raise ValidationError("path_factor must be >= 1")


@dataclass(frozen=True)
class SyntheticTarget:
    target_id: str
    attachment_node: str
    true_location: GeoPoint
    extra_hops: int = 2

    def __post_init__(self):
        if self.extra_hops < 0:
            raise ValidationError("extra_hops must be non-negative")


def hop_path(t: Topology, src: str, dst: str) -> list[str]:
    """Hop-shortest path; BFS visits neighbors in id order, so it is deterministic."""
    s, d = t.index(src), t.index(dst)
    parent = {s: None}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        if u == d:
            break
        for w in t.neighbors(u):
            if w not in parent:
                parent[w] = u
                queue.append(w)
    if d not in parent:
        raise NoPath(f"no path from {src} to {dst}")
    path = []
    cur = d
    while cur is not None:
        path.append(t.nodes[cur].id)
        cur = parent[cur]
    return path[::-1]


def deterministic_delay(t: Topology, model: DelayModel, src: str, tgt: SyntheticTarget) -> tuple[float, int]:
    """One-way deterministic delay (ms) and total hop count."""
    path = hop_path(t, src, tgt.attachment_node)
    length = sum(orthodromic_distance(t.location(a), t.location(b)) for a, b in zip(path, path[1:]))
    length += orthodromic_distance(t.location(tgt.attachment_node), tgt.true_location)
    hops = len(path) - 1 + tgt.extra_hops
    delay = (
        length * model.path_factor / model.propagation_speed
        + hops * model.per_hop_processing
        + model.last_mile_extra
    )
    return delay, hops


def _stream(seed: int, *key) -> np.random.Generator:
    words = tuple(k if isinstance(k, int) else zlib.crc32(str(k).encode()) for k in key)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=words))


def simulate_rtt(t: Topology, model: DelayModel, src: str, tgt: SyntheticTarget, samples: int,
                 rng: np.random.Generator | None = None) -> MeasurementSample:
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    det, hops = deterministic_delay(t, model, src, tgt)
    if rng is None:
        rng = _stream(model.seed, src, tgt.target_id)
    if model.mean_extra_per_sample > 0:
        extra = rng.exponential(model.mean_extra_per_sample, size=samples)
    else:
        extra = np.zeros(samples)
    rtts = tuple(float(2.0 * det + e) for e in extra)
    return MeasurementSample(src, tgt.target_id, rtts, hops)


def simulate_campaign(t: Topology, model: DelayModel, landmarks, tgt: SyntheticTarget, samples: int) -> list[MeasurementSample]:
    """Probe ``tgt`` from every landmark; landmark ``i`` draws from its own substream."""
    ids = getattr(landmarks, "landmark_node_ids", landmarks)
    return [
        simulate_rtt(t, model, lm, tgt, samples, _stream(model.seed, i, tgt.target_id))
        for i, lm in enumerate(ids)
    ]


def landmark_as_target(t: Topology, node_id: str) -> SyntheticTarget:
    return SyntheticTarget(node_id, node_id, t.location(node_id), extra_hops=0)


def simulate_calibration(t: Topology, model: DelayModel, landmarks, samples: int) -> list[MeasurementSample]:
    """Inter-landmark measurements, one per unordered landmark pair."""
    ids = list(getattr(landmarks, "landmark_node_ids", landmarks))
    return [
        simulate_rtt(t, model, a, landmark_as_target(t, b), samples, _stream(model.seed, "cal", i, j))
        for (i, a), (j, b) in itertools.combinations(enumerate(ids), 2)
    ]


def random_targets(t: Topology, count: int, seed: int, max_offset_km: float = 50.0,
                   extra_hops: int = 2) -> list[SyntheticTarget]:
    """Targets attached to random nodes, displaced up to ``max_offset_km``."""
    rng = _stream(seed, "targets")
    out = []
    for k in range(count):
        node = t.nodes[int(rng.integers(len(t)))]
        bearing = rng.uniform(0, 2 * math.pi)
        dist = max_offset_km * math.sqrt(rng.uniform())
        out.append(SyntheticTarget(f"T{k + 1}", node.id, _offset(node.location, dist, bearing), extra_hops))
    return out


def _offset(p: GeoPoint, dist_km: float, bearing: float) -> GeoPoint:
    return Projection(p).unproject(PlanarPoint(dist_km * math.sin(bearing), dist_km * math.cos(bearing)))


def synthetic_topology(n: int = 30, seed: int = 0, lat_range=(36.0, 60.0), lon_range=(-10.0, 30.0),
                       min_separation_km: float = 60.0) -> Topology:
    """Random nodes in a lat/lon box joined by their Gabriel graph.

    An edge (u, v) exists when no third node lies inside the circle with
    diameter u-v. The Gabriel graph contains the minimum spanning tree, so
    the result is connected.
    """
    rng = _stream(seed, "topology")
    pts: list[GeoPoint] = []
    guard = 0
    while len(pts) < n:
        guard += 1
        if guard > 1000 * n:
            raise ValidationError("cannot place nodes with the requested separation")
        # uniform on the sphere patch
        z = rng.uniform(math.sin(math.radians(lat_range[0])), math.sin(math.radians(lat_range[1])))
        cand = GeoPoint(math.degrees(math.asin(z)), rng.uniform(*lon_range))
        if all(orthodromic_distance(cand, q) >= min_separation_km for q in pts):
            pts.append(cand)
    d = np.array([[orthodromic_distance(a, b) for b in pts] for a in pts])
    sq = d * d
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            others = np.delete(np.arange(n), [i, j])
            if not np.any(sq[i, others] + sq[j, others] < sq[i, j]):
                edges.append((str(i), str(j)))
    nodes = tuple(Node(str(i), f"N{i}", p) for i, p in enumerate(pts))
    return Topology(nodes, tuple(edges))
