"""Landmark placement on a topology by hop distance.

Two strategies are provided: farthest-first traversal (the classic
2-approximation for graph k-center) and the refined placement, which seeds
farthest-first from the graph 1-center and then walks every landmark to
better neighboring nodes until no single move improves ``(max_hops,
mean_hops)`` lexicographically.

All ties are broken by lowest node id, so results are deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import KTooLarge, ParseError, UnknownNode, ValidationError
from .geo import GeoPoint
from .topology import HopMatrix, Topology

log = logging.getLogger(__name__)

LANDMARKS_SCHEMA = "landmarks/1"


@dataclass(frozen=True)
class LandmarkSet:
    landmark_node_ids: tuple[str, ...]
    locations: tuple[GeoPoint, ...]
    assignment: dict = field(default_factory=dict)
    max_hops: float = float("nan")
    mean_hops: float = float("nan")
    algorithm: str = ""
    passes: int = 0
    moves: int = 0

    def __len__(self):
        return len(self.landmark_node_ids)

    @property
    def objective(self) -> tuple[float, float]:
        return (self.max_hops, self.mean_hops)

    def location(self, node_id: str) -> GeoPoint:
        return self.locations[self.landmark_node_ids.index(node_id)]

    def to_json(self) -> dict:
        return {
            "schema": LANDMARKS_SCHEMA,
            "algorithm": self.algorithm,
            "landmarks": [
                {"node_id": nid, "lat": loc.lat, "lon": loc.lon, "order": i}
                for i, (nid, loc) in enumerate(zip(self.landmark_node_ids, self.locations))
            ],
            "objective": {"max_hops": self.max_hops, "mean_hops": self.mean_hops},
            "assignment": dict(self.assignment),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LandmarkSet":
        if not isinstance(doc, dict) or doc.get("schema") != LANDMARKS_SCHEMA:
            raise ParseError(f"expected schema {LANDMARKS_SCHEMA!r}")
        try:
            recs = sorted(doc["landmarks"], key=lambda r: r["order"])
            obj = doc.get("objective", {})
            return cls(
                tuple(str(r["node_id"]) for r in recs),
                tuple(GeoPoint(r["lat"], r["lon"]) for r in recs),
                dict(doc.get("assignment", {})),
                float(obj.get("max_hops", "nan")),
                float(obj.get("mean_hops", "nan")),
                str(doc.get("algorithm", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed landmark document: {exc}") from exc


class _Component:
    """Largest connected component re-indexed locally (id order preserved)."""

    def __init__(self, t: Topology, h: HopMatrix):
        comps = t.components()
        if len(comps) > 1:
            log.warning(
                "placement restricted to the largest component (%d of %d nodes)",
                len(comps[0]), len(t),
            )
        self.t = t
        self.members = comps[0]
        self.local = {g: i for i, g in enumerate(self.members)}
        self.hops = np.ascontiguousarray(h.hops[np.ix_(self.members, self.members)], dtype=np.float64)
        self.neighbors = [
            tuple(self.local[w] for w in t.neighbors(g)) for g in self.members
        ]

    def __len__(self):
        return len(self.members)

    def node_id(self, i: int) -> str:
        return self.t.nodes[self.members[i]].id

    def local_index(self, node_id: str) -> int:
        g = self.t.index(node_id)
        if g not in self.local:
            raise UnknownNode(f"node {node_id!r} is outside the largest connected component")
        return self.local[g]

    def cost(self, landmarks) -> tuple[float, float]:
        return kernels.kcenter_cost(self.hops, np.asarray(landmarks, dtype=np.int64))

    def build(self, landmarks, algorithm, passes=0, moves=0) -> LandmarkSet:
        arr = np.asarray(landmarks, dtype=np.int64)
        owner, dist = kernels.assign_nearest(self.hops, arr)
        ids = tuple(self.node_id(i) for i in landmarks)
        assignment = {self.node_id(v): ids[owner[v]] for v in range(len(self))}
        return LandmarkSet(
            ids,
            tuple(self.t.nodes[self.members[i]].location for i in landmarks),
            assignment,
            float(dist.max()),
            float(dist.mean()),
            algorithm,
            passes,
            moves,
        )


def _orientation_local(comp: _Component) -> int:
    worst = comp.hops.max(axis=1)
    total = comp.hops.sum(axis=1)
    # lexsort: last key is primary
    return int(np.lexsort((np.arange(len(comp)), total, worst))[0])


def orientation_mark(t: Topology, h: HopMatrix) -> str:
    """Graph 1-center by hops: minimize the maximum hop distance, then the mean."""
    comp = _Component(t, h)
    return comp.node_id(_orientation_local(comp))


def _check_k(comp: _Component, k: int) -> None:
    if k < 1:
        raise ValidationError(f"k must be at least 1, got {k}")
    if k > len(comp):
        raise KTooLarge(f"k={k} exceeds the {len(comp)} nodes available")


def _farthest_first(comp: _Component, k: int, seed: int | None, existing=()) -> list[int]:
    placed = list(existing)
    if not placed:
        placed.append(int(np.argmax(comp.hops[seed])))
    while len(placed) < k:
        nearest = comp.hops[:, placed].min(axis=1)
        nearest[placed] = -1.0
        placed.append(int(np.argmax(nearest)))
    return placed


def _refine(comp: _Component, landmarks: list[int], movable) -> tuple[list[int], int, int]:
    current = list(landmarks)
    cost = comp.cost(current)
    passes = moves = 0
    while True:
        passes += 1
        moved = False
        for i, pos in enumerate(list(current)):
            if not movable[i]:
                continue
            occupied = set(current)
            best, best_cost = None, cost
            for nb in comp.neighbors[pos]:
                if nb in occupied:
                    continue
                trial = current.copy()
                trial[i] = nb
                c = comp.cost(trial)
                if c < best_cost:
                    best, best_cost = nb, c
            if best is not None:
                current[i] = best
                cost = best_cost
                moves += 1
                moved = True
        if not moved:
            return current, passes, moves


def two_approx(t: Topology, h: HopMatrix, k: int, seed_node: str) -> LandmarkSet:
    """Farthest-first traversal starting from the node farthest from ``seed_node``."""
    comp = _Component(t, h)
    _check_k(comp, k)
    placed = _farthest_first(comp, k, comp.local_index(seed_node))
    return comp.build(placed, "2approx")


def dragoon_place(t: Topology, h: HopMatrix, k: int) -> LandmarkSet:
    comp = _Component(t, h)
    _check_k(comp, k)
    init = _farthest_first(comp, k, _orientation_local(comp))
    final, passes, moves = _refine(comp, init, [True] * k)
    log.debug("refinement: %d passes, %d moves", passes, moves)
    return comp.build(final, "dragoon", passes, moves)


def extend_landmarks(t: Topology, h: HopMatrix, existing, extra: int) -> LandmarkSet:
    """Add ``extra`` landmarks to ``existing`` (a LandmarkSet or id list).

    Existing landmarks stay fixed; new ones are placed farthest-first and
    then refined.
    """
    ids = existing.landmark_node_ids if isinstance(existing, LandmarkSet) else tuple(existing)
    comp = _Component(t, h)
    fixed = [comp.local_index(n) for n in ids]
    if len(set(fixed)) != len(fixed):
        raise ValidationError("existing landmarks are not distinct")
    if extra < 0:
        raise ValidationError("extra must be non-negative")
    if extra == 0:
        return comp.build(fixed, "extend")
    _check_k(comp, len(fixed) + extra)
    placed = _farthest_first(comp, len(fixed) + extra, _orientation_local(comp), fixed)
    movable = [False] * len(fixed) + [True] * extra
    final, passes, moves = _refine(comp, placed, movable)
    return comp.build(final, "extend", passes, moves)
