"""Geographically annotated network graphs and hop-count distances."""

from __future__ import annotations

import json
import logging
import re
import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    DisconnectedGraphWarning,
    MissingCoordinates,
    ParseError,
    UnknownNode,
    ValidationError,
)
from .geo import GeoPoint

log = logging.getLogger(__name__)

TOPOLOGY_SCHEMA = "topology/1"


def node_sort_key(node_id: str):
    """Numeric ids sort numerically and before any non-numeric id."""
    if re.fullmatch(r"-?\d+", node_id):
        return (0, int(node_id), node_id)
    return (1, 0, node_id)


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    location: GeoPoint


@dataclass(frozen=True)
class Topology:
    """Undirected graph. Nodes are stored in canonical id order, so "lowest
    node id" and "lowest node index" coincide everywhere downstream."""

    nodes: tuple[Node, ...]
    edges: tuple[tuple[str, str], ...]
    _index: dict = field(default=None, repr=False, compare=False)
    _adj: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes, key=lambda n: node_sort_key(n.id)))
        index = {}
        for i, n in enumerate(nodes):
            if n.id in index:
                raise ValidationError(f"duplicate node id {n.id!r}")
            index[n.id] = i
        canon = set()
        for a, b in self.edges:
            if a not in index or b not in index:
                raise ValidationError(f"edge ({a}, {b}) references an unknown node")
            if a == b:
                raise ValidationError(f"self-loop on node {a!r}")
            ia, ib = index[a], index[b]
            canon.add((a, b) if ia < ib else (b, a))
        edges = tuple(sorted(canon, key=lambda e: (index[e[0]], index[e[1]])))
        adj = [[] for _ in nodes]
        for a, b in edges:
            adj[index[a]].append(index[b])
            adj[index[b]].append(index[a])
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    def __len__(self):
        return len(self.nodes)

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def index(self, node_id: str) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise UnknownNode(f"unknown node id {node_id!r}") from None

    def location(self, node_id: str) -> GeoPoint:
        return self.nodes[self.index(node_id)].location

    def neighbors(self, i: int) -> tuple[int, ...]:
        """Neighbor indices of node index ``i`` in ascending order."""
        return self._adj[i]

    def csr(self):
        indptr = np.zeros(len(self.nodes) + 1, dtype=np.int64)
        for i, nb in enumerate(self._adj):
            indptr[i + 1] = indptr[i] + len(nb)
        indices = np.fromiter((j for nb in self._adj for j in nb), dtype=np.int64, count=int(indptr[-1]))
        return indptr, indices

    def components(self) -> list[list[int]]:
        """Connected components as sorted index lists, largest first
        (ties: the component holding the lowest index first)."""
        seen = [False] * len(self.nodes)
        comps = []
        for s in range(len(self.nodes)):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in self._adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        comps.sort(key=lambda c: (-len(c), c[0]))
        return comps

    def to_json(self) -> dict:
        return {
            "schema": TOPOLOGY_SCHEMA,
            "nodes": [
                {"id": n.id, "label": n.label, "lat": n.location.lat, "lon": n.location.lon}
                for n in self.nodes
            ],
            "edges": [[a, b] for a, b in self.edges],
        }


@dataclass(frozen=True)
class HopMatrix:
    """All-pairs unweighted shortest-path hop counts; ``inf`` marks unreachable pairs."""

    node_ids: tuple[str, ...]
    hops: np.ndarray

    def __call__(self, a: str, b: str) -> float:
        idx = {n: i for i, n in enumerate(self.node_ids)}
        return float(self.hops[idx[a], idx[b]])


def hop_distances(t: Topology) -> HopMatrix:
    indptr, indices = t.csr()
    hops = kernels.bfs_hops(indptr, indices, len(t))
    hops.setflags(write=False)
    return HopMatrix(tuple(t.node_ids), hops)


def _warn_if_disconnected(t: Topology) -> None:
    comps = t.components()
    if len(comps) > 1:
        sizes = [len(c) for c in comps]
        log.warning("topology has %d components (sizes %s)", len(comps), sizes)
        warnings.warn(DisconnectedGraphWarning(sizes), stacklevel=3)


def load_topology(path, format: str | None = None) -> Topology:
    """Load a topology from GraphML or the native JSON format.

    ``format`` defaults to the file suffix. A disconnected graph loads with a
    :class:`DisconnectedGraphWarning`.
    """
    path = Path(path)
    if format is None:
        format = "graphml" if path.suffix.lower() in (".graphml", ".xml") else "json"
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if format == "graphml":
        t = parse_graphml(text)
    elif format == "json":
        t = parse_topology_json(text)
    else:
        raise ValidationError(f"unknown topology format {format!r}")
    _warn_if_disconnected(t)
    return t


def save_topology(t: Topology, path) -> None:
    Path(path).write_text(json.dumps(t.to_json(), indent=2) + "\n", encoding="utf-8")


def parse_topology_json(text: str) -> Topology:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), line=exc.lineno) from exc
    if not isinstance(doc, dict) or doc.get("schema") != TOPOLOGY_SCHEMA:
        raise ParseError(f"expected schema {TOPOLOGY_SCHEMA!r}")
    nodes, missing = [], []
    try:
        for rec in doc["nodes"]:
            nid = str(rec["id"])
            if rec.get("lat") is None or rec.get("lon") is None:
                missing.append(nid)
                continue
            nodes.append(Node(nid, str(rec.get("label", nid)), GeoPoint(rec["lat"], rec["lon"])))
        edges = [(str(a), str(b)) for a, b in doc["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed topology document: {exc}") from exc
    if missing:
        raise MissingCoordinates(missing)
    return Topology(tuple(nodes), tuple(edges))


_GML = "{http://graphml.graphdrawing.org/xmlns}"


def parse_graphml(text: str) -> Topology:
    """Parse the GraphML subset used by Topology Zoo files.

    Coordinates come from the ``Latitude``/``Longitude`` keys, falling back
    to any key named ``lat``/``lon`` case-insensitively. Parallel edges are
    merged; self-loops are dropped with a warning.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"invalid GraphML: {exc}", line=exc.position[0]) from exc

    def tag(el):
        return el.tag.replace(_GML, "")

    keys = {}
    for k in root.iter():
        if tag(k) == "key" and k.get("for", "node") in ("node", "all"):
            keys[k.get("id")] = k.get("attr.name", k.get("id"))

    def find_key(*names):
        for want in names:
            for kid, name in keys.items():
                if name == want:
                    return kid
        for want in names:
            for kid, name in keys.items():
                if name.lower() == want.lower():
                    return kid
        return None

    lat_key = find_key("Latitude", "lat")
    lon_key = find_key("Longitude", "lon")
    label_key = find_key("label")

    graph = next((el for el in root.iter() if tag(el) == "graph"), None)
    if graph is None:
        raise ParseError("GraphML document has no <graph> element")

    nodes, missing = [], []
    edges = []
    for el in graph:
        if tag(el) == "node":
            nid = el.get("id")
            if nid is None:
                raise ParseError("node without id")
            data = {d.get("key"): (d.text or "").strip() for d in el if tag(d) == "data"}
            lat, lon = data.get(lat_key), data.get(lon_key)
            if not lat or not lon:
                missing.append(nid)
                continue
            try:
                loc = GeoPoint(float(lat), float(lon))
            except ValueError as exc:
                raise ParseError(f"node {nid}: bad coordinates ({lat}, {lon})") from exc
            nodes.append(Node(nid, data.get(label_key) or nid, loc))
        elif tag(el) == "edge":
            a, b = el.get("source"), el.get("target")
            if a is None or b is None:
                raise ParseError("edge without source/target")
            if a == b:
                log.warning("dropping self-loop on node %s", a)
                continue
            edges.append((a, b))
    if missing:
        raise MissingCoordinates(missing)
    return Topology(tuple(nodes), tuple(edges))
