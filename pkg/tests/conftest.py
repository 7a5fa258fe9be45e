from pathlib import Path

import pytest

from dragoon.geo import GeoPoint
from dragoon.topology import Node, Topology

DATA = Path(__file__).parent / "data"


def graph(edges, ids=None):
    """Topology from an edge list; node i sits at (45, i/10) so locations are distinct."""
    if ids is None:
        ids = sorted({v for e in edges for v in e})
    nodes = tuple(Node(str(v), str(v), GeoPoint(45.0, 0.1 * i)) for i, v in enumerate(ids))
    return Topology(nodes, tuple((str(a), str(b)) for a, b in edges))


def from_nx(g):
    return graph(list(g.edges), ids=sorted(g.nodes))


@pytest.fixture
def data_dir():
    return DATA
