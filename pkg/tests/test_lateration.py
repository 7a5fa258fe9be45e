import itertools
import json

import numpy as np
import pytest

import oracles
from dragoon.errors import AllPairsDegenerate, TooFewConstraints, ValidationError
from dragoon.geo import GeoPoint, PlanarPoint, Projection, orthodromic_distance
from dragoon.lateration import CasePolicy, DistanceConstraint, multilaterate

ORIGIN = Projection(GeoPoint(48.0, 11.0))


def planar(x, y):
    return ORIGIN.unproject(PlanarPoint(x, y))


def constraints_to(target, landmarks):
    return [
        DistanceConstraint(f"L{i}", lm, orthodromic_distance(lm, target))
        for i, lm in enumerate(landmarks)
    ]


def test_three_landmarks_exact_distances():
    target = planar(3, 4)
    cloud = multilaterate(constraints_to(target, [planar(0, 0), planar(10, 0), planar(0, 10)]))
    assert len(cloud) == 3
    assert {p.source_pair for p in cloud} == {("L0", "L1"), ("L0", "L2"), ("L1", "L2")}
    for p in cloud:
        assert orthodromic_distance(p.location, target) < 1e-3


def test_disjoint_gives_gap_midpoint():
    a, b = planar(0, 0), planar(100, 0)
    cloud = multilaterate([DistanceConstraint("A", a, 20.0), DistanceConstraint("B", b, 30.0)])
    assert len(cloud) == 1
    (p,) = cloud
    assert p.case_tag == "gap-midpoint"
    assert orthodromic_distance(p.location, a) == pytest.approx(45.0, abs=1e-3)
    assert orthodromic_distance(p.location, b) == pytest.approx(55.0, abs=1e-3)


def test_disjoint_with_shrink_policy():
    a, b = planar(0, 0), planar(100, 0)
    cloud = multilaterate(
        [DistanceConstraint("A", a, 20.0), DistanceConstraint("B", b, 30.0)],
        CasePolicy(shrink_to_tangent=True),
    )
    (p,) = cloud
    assert p.case_tag == "shrunk-tangent"
    assert orthodromic_distance(p.location, a) == pytest.approx(20.0, abs=1e-3)


def test_contained_gives_inner_center():
    a, b = planar(0, 0), planar(5, 0)
    (p,) = multilaterate([DistanceConstraint("A", a, 100.0), DistanceConstraint("B", b, 10.0)])
    assert p.case_tag == "contained-center"
    assert p.location == b


def test_two_constraints_keep_both_points():
    target = planar(30, 40)
    cloud = multilaterate(constraints_to(target, [planar(0, 0), planar(80, 0)]))
    assert [p.case_tag for p in cloud] == ["two-a", "two-b"]
    assert min(orthodromic_distance(p.location, target) for p in cloud) < 1e-3


def test_cloud_size_bound_and_pair_tracing():
    rng = np.random.default_rng(3)
    for _ in range(20):
        L = int(rng.integers(2, 9))
        lms = [planar(*rng.uniform(-300, 300, 2)) for _ in range(L)]
        cons = [DistanceConstraint(f"L{i}", lm, float(rng.uniform(10, 400))) for i, lm in enumerate(lms)]
        cloud = multilaterate(cons)
        assert len(cloud) <= 2 * L * (L - 1) // 2
        pairs = set(itertools.combinations([c.landmark_id for c in cons], 2))
        assert all(p.source_pair in pairs for p in cloud)


def distortion_bound(span_km):
    # planar intersection error grows with the cube of the landmark spread
    return 5e-3 * (span_km / 100.0) ** 3


@pytest.mark.parametrize("span", [10, 50, 100, 200, 400, 800])
def test_exact_distances_recover_target(span):
    rng = np.random.default_rng(span)
    for _ in range(10):
        target = planar(*rng.uniform(-span / 4, span / 4, 2))
        lms = [planar(*rng.uniform(-span, span, 2)) for _ in range(5)]
        for p in multilaterate(constraints_to(target, lms)):
            assert orthodromic_distance(p.location, target) < max(1e-3, distortion_bound(span))


def test_errors():
    a = planar(0, 0)
    with pytest.raises(TooFewConstraints):
        multilaterate([DistanceConstraint("A", a, 5.0)])
    with pytest.raises(ValidationError):
        multilaterate([DistanceConstraint("A", a, 5.0), DistanceConstraint("A", planar(1, 1), 5.0)])
    with pytest.raises(ValidationError):
        DistanceConstraint("A", a, 0.0)
    with pytest.raises(AllPairsDegenerate):
        multilaterate([DistanceConstraint("A", a, 5.0), DistanceConstraint("B", a, 7.0)])


def test_geojson():
    cloud = multilaterate(constraints_to(planar(3, 4), [planar(0, 0), planar(10, 0), planar(0, 10)]))
    doc = json.loads(json.dumps(cloud.to_geojson({"role": "cloud"})))
    assert doc["type"] == "FeatureCollection" and len(doc["features"]) == 3
    f = doc["features"][0]
    lon, lat = f["geometry"]["coordinates"]
    assert (lat, lon) == (cloud.points[0].location.lat, cloud.points[0].location.lon)
    assert f["properties"]["role"] == "cloud"


def test_destination_oracle_cross_check():
    # landmarks placed with the destination formula, distances known by construction
    lat0, lon0 = 50.0, 5.0
    target = GeoPoint(lat0, lon0)
    lms = [GeoPoint(*oracles.destination_point(lat0, lon0, brg, d)) for brg, d in ((0, 120), (110, 200), (250, 90))]
    cons = [DistanceConstraint(f"L{i}", lm, d) for i, (lm, d) in enumerate(zip(lms, (120, 200, 90)))]
    for p in multilaterate(cons):
        assert orthodromic_distance(p.location, target) < distortion_bound(200)
