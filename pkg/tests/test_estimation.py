import math

import numpy as np
import pytest

import oracles
from dragoon.errors import EmptyCloud, TooFewPoints, ValidationError
from dragoon.estimation import (
    FilterConfig,
    GridSearchConfig,
    estimate,
    filter_outliers,
    grid_center,
    grid_search,
)
from dragoon.geo import GeoPoint, PlanarPoint, Projection, orthodromic_distance
from dragoon.lateration import CloudPoint, DistanceConstraint, PointCloud, multilaterate

ORIGIN = GeoPoint(47.0, 9.0)
PROJ = Projection(ORIGIN)


def cloud_of(xy, tag="two-a"):
    return PointCloud(tuple(
        CloudPoint(PROJ.unproject(PlanarPoint(x, y)), (f"A{i}", f"B{i}"), tag) for i, (x, y) in enumerate(xy)
    ))


def random_box_cloud(rng, n, half=50.0):
    return [PROJ.unproject(PlanarPoint(*rng.uniform(-half, half, 2))) for _ in range(n)]


def mean_dist(pt, pts):
    return float(np.mean([orthodromic_distance(pt, q) for q in pts]))


class TestGridSearch:
    def test_single_point(self):
        p = GeoPoint(50.1, 8.7)
        res = grid_search([p])
        assert orthodromic_distance(res.point, p) < GridSearchConfig().epsilon_min
        assert grid_center(PointCloud((CloudPoint(p, ("a", "b"), "tangent"),))) == p

    def test_two_points_objective(self):
        a, b = PROJ.unproject(PlanarPoint(-30, 5)), PROJ.unproject(PlanarPoint(40, -10))
        res = grid_search([a, b])
        assert res.objective == pytest.approx(orthodromic_distance(a, b) / 2, abs=0.1)

    @pytest.mark.parametrize("seed", range(5))
    def test_fifty_points_vs_dense_grid(self, seed):
        rng = np.random.default_rng(seed)
        pts = random_box_cloud(rng, 50)
        res = grid_search(pts)
        ref = oracles.dense_grid_min([p.lat for p in pts], [p.lon for p in pts], (ORIGIN.lat, ORIGIN.lon), 55.0)
        assert res.objective <= ref + 0.2
        assert res.objective == pytest.approx(mean_dist(res.point, pts), rel=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_monotone_descent(self, seed):
        rng = np.random.default_rng(50 + seed)
        res = grid_search(random_box_cloud(rng, int(rng.integers(1, 60))))
        assert all(b < a for a, b in zip(res.history, res.history[1:]))
        assert res.objective == res.history[-1]

    def test_deterministic(self):
        pts = random_box_cloud(np.random.default_rng(1), 30)
        assert grid_search(pts) == grid_search(pts)

    def test_symmetric_cloud_prefers_east_on_ties(self):
        # four points on the axes: start at the centroid, already optimal
        pts = [PROJ.unproject(PlanarPoint(x, y)) for x, y in ((10, 0), (-10, 0), (0, 10), (0, -10))]
        res = grid_search(pts, GridSearchConfig(epsilon_initial=1.0))
        assert res.moves == 0
        assert orthodromic_distance(res.point, ORIGIN) < 1e-6

    def test_errors(self):
        with pytest.raises(EmptyCloud):
            grid_search([])
        with pytest.raises(ValidationError):
            GridSearchConfig(epsilon_min=0)
        with pytest.raises(ValidationError):
            GridSearchConfig(epsilon_initial=0.05, epsilon_min=0.1)


class TestFilter:
    def test_far_outlier_removed_first_round(self):
        rng = np.random.default_rng(0)
        xy = [tuple(rng.uniform(-2, 2, 2)) for _ in range(9)] + [(300.0, 0.0)]
        cloud = cloud_of(xy)
        out, trace = filter_outliers(cloud, FilterConfig(drop_fraction=0.1))
        assert trace[0].dropped == (cloud.points[9],)
        assert cloud.points[9] not in out.points

    def test_min_points_cloud_unchanged(self):
        cloud = cloud_of([(0, 0), (1, 0), (0, 1), (50, 50)])
        out, trace = filter_outliers(cloud, FilterConfig(min_points=4))
        assert out == cloud and trace == ()

    def test_never_below_floor(self):
        cloud = cloud_of([(i, 0) for i in range(7)])
        out, _ = filter_outliers(cloud, FilterConfig(drop_fraction=0.4, rounds=5, min_points=5))
        assert len(out) == 5

    def test_too_few(self):
        with pytest.raises(TooFewPoints):
            filter_outliers(cloud_of([(0, 0), (1, 1)]), FilterConfig(min_points=4))

    @pytest.mark.parametrize("seed", range(5))
    def test_gap_artifacts_removed_within_two_rounds(self, seed):
        rng = np.random.default_rng(seed)
        on_target = [tuple(rng.normal(0, 3, 2)) for _ in range(20)]
        artifacts = []
        for k in range(4):
            th = rng.uniform(0, 2 * math.pi)
            r = rng.uniform(200, 400)
            artifacts.append((r * math.cos(th), r * math.sin(th)))
        cloud = cloud_of(on_target + artifacts)
        bad = set(cloud.points[20:])
        _, trace = filter_outliers(cloud, FilterConfig(drop_fraction=0.1, rounds=2))
        dropped = {p for r in trace for p in r.dropped}
        assert bad <= dropped

    @pytest.mark.parametrize("seed", range(10))
    def test_rounds_do_not_increase_residual(self, seed):
        rng = np.random.default_rng(seed)
        cloud = cloud_of([tuple(rng.uniform(-80, 80, 2)) for _ in range(int(rng.integers(8, 40)))])
        _, trace = filter_outliers(cloud, FilterConfig(drop_fraction=0.2, rounds=4))
        for prev, nxt in zip(trace, trace[1:]):
            assert nxt.objective <= prev.survivor_objective + 1e-12


class TestEstimate:
    def test_single_point(self):
        p = GeoPoint(50.0, 10.0)
        est = estimate(PointCloud((CloudPoint(p, ("a", "b"), "tangent"),)))
        assert orthodromic_distance(est.point, p) < 0.1
        assert est.trace == ()

    def test_noise_free_four_landmarks(self):
        target = PROJ.unproject(PlanarPoint(12.0, -7.0))
        lms = [PROJ.unproject(PlanarPoint(x, y)) for x, y in ((-120, -90), (140, -60), (30, 150), (-100, 110))]
        cons = [DistanceConstraint(f"L{i}", lm, orthodromic_distance(lm, target)) for i, lm in enumerate(lms)]
        est = estimate(multilaterate(cons))
        assert orthodromic_distance(est.point, target) < 1.0

    def test_final_mean_not_above_filter_rounds(self):
        rng = np.random.default_rng(9)
        cloud = cloud_of([tuple(rng.uniform(-80, 80, 2)) for _ in range(30)])
        est = estimate(cloud)
        assert est.mean_residual_km <= est.trace[-1].survivor_objective + 1e-12
        assert est.mean_residual_km == pytest.approx(mean_dist(est.point, est.cloud_final.locations), rel=1e-12)

    def test_geojson_layout(self):
        rng = np.random.default_rng(2)
        cloud = cloud_of([tuple(rng.uniform(-20, 20, 2)) for _ in range(12)])
        est = estimate(cloud)
        doc = est.to_geojson({"target": "T1"})
        roles = [f["properties"]["role"] for f in doc["features"]]
        assert roles == ["estimate"] + ["cloud"] * 12
        kept = sum(f["properties"]["kept"] for f in doc["features"][1:])
        assert kept == len(est.cloud_final)
        assert doc["features"][0]["properties"]["target"] == "T1"
        assert len(doc["features"][0]["properties"]["trace"]) == len(est.trace)
