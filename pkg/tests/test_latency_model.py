import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dragoon.errors import AllZeroPredictions, DomainError, InsufficientData, SingularFit, ValidationError
from dragoon.latency_model import (
    CalibrationPair,
    LatencyDistanceCurve,
    calibrate_lc,
    effective_latency,
    fit_curve,
    fit_per_landmark,
    predict_distance,
)


def pairs_from(curve, latencies, noise=None):
    d = predict_distance(curve, np.asarray(latencies))
    if noise is not None:
        d = d + noise
    return [CalibrationPair(float(x), float(y)) for x, y in zip(latencies, d)]


class TestEffectiveLatency:
    def test_hop_correction(self):
        assert effective_latency(20.0, 10) == pytest.approx(9.0)

    def test_zero(self):
        assert effective_latency(0.0, 0) == 0.0

    def test_clamped(self):
        assert effective_latency(1.0, 20) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            effective_latency(-1.0, 0)


class TestPredict:
    curve = LatencyDistanceCurve(100.0, 1.0, 1.0, 0.0)

    def test_zero_latency(self):
        assert predict_distance(self.curve, 0.0) == 0.0

    def test_e_minus_one(self):
        assert predict_distance(self.curve, math.e - 1) == pytest.approx(100.0, rel=1e-12)

    def test_clamps_negative_to_zero(self):
        c = LatencyDistanceCurve(100.0, 1.0, 1.0, -50.0)
        assert predict_distance(c, 0.1) == 0.0

    def test_domain_error(self):
        with pytest.raises(DomainError):
            predict_distance(LatencyDistanceCurve(100.0, 1.0, -1.0, 0.0), 0.5)

    def test_vectorized(self):
        xs = np.linspace(0, 10, 7)
        out = predict_distance(self.curve, xs)
        assert out.shape == (7,)
        assert np.allclose(out, [predict_distance(self.curve, float(x)) for x in xs], rtol=0, atol=0)

    @given(st.floats(0.01, 2.0), st.floats(0.0, 200.0))
    def test_lc_scales_exactly(self, s, latency):
        c = LatencyDistanceCurve(800.0, 0.5, 1.0, -20.0)
        assert predict_distance(c.with_lc(s), latency) == s * predict_distance(c, latency)

    def test_lc_07(self):
        c = LatencyDistanceCurve(800.0, 0.5, 1.0, 0.0)
        assert predict_distance(c.with_lc(0.7), 12.0) == 0.7 * predict_distance(c, 12.0)

    def test_json_round_trip(self):
        c = LatencyDistanceCurve(800.0, 0.5, 1.0, -3.0, 0.7, "road-matrix", 50.0, 1.5, 20)
        assert LatencyDistanceCurve.from_json(c.to_json()) == c


class TestFit:
    latencies = np.linspace(0.1, 50.0, 20)

    def test_noiseless_recovery(self):
        truth = LatencyDistanceCurve(800.0, 0.5, 1.0, 0.0)
        fitted = fit_curve(pairs_from(truth, self.latencies))
        want = predict_distance(truth, self.latencies)
        got = predict_distance(fitted, self.latencies)
        assert np.max(np.abs(got - want) / want) < 1e-3
        assert fitted.n_points == 20 and fitted.latency_max == 50.0

    def test_noisy_sse_not_worse_than_truth(self):
        truth = LatencyDistanceCurve(800.0, 0.5, 1.0, 0.0)
        rng = np.random.default_rng(0)
        for _ in range(20):
            noise = rng.normal(0, 5.0, len(self.latencies))
            pairs = pairs_from(truth, self.latencies, noise)
            y = np.array([p.known_distance for p in pairs])
            true_sse = float(np.sum((predict_distance(truth, self.latencies) - y) ** 2))
            assert fit_curve(pairs).sse <= true_sse

    def test_three_pairs(self):
        truth = LatencyDistanceCurve(800.0, 0.5, 1.0, 0.0)
        with pytest.raises(InsufficientData):
            fit_curve(pairs_from(truth, [1.0, 2.0, 3.0]))

    def test_repeated_latency_is_singular(self):
        with pytest.raises(SingularFit):
            fit_curve([CalibrationPair(1.0, 10.0)] * 2 + [CalibrationPair(2.0, 20.0)] * 2)

    def test_decreasing_data_is_singular(self):
        with pytest.raises(SingularFit):
            fit_curve([CalibrationPair(x, 1000.0 - 10 * x) for x in range(1, 10)])

    def test_per_landmark(self):
        truth = LatencyDistanceCurve(800.0, 0.5, 1.0, 0.0)
        lms = ["A", "B", "C", "D", "E"]
        pairs = []
        for i, a in enumerate(lms):
            for j, b in enumerate(lms[i + 1:], i + 1):
                x = 1.0 + 3 * i + 2 * j
                pairs.append(CalibrationPair(x, predict_distance(truth, x), a, b))
        curves = fit_per_landmark(pairs)
        assert sorted(curves) == lms
        for c in curves.values():
            assert predict_distance(c, 10.0) == pytest.approx(predict_distance(truth, 10.0), rel=1e-3)


class TestCalibrateLC:
    curve = LatencyDistanceCurve(800.0, 0.5, 1.0, 0.0)
    xs = np.linspace(1.0, 40.0, 15)

    @pytest.mark.parametrize("factor", [0.7, 0.9, 1.0])
    def test_recovers_scale(self, factor):
        holdout = [CalibrationPair(float(x), factor * predict_distance(self.curve, float(x))) for x in self.xs]
        assert calibrate_lc(self.curve, holdout) == pytest.approx(factor, abs=1e-9)

    def test_ignores_curve_lc(self):
        holdout = [CalibrationPair(float(x), 0.7 * predict_distance(self.curve, float(x))) for x in self.xs]
        assert calibrate_lc(self.curve.with_lc(0.5), holdout) == pytest.approx(0.7, abs=1e-9)

    def test_empty(self):
        with pytest.raises(InsufficientData):
            calibrate_lc(self.curve, [])

    def test_all_zero_predictions(self):
        with pytest.raises(AllZeroPredictions):
            calibrate_lc(self.curve, [CalibrationPair(0.0, 5.0)])
