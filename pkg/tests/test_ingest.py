import json
import warnings
from functools import reduce

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dragoon.errors import DragoonError, EmptyFile, ParseError, ValidationError
from dragoon.geo import GeoPoint, orthodromic_distance
from dragoon.ingest import (
    MeasurementSample,
    RoadMatrixWarning,
    from_atlas_results,
    min_rtt,
    parse_measurements,
    parse_road_matrix,
    parse_truth,
    write_measurements,
    write_truth,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestMeasurements:
    def test_json_record(self, tmp_path):
        doc = {"schema": "measurements/1", "samples": [{"src": "L1", "dst": "T1", "rtts": [20.1, 19.8], "hops": 12}]}
        (s,) = parse_measurements(write(tmp_path, "m.json", json.dumps(doc)))
        assert (s.src, s.dst, s.hop_count) == ("L1", "T1", 12)
        assert min_rtt(s) == 19.8

    def test_csv_negative_rtt_reports_line(self, tmp_path):
        text = "src,dst,rtt_ms,hops\nL1,T1,20.1,12\nL1,T1,-1,12\n"
        with pytest.raises(ParseError) as exc:
            parse_measurements(write(tmp_path, "m.csv", text))
        assert exc.value.line == 3

    def test_csv_groups_rows(self, tmp_path):
        text = "src,dst,rtt_ms,hops\nL1,T1,20.1,12\nL2,T1,7.5,3\nL1,T1,19.8,12\n"
        samples = parse_measurements(write(tmp_path, "m.csv", text))
        assert samples == [MeasurementSample("L1", "T1", (20.1, 19.8), 12), MeasurementSample("L2", "T1", (7.5,), 3)]

    def test_json_zero_rtt_rejected(self, tmp_path):
        doc = {"schema": "measurements/1", "samples": [{"src": "L1", "dst": "T1", "rtts": [0.0], "hops": 1}]}
        with pytest.raises(ParseError):
            parse_measurements(write(tmp_path, "m.json", json.dumps(doc)))

    def test_empty_files(self, tmp_path):
        with pytest.raises(EmptyFile):
            parse_measurements(write(tmp_path, "m.json", ""))
        with pytest.raises(EmptyFile):
            parse_measurements(write(tmp_path, "m.csv", "src,dst,rtt_ms,hops\n"))

    def test_bad_header(self, tmp_path):
        with pytest.raises(ParseError) as exc:
            parse_measurements(write(tmp_path, "m.csv", "a,b,c\n1,2,3\n"))
        assert exc.value.line == 1

    def test_round_trip(self, tmp_path):
        samples = [MeasurementSample("L1", "T1", (20.1, 19.8, 1 / 3), 12), MeasurementSample("L2", "T1", (0.1,), 0)]
        for name in ("m.json", "m.csv"):
            write_measurements(samples, tmp_path / name)
            assert parse_measurements(tmp_path / name) == samples

    @given(st.lists(st.floats(1e-3, 1e4), min_size=1, max_size=50))
    def test_min_rtt_matches_fold(self, rtts):
        s = MeasurementSample("a", "b", tuple(rtts), 1)
        assert min_rtt(s) == reduce(lambda a, b: a if a <= b else b, rtts)

    def test_single_sample(self):
        assert min_rtt(MeasurementSample("a", "b", (7.0,), 1)) == 7.0

    def test_in_memory_validation(self):
        with pytest.raises(ValidationError):
            MeasurementSample("a", "b", (), 1)
        with pytest.raises(ValidationError):
            MeasurementSample("a", "b", (1.0,), -1)

    def test_atlas_adapter(self):
        pings = [{"prb_id": 1, "dst_addr": "x", "result": [{"rtt": 5.0}, {"x": "*"}]}, {"prb_id": 2, "dst_addr": "x", "result": [{"x": "*"}]}]
        (s,) = from_atlas_results(pings)
        assert s.rtts == (5.0,) and s.hop_count == 0
        with pytest.raises(ParseError):
            from_atlas_results([{"prb_id": 1}])


@settings(max_examples=200, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.text(max_size=200), st.sampled_from(["m.json", "m.csv", "road.csv", "truth.csv"]))
def test_parsers_only_raise_structured_errors(tmp_path, text, name):
    p = write(tmp_path, name, text)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            if name.startswith("m."):
                parse_measurements(p)
            elif name == "road.csv":
                parse_road_matrix(p)
            else:
                parse_truth(p)
        except DragoonError:
            pass


csv_cell = st.one_of(st.text(alphabet="0123456789.-eE", max_size=6), st.sampled_from(["L1", "T1", "nan", "inf", ""]))


@settings(max_examples=200, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(st.lists(csv_cell, min_size=0, max_size=5), max_size=6))
def test_csv_fuzz_structured(tmp_path, rows):
    text = "src,dst,rtt_ms,hops\n" + "\n".join(",".join(r) for r in rows)
    try:
        samples = parse_measurements(write(tmp_path, "m.csv", text))
    except DragoonError:
        return
    assert all(r > 0 for s in samples for r in s.rtts)


class TestRoadMatrix:
    def test_symmetric(self, tmp_path):
        m = parse_road_matrix(write(tmp_path, "r.csv", "id_a,id_b,km\nA,B,100\nB,A,100\n"))
        assert m.get("A", "B") == m.get("B", "A") == 100.0
        assert m.get("A", "A") == 0.0

    def test_one_direction_is_mirrored(self, tmp_path):
        m = parse_road_matrix(write(tmp_path, "r.csv", "id_a,id_b,km\nA,B,100\n"))
        assert m.get("B", "A") == 100.0

    def test_asymmetric_averaged_with_warning(self, tmp_path):
        with pytest.warns(RoadMatrixWarning, match="asymmetric"):
            m = parse_road_matrix(write(tmp_path, "r.csv", "id_a,id_b,km\nA,B,100\nB,A,110\n"))
        assert m.get("A", "B") == m.get("B", "A") == 105.0

    def test_below_orthodromic_warns(self, tmp_path):
        locs = {"A": GeoPoint(51.5074, -0.1278), "B": GeoPoint(48.8566, 2.3522), "C": GeoPoint(52.52, 13.405)}
        gc = orthodromic_distance(locs["A"], locs["B"])
        text = f"id_a,id_b,km\nA,B,{gc - 5}\nA,C,2000\n"
        with pytest.warns(RoadMatrixWarning) as rec:
            parse_road_matrix(write(tmp_path, "r.csv", text), locs)
        assert "('A', 'B')" in str(rec[0].message) and "'C'" not in str(rec[0].message)

    def test_unknown_pair(self, tmp_path):
        m = parse_road_matrix(write(tmp_path, "r.csv", "id_a,id_b,km\nA,B,100\n"))
        with pytest.raises(ValidationError):
            m.get("A", "C")

    def test_negative_distance(self, tmp_path):
        with pytest.raises(ParseError) as exc:
            parse_road_matrix(write(tmp_path, "r.csv", "id_a,id_b,km\nA,B,100\nA,C,-3\n"))
        assert exc.value.line == 3


def test_truth_round_trip(tmp_path):
    truth = {"T1": GeoPoint(50.1, 8.7), "T2": GeoPoint(-33.9, 151.2)}
    write_truth(truth, tmp_path / "t.csv")
    assert parse_truth(tmp_path / "t.csv") == truth
    with pytest.raises(ParseError):
        parse_truth(write(tmp_path, "bad.csv", "target,lat,lon\nT1,95,0\n"))
