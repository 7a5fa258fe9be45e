"""Readers and writers for measurement dumps, road-distance matrices and
ground-truth files.

Formats::

    measurements JSON  {"schema": "measurements/1",
                        "samples": [{"src", "dst", "rtts": [ms, ...], "hops"}]}
    measurements CSV   src,dst,rtt_ms,hops   (one row per probe)
    road matrix CSV    id_a,id_b,km
    truth CSV          target,lat,lon
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import DragoonError, EmptyFile, ParseError, ValidationError
from .geo import GeoPoint, orthodromic_distance

log = logging.getLogger(__name__)

MEASUREMENTS_SCHEMA = "measurements/1"
ASYMMETRY_TOLERANCE = 0.01


class RoadMatrixWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MeasurementSample:
    src: str
    dst: str
    rtts: tuple[float, ...]
    hop_count: int
    timestamp: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "rtts", tuple(float(r) for r in self.rtts))
        if not self.rtts:
            raise ValidationError(f"sample {self.src}->{self.dst} has no RTTs")
        if any(not math.isfinite(r) or r < 0 for r in self.rtts):
            raise ValidationError(f"sample {self.src}->{self.dst} has a negative or non-finite RTT")
        if int(self.hop_count) != self.hop_count or self.hop_count < 0:
            raise ValidationError(f"sample {self.src}->{self.dst}: hop count must be a non-negative integer")
        object.__setattr__(self, "hop_count", int(self.hop_count))

    def to_json(self) -> dict:
        rec = {"src": self.src, "dst": self.dst, "rtts": list(self.rtts), "hops": self.hop_count}
        if self.timestamp is not None:
            rec["timestamp"] = self.timestamp
        return rec


def min_rtt(s: MeasurementSample) -> float:
    return min(s.rtts)


def _read(path) -> str:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        raise EmptyFile(f"{path} is empty")
    return text


def parse_measurements(path, format: str | None = None) -> list[MeasurementSample]:
    if format is None:
        format = "csv" if str(path).lower().endswith(".csv") else "json"
    text = _read(path)
    if format == "json":
        return parse_measurements_json(text)
    if format == "csv":
        return parse_measurements_csv(text)
    raise ValidationError(f"unknown measurement format {format!r}")


def parse_measurements_json(text: str) -> list[MeasurementSample]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict) or doc.get("schema") != MEASUREMENTS_SCHEMA:
        raise ParseError(f"expected schema {MEASUREMENTS_SCHEMA!r}")
    records = doc.get("samples")
    if not isinstance(records, list):
        raise ParseError("'samples' must be a list")
    if not records:
        raise EmptyFile("measurement file has no samples")
    out = []
    for i, rec in enumerate(records):
        try:
            rtts = rec["rtts"]
            if not isinstance(rtts, list) or any(isinstance(r, bool) or not isinstance(r, (int, float)) for r in rtts):
                raise ValueError("rtts must be a list of numbers")
            if any(r <= 0 for r in rtts):
                raise ValueError("RTTs must be positive")
            hops = rec["hops"]
            if isinstance(hops, bool) or not isinstance(hops, int):
                raise ValueError("hops must be an integer")
            out.append(MeasurementSample(str(rec["src"]), str(rec["dst"]), tuple(rtts), hops, rec.get("timestamp")))
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise ParseError(f"sample {i}: {exc}") from exc
    return out


def parse_measurements_csv(text: str) -> list[MeasurementSample]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except (StopIteration, csv.Error) as exc:
        raise EmptyFile("measurement CSV has no header") from exc
    want = ["src", "dst", "rtt_ms", "hops"]
    if header[:4] != want:
        raise ParseError(f"expected header {','.join(want)}", line=1)
    groups: dict[tuple[str, str], list] = {}
    try:
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 4:
                raise ParseError("expected 4 columns", line=line)
            src, dst = row[0].strip(), row[1].strip()
            try:
                rtt = float(row[2])
                hops = int(row[3])
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from exc
            if not math.isfinite(rtt) or rtt <= 0:
                raise ParseError(f"non-positive RTT {row[2].strip()}", line=line)
            if hops < 0:
                raise ParseError(f"negative hop count {hops}", line=line)
            g = groups.setdefault((src, dst), [[], hops, line])
            if g[1] != hops:
                raise ParseError(f"hop count {hops} differs from earlier rows for {src}->{dst}", line=line)
            g[0].append(rtt)
    except csv.Error as exc:
        raise ParseError(str(exc), line=reader.line_num) from exc
    if not groups:
        raise EmptyFile("measurement CSV has no rows")
    return [MeasurementSample(s, d, tuple(r), h) for (s, d), (r, h, _) in groups.items()]


def measurements_to_json(samples, timestamp: str | None = None) -> dict:
    doc = {"schema": MEASUREMENTS_SCHEMA, "samples": [s.to_json() for s in samples]}
    if timestamp is not None:
        doc["created"] = timestamp
    return doc


def write_measurements(samples, path, format: str | None = None, timestamp: str | None = None) -> None:
    if format is None:
        format = "csv" if str(path).lower().endswith(".csv") else "json"
    if format == "json":
        Path(path).write_text(json.dumps(measurements_to_json(samples, timestamp), indent=2) + "\n", encoding="utf-8")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["src", "dst", "rtt_ms", "hops"])
    for s in samples:
        for r in s.rtts:
            w.writerow([s.src, s.dst, repr(r), s.hop_count])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def from_atlas_results(ping_results, traceroute_results=()) -> list[MeasurementSample]:
    """Adapt RIPE-Atlas-style result dicts.

    Ping results need ``prb_id``, ``dst_addr`` and ``result: [{"rtt": ms}]``
    (entries without ``rtt``, i.e. timeouts, are skipped). Hop counts come
    from traceroute results with the same probe and destination (the last
    ``hop`` number); pairs without a traceroute get ``hops = 0``.

    >>> from_atlas_results([{"prb_id": 6001, "dst_addr": "192.0.2.1",
    ...                      "result": [{"rtt": 20.5}, {"x": "*"}, {"rtt": 19.8}]}],
    ...                    [{"prb_id": 6001, "dst_addr": "192.0.2.1",
    ...                      "result": [{"hop": 1}, {"hop": 12}]}])[0].rtts
    (20.5, 19.8)
    """
    hops = {}
    for tr in traceroute_results:
        try:
            hops[(str(tr["prb_id"]), str(tr["dst_addr"]))] = max(int(h["hop"]) for h in tr["result"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed traceroute result: {exc}") from exc
    out = []
    for res in ping_results:
        try:
            key = (str(res["prb_id"]), str(res["dst_addr"]))
            rtts = tuple(float(r["rtt"]) for r in res["result"] if "rtt" in r)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed ping result: {exc}") from exc
        if not rtts:
            continue
        if any(r <= 0 for r in rtts):
            raise ParseError(f"non-positive RTT in ping result for probe {key[0]}")
        ts = res.get("timestamp")
        out.append(MeasurementSample(key[0], key[1], rtts, hops.get(key, 0), None if ts is None else str(ts)))
    return out


# -- road matrix / truth ---------------------------------------------------

class RoadDistanceMatrix:
    """Symmetric km lookup between ids; the diagonal is zero."""

    def __init__(self, table: dict):
        self._d = dict(table)

    def __len__(self):
        return len(self._d) // 2

    def __contains__(self, pair):
        a, b = pair
        return a == b or (a, b) in self._d

    def get(self, a: str, b: str) -> float:
        if a == b:
            return 0.0
        try:
            return self._d[(a, b)]
        except KeyError:
            raise ValidationError(f"road matrix has no entry for ({a}, {b})") from None

    def pairs(self):
        return sorted((a, b, v) for (a, b), v in self._d.items() if a < b)


def _csv_rows(text: str, header: list[str]):
    reader = csv.reader(io.StringIO(text))
    try:
        got = [h.strip() for h in next(reader)]
    except (StopIteration, csv.Error) as exc:
        raise EmptyFile("CSV has no header") from exc
    if got[: len(header)] != header:
        raise ParseError(f"expected header {','.join(header)}", line=1)
    try:
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise ParseError(f"expected {len(header)} columns", line=reader.line_num)
            yield reader.line_num, [c.strip() for c in row]
    except csv.Error as exc:
        raise ParseError(str(exc), line=reader.line_num) from exc


def parse_road_matrix(path, locations: dict | None = None) -> RoadDistanceMatrix:
    """Read ``id_a,id_b,km`` rows.

    When both directions are present they are averaged, with a warning if
    they differ by more than 1%. With ``locations`` (id -> GeoPoint) pairs
    shorter than the great-circle distance are reported in a warning.
    """
    raw: dict[tuple[str, str], float] = {}
    for line, (a, b, km) in _csv_rows(_read(path), ["id_a", "id_b", "km"]):
        try:
            v = float(km)
        except ValueError as exc:
            raise ParseError(str(exc), line=line) from exc
        if not math.isfinite(v) or v < 0:
            raise ParseError(f"distance must be non-negative, got {km}", line=line)
        if a == b:
            if v != 0:
                raise ParseError(f"non-zero self distance for {a}", line=line)
            continue
        raw[(a, b)] = v
    if not raw:
        raise EmptyFile(f"{path} has no distances")
    table, asym = {}, []
    for (a, b), v in raw.items():
        w = raw.get((b, a), v)
        if abs(v - w) > ASYMMETRY_TOLERANCE * max(v, w):
            asym.append((a, b) if a < b else (b, a))
        table[(a, b)] = table[(b, a)] = 0.5 * (v + w)
    if asym:
        msg = f"asymmetric road distances averaged for pairs {sorted(set(asym))}"
        log.warning(msg)
        warnings.warn(RoadMatrixWarning(msg), stacklevel=2)
    matrix = RoadDistanceMatrix(table)
    if locations:
        short = [
            (a, b)
            for a, b, v in matrix.pairs()
            if a in locations and b in locations and v < orthodromic_distance(locations[a], locations[b])
        ]
        if short:
            msg = f"road distance below great-circle distance for pairs {short}"
            log.warning(msg)
            warnings.warn(RoadMatrixWarning(msg), stacklevel=2)
    return matrix


def parse_truth(path) -> dict[str, GeoPoint]:
    truth = {}
    for line, (target, lat, lon) in _csv_rows(_read(path), ["target", "lat", "lon"]):
        try:
            truth[target] = GeoPoint(float(lat), float(lon))
        except (ValueError, DragoonError) as exc:
            raise ParseError(f"bad coordinates for {target}: {exc}", line=line) from exc
    if not truth:
        raise EmptyFile(f"{path} has no targets")
    return truth


def write_truth(truth: dict, path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["target", "lat", "lon"])
    for k in sorted(truth):
        w.writerow([k, repr(truth[k].lat), repr(truth[k].lon)])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
