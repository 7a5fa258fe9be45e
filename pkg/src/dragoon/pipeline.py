"""Glue between the stages: measurements to calibration pairs, to distance
constraints, to a location estimate."""

from __future__ import annotations

import logging

from .errors import ValidationError
from .estimation import FilterConfig, GridSearchConfig, LocationEstimate, estimate
from .geo import orthodromic_distance
from .ingest import MeasurementSample, min_rtt
from .latency_model import (
    DEFAULT_PER_HOP_MS,
    CalibrationPair,
    LatencyDistanceCurve,
    effective_latency,
    predict_distance,
)
from .lateration import CasePolicy, DistanceConstraint, multilaterate

log = logging.getLogger(__name__)

MIN_DISTANCE_KM = 1e-3


def calibration_pairs(samples, landmarks, distance_mode: str = "orthodromic", road_matrix=None,
                      per_hop_delay: float = DEFAULT_PER_HOP_MS) -> list[CalibrationPair]:
    """Pairs from samples whose source and destination are both landmarks."""
    if distance_mode == "road-matrix" and road_matrix is None:
        raise ValidationError("road-matrix distance mode needs a road distance matrix")
    if distance_mode not in ("orthodromic", "road-matrix"):
        raise ValidationError(f"unknown distance mode {distance_mode!r}")
    ids = set(landmarks.landmark_node_ids)
    pairs = []
    for s in samples:
        if s.src not in ids or s.dst not in ids or s.src == s.dst:
            continue
        if distance_mode == "orthodromic":
            km = orthodromic_distance(landmarks.location(s.src), landmarks.location(s.dst))
        else:
            km = road_matrix.get(s.src, s.dst)
        pairs.append(CalibrationPair(effective_latency(min_rtt(s), s.hop_count, per_hop_delay), km, s.src, s.dst))
    return pairs


def distance_constraints(samples, landmarks, curve: LatencyDistanceCurve, per_landmark: dict | None = None,
                         per_hop_delay: float = DEFAULT_PER_HOP_MS) -> list[DistanceConstraint]:
    """Convert one target's probes into distance constraints.

    A landmark's own curve is used when ``per_landmark`` has one (with the
    global ``lc`` applied). Probes from unknown sources are ignored.
    """
    out = []
    ids = set(landmarks.landmark_node_ids)
    for s in sorted(samples, key=lambda s: landmarks.landmark_node_ids.index(s.src) if s.src in ids else -1):
        if s.src not in ids:
            log.warning("ignoring probe from non-landmark %s", s.src)
            continue
        c = curve
        if per_landmark and s.src in per_landmark:
            c = per_landmark[s.src].with_lc(curve.lc)
        km = predict_distance(c, effective_latency(min_rtt(s), s.hop_count, per_hop_delay))
        out.append(DistanceConstraint(s.src, landmarks.location(s.src), max(km, MIN_DISTANCE_KM)))
    return out


def locate(samples: list[MeasurementSample], landmarks, curve, per_landmark=None, policy=CasePolicy(),
           fcfg=FilterConfig(), gcfg=GridSearchConfig(), per_hop_delay=DEFAULT_PER_HOP_MS) -> LocationEstimate:
    constraints = distance_constraints(samples, landmarks, curve, per_landmark, per_hop_delay)
    return estimate(multilaterate(constraints, policy), fcfg, gcfg)
