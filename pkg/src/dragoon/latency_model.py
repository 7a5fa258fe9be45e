"""Latency to distance conversion with a fitted logarithmic curve.

``distance = lc * max(0, p * ln(q * latency + n) + m)``

``latency`` is the one-way delay left after removing per-hop processing
from half the minimum RTT. ``lc`` is a uniform scale factor calibrated on
held-out pairs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    AllZeroPredictions,
    DomainError,
    InsufficientData,
    ParseError,
    SingularFit,
    ValidationError,
)

log = logging.getLogger(__name__)

CURVE_SCHEMA = "curve/1"
DEFAULT_PER_HOP_MS = 0.1
LC_MAX = 2.0
LC_MIN = 1e-6


@dataclass(frozen=True)
class LatencyDistanceCurve:
    p: float
    q: float
    n: float
    m: float
    lc: float = 1.0
    distance_mode: str = "orthodromic"
    latency_max: float = math.inf
    sse: float = math.nan
    n_points: int = 0
    iterations: int = 0

    def with_lc(self, lc: float) -> "LatencyDistanceCurve":
        return replace(self, lc=float(lc))

    def to_json(self) -> dict:
        return {
            "schema": CURVE_SCHEMA,
            "p": self.p,
            "q": self.q,
            "n": self.n,
            "m": self.m,
            "lc": self.lc,
            "distance_mode": self.distance_mode,
            "latency_max": self.latency_max,
            "sse": self.sse,
            "n_points": self.n_points,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LatencyDistanceCurve":
        if not isinstance(doc, dict) or doc.get("schema") != CURVE_SCHEMA:
            raise ParseError(f"expected schema {CURVE_SCHEMA!r}")
        try:
            return cls(
                float(doc["p"]), float(doc["q"]), float(doc["n"]), float(doc["m"]),
                float(doc.get("lc", 1.0)), str(doc.get("distance_mode", "orthodromic")),
                float(doc.get("latency_max", math.inf)), float(doc.get("sse", math.nan)),
                int(doc.get("n_points", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed curve document: {exc}") from exc


@dataclass(frozen=True)
class CalibrationPair:
    latency: float
    known_distance: float
    src: str = ""
    dst: str = ""

    def __post_init__(self):
        if self.latency < 0 or self.known_distance < 0:
            raise ValidationError("latency and distance must be non-negative")


def effective_latency(rtt_min: float, hop_count: int, per_hop_delay: float = DEFAULT_PER_HOP_MS) -> float:
    """Half the minimum RTT minus per-hop processing, floored at zero."""
    if rtt_min < 0 or hop_count < 0:
        raise ValidationError("rtt_min and hop_count must be non-negative")
    return max(0.0, rtt_min / 2.0 - hop_count * per_hop_delay)


def predict_distance(c: LatencyDistanceCurve, latency):
    """Distance in km for one latency (ms) or an array of them."""
    arg = c.q * np.asarray(latency, dtype=float) + c.n
    if np.any(arg <= 0):
        raise DomainError(f"q*latency + n must be positive (latency={latency})")
    out = c.lc * np.maximum(c.p * np.log(arg) + c.m, 0.0)
    return float(out) if np.ndim(out) == 0 else out


# -- fitting ---------------------------------------------------------------

def _solve_linear(basis, y):
    """Least-squares (p, m) for ``y ~ p * basis + m``."""
    A = np.column_stack([basis, np.ones_like(basis)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef[0], coef[1]


def _sse_for(lq, ln_, x, y):
    q, n = math.exp(lq), math.exp(ln_)
    basis = np.log(q * x + n)
    p, m = _solve_linear(basis, y)
    r = p * basis + m - y
    return float(r @ r), p, m


def fit_curve(pairs, max_iter: int = 500, rtol: float = 1e-9, distance_mode: str = "orthodromic") -> LatencyDistanceCurve:
    """Least-squares fit of the logarithmic curve.

    Parameters are updated in two alternating blocks. ``(p, m)`` enter the
    model linearly and are solved exactly at every step. ``(q, n)`` take a
    damped Gauss-Newton step (in log space, which keeps both positive) on
    the residual with the linear block projected out; a step is accepted
    only if it lowers the SSE, otherwise the damping grows.

    Raises:
        InsufficientData: fewer than four pairs.
        SingularFit: fewer than three distinct latencies, or the optimum
            is not increasing in latency.
    """
    pairs = list(pairs)
    if len(pairs) < 4:
        raise InsufficientData(f"need at least 4 calibration pairs, got {len(pairs)}")
    x = np.array([pr.latency for pr in pairs], dtype=float)
    y = np.array([pr.known_distance for pr in pairs], dtype=float)
    if len(np.unique(x)) < 3:
        raise SingularFit("need at least 3 distinct latencies")

    # documented start: n=1, q=1 (p and m follow from the linear solve)
    theta = np.array([0.0, 0.0])  # (ln q, ln n)
    sse, p, m = _sse_for(theta[0], theta[1], x, y)
    scale = float(y @ y) or 1.0
    lam = 1e-3
    history = [sse]
    it = 0
    for it in range(1, max_iter + 1):
        q, n = math.exp(theta[0]), math.exp(theta[1])
        arg = q * x + n
        basis = np.log(arg)
        r = p * basis + m - y
        # d residual / d(ln q), d(ln n)
        J = np.column_stack([p * q * x / arg, p * n / arg])
        A = np.column_stack([basis, np.ones_like(basis)])
        Qa, _ = np.linalg.qr(A)
        Jp = J - Qa @ (Qa.T @ J)
        g = Jp.T @ r
        H = Jp.T @ Jp
        improved = False
        while lam < 1e12:
            try:
                step = np.linalg.solve(H + lam * np.diag(np.diag(H) + 1e-12 * np.trace(H) + 1e-300), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            cand = theta + step
            if np.all(np.abs(cand) < 700):
                new_sse, new_p, new_m = _sse_for(cand[0], cand[1], x, y)
                if new_sse < sse:
                    improved = True
                    break
            lam *= 10.0
        if not improved:
            break
        rel = (sse - new_sse) / max(sse, 1e-300)
        theta, sse, p, m = cand, new_sse, new_p, new_m
        history.append(sse)
        lam = max(lam / 10.0, 1e-12)
        if rel < rtol or sse <= 1e-24 * scale:
            break

    q, n = math.exp(theta[0]), math.exp(theta[1])
    if not (p > 0 and q > 0):
        raise SingularFit(f"fitted curve is not increasing in latency (p={p:.4g}, q={q:.4g})")
    curve = LatencyDistanceCurve(
        float(p), q, n, float(m), 1.0, distance_mode, float(x.max()),
        float(np.sum((predict_distance(LatencyDistanceCurve(p, q, n, m), x) - y) ** 2)),
        len(pairs), it,
    )
    log.debug("fit converged after %d iterations, sse=%.6g", it, curve.sse)
    return curve


def fit_per_landmark(pairs, min_pairs: int = 4, **kw) -> dict:
    """One curve per landmark from the pairs it took part in (as src or dst).

    Landmarks without enough usable data are skipped.
    """
    by_lm: dict[str, list] = {}
    for pr in pairs:
        by_lm.setdefault(pr.src, []).append(pr)
        by_lm.setdefault(pr.dst, []).append(pr)
    curves = {}
    for lm in sorted(by_lm):
        group = by_lm[lm]
        if len(group) < min_pairs:
            continue
        try:
            curves[lm] = fit_curve(group, **kw)
        except (InsufficientData, SingularFit) as exc:
            log.warning("no per-landmark curve for %s: %s", lm, exc)
    return curves


def calibrate_lc(c: LatencyDistanceCurve, holdout) -> float:
    """Uniform scale factor minimizing squared error on ``holdout``."""
    holdout = list(holdout)
    if not holdout:
        raise InsufficientData("empty holdout set")
    base = c.with_lc(1.0)
    pred = np.array([predict_distance(base, pr.latency) for pr in holdout])
    dist = np.array([pr.known_distance for pr in holdout])
    denom = float(pred @ pred)
    if denom == 0.0:
        raise AllZeroPredictions("curve predicts zero distance for every holdout pair")
    lc = float(pred @ dist) / denom
    return min(LC_MAX, max(LC_MIN, lc))
