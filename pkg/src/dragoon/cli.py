"""Command-line front end.

Every stage reads and writes documented files so it can be run and tested
on its own::

    dragoon synth-topology -o topo.json
    dragoon place     --topology topo.json -k 10 -o landmarks.json
    dragoon simulate  --topology topo.json --landmarks landmarks.json --calibration -o cal.json
    dragoon simulate  --topology topo.json --landmarks landmarks.json --random-targets 5 \\
                      --truth-out truth.csv -o targets.json
    dragoon fit       --measurements cal.json --landmarks landmarks.json -o curve.json
    dragoon locate    --measurements targets.json --curve curve.json --landmarks landmarks.json \\
                      --truth truth.csv -o estimate.geojson
    dragoon evaluate  --truth truth.csv --run "Dragoon (OD)=estimate.geojson" -o report.csv

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import DragoonError, ParseError, ValidationError
from .estimation import FilterConfig, GridSearchConfig
from .geo import GeoPoint, orthodromic_distance
from .ingest import (
    measurements_to_json,
    parse_measurements,
    parse_road_matrix,
    parse_truth,
    write_truth,
)
from .latency_model import (
    DEFAULT_PER_HOP_MS,
    LatencyDistanceCurve,
    calibrate_lc,
    fit_curve,
    fit_per_landmark,
)
from .lateration import CasePolicy
from .pipeline import calibration_pairs, locate
from .placement import LandmarkSet, dragoon_place, extend_landmarks, orientation_mark, two_approx
from .simulator import (
    DelayModel,
    SyntheticTarget,
    random_targets,
    simulate_calibration,
    simulate_campaign,
    synthetic_topology,
)
from .topology import hop_distances, load_topology, node_sort_key, save_topology

log = logging.getLogger("dragoon")

LC_SWEEP = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


# -- helpers ---------------------------------------------------------------

def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ValidationError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from exc


def _stamp(args, doc: dict) -> dict:
    if not args.no_timestamp:
        doc["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return doc


def _write_json(path, doc) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_text(path, text) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_landmarks(path) -> LandmarkSet:
    return LandmarkSet.from_json(_read_json(path))


def _load_curve(path):
    doc = _read_json(path)
    curve = LatencyDistanceCurve.from_json(doc)
    per = {k: LatencyDistanceCurve.from_json(v) for k, v in doc.get("per_landmark", {}).items()}
    return curve, per


def _fmt(v: float) -> str:
    return f"{v:.1f}"


# -- subcommands -----------------------------------------------------------

def cmd_synth_topology(args) -> None:
    t = synthetic_topology(args.nodes, args.seed)
    _write_json(args.output, _stamp(args, t.to_json()))


def cmd_place(args) -> None:
    _need(args, "topology")
    t = load_topology(args.topology, args.format)
    h = hop_distances(t)
    if args.extend:
        result = extend_landmarks(t, h, _load_landmarks(args.extend), args.extra)
    elif args.algorithm == "dragoon":
        _need(args, "k")
        result = dragoon_place(t, h, args.k)
    else:
        _need(args, "k")
        result = two_approx(t, h, args.k, args.seed_node or orientation_mark(t, h))
    log.info("placed %d landmarks, max_hops=%g mean_hops=%.4f", len(result), result.max_hops, result.mean_hops)
    _write_json(args.output, _stamp(args, result.to_json()))


def _delay_model(args) -> DelayModel:
    return DelayModel(args.speed, args.per_hop, args.last_mile, args.noise_mean, args.seed, args.path_factor)


def cmd_simulate(args) -> None:
    _need(args, "topology", "landmarks")
    t = load_topology(args.topology, args.format)
    landmarks = _load_landmarks(args.landmarks)
    model = _delay_model(args)
    samples = []
    truth = {}
    if args.calibration:
        samples += simulate_calibration(t, model, landmarks, args.samples)
    targets = []
    if args.attach:
        loc = t.location(args.attach)
        if args.lat is not None or args.lon is not None:
            _need(args, "lat", "lon")
            loc = GeoPoint(args.lat, args.lon)
        targets.append(SyntheticTarget(args.target_id, args.attach, loc, args.extra_hops))
    if args.random_targets:
        targets += random_targets(t, args.random_targets, args.seed, args.max_offset, args.extra_hops)
    if not args.calibration and not targets:
        raise ValidationError("nothing to simulate: give --calibration, --attach or --random-targets")
    for tgt in targets:
        samples += simulate_campaign(t, model, landmarks, tgt, args.samples)
        truth[tgt.target_id] = tgt.true_location
    _write_json(args.output, _stamp(args, measurements_to_json(samples)))
    if args.truth_out:
        if not truth:
            raise ValidationError("--truth-out needs at least one target")
        write_truth(truth, args.truth_out)


def cmd_fit(args) -> None:
    _need(args, "measurements", "landmarks")
    landmarks = _load_landmarks(args.landmarks)
    road = None
    if args.distance_mode == "road-matrix":
        if not args.road_matrix:
            raise ValidationError("--distance-mode road-matrix requires --road-matrix")
        road = parse_road_matrix(args.road_matrix, dict(zip(landmarks.landmark_node_ids, landmarks.locations)))
    samples = parse_measurements(args.measurements)
    pairs = calibration_pairs(samples, landmarks, args.distance_mode, road, args.per_hop)
    curve = fit_curve(pairs, distance_mode=args.distance_mode)
    if args.holdout:
        hold = calibration_pairs(parse_measurements(args.holdout), landmarks, args.distance_mode, road, args.per_hop)
        curve = curve.with_lc(calibrate_lc(curve, hold))
    if args.lc is not None:
        curve = curve.with_lc(args.lc)
    doc = curve.to_json()
    if args.per_landmark:
        doc["per_landmark"] = {k: c.to_json() for k, c in fit_per_landmark(pairs, distance_mode=args.distance_mode).items()}
    log.info("fitted curve on %d pairs, sse=%.6g", curve.n_points, curve.sse)
    _write_json(args.output, _stamp(args, doc))


def _group_targets(samples, landmark_ids, wanted=None):
    groups: dict[str, list] = {}
    for s in samples:
        if s.dst in landmark_ids:
            continue
        groups.setdefault(s.dst, []).append(s)
    if wanted:
        unknown = set(wanted) - set(groups)
        if unknown:
            raise ValidationError(f"no measurements for target(s) {sorted(unknown)}")
        groups = {k: v for k, v in groups.items() if k in wanted}
    if not groups:
        raise ValidationError("measurement file contains no target probes")
    return {k: groups[k] for k in sorted(groups, key=node_sort_key)}


def cmd_locate(args) -> None:
    _need(args, "measurements", "curve", "landmarks")
    landmarks = _load_landmarks(args.landmarks)
    curve, per = _load_curve(args.curve)
    if args.lc is not None:
        curve = curve.with_lc(args.lc)
    truth = parse_truth(args.truth) if args.truth else {}
    policy = CasePolicy(shrink_to_tangent=args.shrink_to_tangent)
    fcfg = FilterConfig(args.drop_fraction, args.rounds, args.min_points)
    gcfg = GridSearchConfig(args.epsilon_initial, args.epsilon_min)
    groups = _group_targets(parse_measurements(args.measurements), set(landmarks.landmark_node_ids), args.target)

    def run(samples, c):
        return locate(samples, landmarks, c, per if args.per_landmark else None, policy, fcfg, gcfg, args.per_hop)

    features = []
    sweep_rows = []
    for target, samples in groups.items():
        est = run(samples, curve)
        props = {"target": target, "lc": curve.lc}
        if target in truth:
            props["error_km"] = orthodromic_distance(est.point, truth[target])
        features += est.to_geojson(props)["features"]
        if args.lc_sweep:
            row = [target]
            for lc in LC_SWEEP:
                pt = run(samples, curve.with_lc(lc)).point
                sp = {"role": "lc-sweep", "target": target, "lc": lc}
                if target in truth:
                    sp["error_km"] = orthodromic_distance(pt, truth[target])
                    row.append(_fmt(sp["error_km"]))
                features.append({"type": "Feature", "geometry": {"type": "Point", "coordinates": [pt.lon, pt.lat]}, "properties": sp})
            sweep_rows.append(row)
    _write_json(args.output, _stamp(args, {"type": "FeatureCollection", "features": features}))
    if args.lc_sweep and truth:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target"] + [f"lc={lc:.1f}" for lc in LC_SWEEP])
        w.writerows(r for r in sweep_rows if len(r) > 1)
        if args.sweep_out:
            _write_text(args.sweep_out, buf.getvalue())
        else:
            sys.stderr.write(buf.getvalue())


def _parse_run(spec: str):
    label, sep, path = spec.partition("=")
    if not sep or not label or not path:
        raise ValidationError(f"--run expects LABEL=FILE, got {spec!r}")
    return label, path


def _run_points(path):
    """``{target: (estimate point, {lc: sweep point})}`` from a locate output."""
    doc = _read_json(path)
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a GeoJSON FeatureCollection")
    out: dict[str, list] = {}
    try:
        for f in doc["features"]:
            props = f.get("properties") or {}
            role = props.get("role")
            if role not in ("estimate", "lc-sweep"):
                continue
            lon, lat = f["geometry"]["coordinates"][:2]
            entry = out.setdefault(str(props["target"]), [None, {}])
            if role == "estimate":
                entry[0] = GeoPoint(lat, lon)
            else:
                entry[1][round(float(props["lc"]), 6)] = GeoPoint(lat, lon)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed feature ({exc})") from exc
    return out


def render_report(truth: dict, runs: list) -> str:
    """CSV report of orthodromic errors (km, one decimal) per target and run.

    Runs holding LC sweep points get one column per swept LC value plus the
    best LC and its error.
    """
    loaded = [(label, _run_points(path)) for label, path in runs]
    header = ["target"]
    sweeps = {}
    for label, pts in loaded:
        header.append(f"{label} error_km")
        lcs = sorted({lc for _, sw in pts.values() for lc in sw})
        sweeps[label] = lcs
        if lcs:
            header += [f"{label} lc={lc:.1f}" for lc in lcs] + [f"{label} best_lc", f"{label} best_km"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for target in sorted(truth, key=node_sort_key):
        row = [target]
        for label, pts in loaded:
            est, sw = pts.get(target, (None, {}))
            row.append(_fmt(orthodromic_distance(est, truth[target])) if est is not None else "")
            if sweeps[label]:
                errs = {lc: orthodromic_distance(sw[lc], truth[target]) for lc in sweeps[label] if lc in sw}
                row += [_fmt(errs[lc]) if lc in errs else "" for lc in sweeps[label]]
                if errs:
                    best = min(errs, key=lambda lc: (errs[lc], lc))
                    row += [f"{best:.1f}", _fmt(errs[best])]
                else:
                    row += ["", ""]
        w.writerow(row)
    return buf.getvalue()


def cmd_evaluate(args) -> None:
    _need(args, "truth")
    if not args.run:
        raise ValidationError("give at least one --run LABEL=FILE")
    runs = [_parse_run(r) for r in args.run]
    _write_text(args.output, render_report(parse_truth(args.truth), runs))


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dragoon", description="Landmark placement and latency-based IP geolocation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p.add_argument("--json-errors", action="store_true", help="print errors as JSON on stderr")
    p.add_argument("--no-timestamp", action="store_true", help="omit creation timestamps from outputs")
    p.add_argument("--config", help="JSON file whose keys mirror the subcommand's options")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("synth-topology", help="generate a random Gabriel-graph topology")
    s.add_argument("--nodes", type=int, default=30)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_synth_topology)

    s = sub.add_parser("place", help="choose landmark nodes on a topology")
    s.add_argument("--topology")
    s.add_argument("--format", choices=["graphml", "json"])
    s.add_argument("-k", type=int)
    s.add_argument("--algorithm", choices=["dragoon", "2approx"], default="dragoon")
    s.add_argument("--seed-node", help="2approx only: start node (default: graph 1-center)")
    s.add_argument("--extend", help="existing landmarks.json to extend")
    s.add_argument("--extra", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_place)

    s = sub.add_parser("simulate", help="generate synthetic measurements")
    s.add_argument("--topology")
    s.add_argument("--format", choices=["graphml", "json"])
    s.add_argument("--landmarks")
    s.add_argument("--calibration", action="store_true", help="probe every landmark pair")
    s.add_argument("--attach", help="node the target hangs off")
    s.add_argument("--target-id", default="T1")
    s.add_argument("--lat", type=float)
    s.add_argument("--lon", type=float)
    s.add_argument("--random-targets", type=int, default=0)
    s.add_argument("--max-offset", type=float, default=50.0, help="km, random target displacement")
    s.add_argument("--extra-hops", type=int, default=2)
    s.add_argument("--samples", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise-mean", type=float, default=1.0, help="ms, mean random excess per probe")
    s.add_argument("--speed", type=float, default=200.0, help="km/ms")
    s.add_argument("--per-hop", type=float, default=0.1, help="ms processing per hop")
    s.add_argument("--last-mile", type=float, default=2.0, help="ms one-way last-mile extra")
    s.add_argument("--path-factor", type=float, default=1.0)
    s.add_argument("--truth-out")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", help="fit the latency/distance curve on inter-landmark probes")
    s.add_argument("--measurements")
    s.add_argument("--landmarks")
    s.add_argument("--distance-mode", choices=["orthodromic", "road-matrix"], default="orthodromic")
    s.add_argument("--road-matrix")
    s.add_argument("--per-landmark", action="store_true")
    s.add_argument("--per-hop", type=float, default=DEFAULT_PER_HOP_MS)
    s.add_argument("--holdout", help="measurements used to calibrate the LC factor")
    s.add_argument("--lc", type=float, help="set the LC factor explicitly")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("locate", help="estimate target locations")
    s.add_argument("--measurements")
    s.add_argument("--curve")
    s.add_argument("--landmarks")
    s.add_argument("--lc", type=float, help="override the curve's LC factor")
    s.add_argument("--per-landmark", action="store_true", help="use per-landmark curves when present")
    s.add_argument("--per-hop", type=float, default=DEFAULT_PER_HOP_MS)
    s.add_argument("--shrink-to-tangent", action="store_true")
    s.add_argument("--target", action="append", help="restrict to these target ids")
    s.add_argument("--truth")
    s.add_argument("--lc-sweep", action="store_true", help=f"also locate with LC in {LC_SWEEP}")
    s.add_argument("--sweep-out")
    s.add_argument("--epsilon-initial", type=float)
    s.add_argument("--epsilon-min", type=float, default=0.1)
    s.add_argument("--drop-fraction", type=float, default=0.1)
    s.add_argument("--rounds", type=int, default=3)
    s.add_argument("--min-points", type=int, default=4)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_locate)

    s = sub.add_parser("evaluate", help="tabulate estimate errors against ground truth")
    s.add_argument("--truth")
    s.add_argument("--run", action="append", help="LABEL=estimate.geojson, repeatable")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_evaluate)
    return p


def _apply_config(parser, args) -> None:
    cfg = _read_json(args.config)
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    sub_defaults = vars(parser.parse_args([args.command]))
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in sub_defaults or dest in ("func", "command", "config"):
            raise ValidationError(f"unknown config key {key!r} for {args.command}")
        if getattr(args, dest) == sub_defaults[dest]:
            setattr(args, dest, value)


def main(argv=None) -> int:
    parser = build_parser()
    json_errors = "--json-errors" in (argv if argv is not None else sys.argv[1:])
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
        if args.command is None:
            raise ValidationError("a subcommand is required")
        if args.config:
            _apply_config(parser, args)
        args.func(args)
        return 0
    except ValidationError as exc:
        return _report(exc, 1, json_errors)
    except (DragoonError, OSError) as exc:
        return _report(exc, 2, json_errors)


def _report(exc, code, as_json) -> int:
    if as_json:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    else:
        sys.stderr.write(f"dragoon: error: {exc}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
