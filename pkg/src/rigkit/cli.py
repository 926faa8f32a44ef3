"""Command-line entry point.

Two-level subcommands (`rigkit tf diff ...`), a YAML config file whose
values are overridden by explicit flags, and canonical JSON reports
(sorted keys, tool/version header, sha256 digests of the inputs) so
identical invocations produce byte-identical output.

Exit codes: 0 success, 1 internal error, 2 input parse, 3 domain
validation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np
import yaml

from . import __version__
from . import allan, camera, clocks, dataset, tfgraph, trajectory
from .errors import DomainError, ParseError, RigkitError
from .se3 import Transform, UnitQuaternion

TOOL_NAME = "rigkit"
CONFIG_ENV_VAR = "RIGKIT_CONFIG"
OUTPUT_MODES = ("json", "text", "csv")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3


# ------------------------------------------------------------------ helpers


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _input_digests(inputs: dict) -> dict:
    """inputs: role -> path. Directories are identified by their manifest."""
    out = {}
    for role, path in inputs.items():
        p = str(path)
        if os.path.isdir(p):
            p = os.path.join(p, dataset.MANIFEST_NAME)
        out[role] = {"path": str(path), "sha256": _sha256(p)}
    return out


def _envelope(command: str, inputs: dict, payload: dict) -> dict:
    doc = {
        "command": command,
        "inputs": _input_digests(inputs),
        "tool": TOOL_NAME,
        "version": __version__,
    }
    doc.update(payload)
    return doc


def _emit_json(doc: dict, stream) -> None:
    stream.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _emit_csv(header, rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)


def _require(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise ParseError(f"missing required value for --{name.replace('_', '-')}")
    return value


def _parse_pose(text: str) -> Transform:
    """7 comma-separated values: qw,qx,qy,qz,x,y,z."""
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 7:
        raise ParseError(f"pose needs 7 values qw,qx,qy,qz,x,y,z, got {len(parts)}")
    try:
        qw, qx, qy, qz, x, y, z = (float(v) for v in parts)
        return Transform(UnitQuaternion(qw, qx, qy, qz), (x, y, z))
    except ValueError as exc:
        raise ParseError(f"bad pose: {exc}") from None


def _read_stamps(path) -> list:
    """One integer nanosecond stamp per line; '#' comments allowed."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append(int(line))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: stamps must be integers") from None
    return out


def _read_xyz_csv(path, header) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [h.strip() for h in first] != header:
            raise ParseError(f"{path}: expected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}:{lineno}: expected {len(header)} columns")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad numeric value") from None
    return np.array(rows, dtype=float).reshape(-1, len(header))


def _import_graph(path):
    if str(path).endswith(".json"):
        return tfgraph.import_calibration_json(path)
    return tfgraph.import_calibration(path)


def _fit_or_none(fit):
    if fit is None:
        return None
    return {
        "free_slope": fit.free_slope,
        "n_points": fit.n_points,
        "tau_max_s": fit.tau_max_s,
        "tau_min_s": fit.tau_min_s,
        "value": fit.value,
    }


# ----------------------------------------------------------- configuration


def _load_config(path, known_sections) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: bad YAML: {exc}") from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: config must be a mapping of subcommand sections")
    unknown = set(doc) - set(known_sections)
    if unknown:
        raise ParseError(f"{path}: unknown config sections {sorted(unknown)}")
    for section, values in doc.items():
        if not isinstance(values, dict):
            raise ParseError(f"{path}: section {section!r} must be a mapping")
    return doc


def _merge_config(args, defaults: dict, config_section: dict, section_name: str):
    """Resolution order: explicit flag > config value > built-in default.

    Every argparse option carries default=None, so a None attribute
    means 'not given on the command line'.
    """
    unknown = set(config_section) - set(defaults)
    if unknown:
        raise ParseError(
            f"config section {section_name!r}: unknown keys {sorted(unknown)}"
        )
    for key, builtin in defaults.items():
        if getattr(args, key, None) is None:
            value = config_section.get(key, builtin)
            setattr(args, key, value)
    return args


# --------------------------------------------------------------- tf group


def _cmd_tf_assemble(args, out):
    edges = []
    for path in _require(args, "edges"):
        g = _import_graph(path)
        edges.extend(g.edges)
    root = _require(args, "root")
    graph = tfgraph.FrameGraph(root=root, edges=())
    for e in edges:
        graph = tfgraph.add_edge(graph, e)

    report = tfgraph.validate(graph)
    if not report.valid:
        for msg in report.errors:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_DOMAIN

    out_path = _require(args, "out")
    tfgraph.export_calibration(graph, out_path)

    inputs = {f"edges[{i}]": p for i, p in enumerate(args.edges)}
    payload = {
        "frames": sorted(graph.frames),
        "n_edges": len(graph.edges),
        "out": str(out_path),
        "root": root,
    }
    if args.output == "json":
        _emit_json(_envelope("tf assemble", inputs, payload), out)
    elif args.output == "csv":
        _emit_csv(
            ["out", "root", "n_frames", "n_edges"],
            [[str(out_path), root, len(graph.frames), len(graph.edges)]],
            out,
        )
    else:
        out.write(
            f"wrote {out_path}: root {root}, "
            f"{len(graph.frames)} frames, {len(graph.edges)} edges\n"
        )
    return EXIT_OK


def _parse_pairs(text: str) -> list:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ParseError(f"pair {item!r} must be formatted parent:child")
        a, b = item.split(":", 1)
        pairs.append((a.strip(), b.strip()))
    if not pairs:
        raise ParseError("no pairs given")
    return pairs


def _cmd_tf_diff(args, out):
    ga = _import_graph(_require(args, "a"))
    gb = _import_graph(_require(args, "b"))
    if args.pairs is not None:
        pairs = _parse_pairs(args.pairs)
    else:
        common = sorted(ga.frames & gb.frames)
        pairs = [(ga.root, f) for f in common if f != ga.root]
        if not pairs:
            raise DomainError("graphs share no frames to compare")
    diffs = tfgraph.diff_graphs(ga, gb, pairs)

    inputs = {"a": args.a, "b": args.b}
    rows = [
        {
            "angular_diff_deg": round(d.angular_diff_deg, 6),
            "frame_a": d.frame_a,
            "frame_b": d.frame_b,
            "position_diff_m": round(d.position_diff_m, 6),
        }
        for d in diffs
    ]
    if args.output == "json":
        _emit_json(_envelope("tf diff", inputs, {"rows": rows}), out)
    elif args.output == "csv":
        _emit_csv(
            ["frame_a", "frame_b", "position_diff_m", "angular_diff_deg"],
            [
                [d.frame_a, d.frame_b, f"{d.position_diff_m:.6f}", f"{d.angular_diff_deg:.6f}"]
                for d in diffs
            ],
            out,
        )
    else:
        for d in diffs:
            out.write(
                f"{d.frame_a} -> {d.frame_b}: "
                f"{d.position_diff_m:.6f} m  {d.angular_diff_deg:.6f} deg\n"
            )
    return EXIT_OK


# ------------------------------------------------------------- sync group


def _clock_kind(name: str) -> clocks.ClockDomainKind:
    try:
        return clocks.ClockDomainKind(name)
    except ValueError:
        raise ParseError(f"unknown clock domain {name!r}") from None


def _cmd_sync_fit(args, out):
    pairs = clocks.read_correspondences(_require(args, "input"))
    model = clocks.fit_clock_model(
        pairs,
        source=_clock_kind(args.source),
        target=_clock_kind(args.target),
        robust=bool(args.robust),
    )
    if args.model_out is not None:
        clocks.write_model(model, args.model_out)

    payload = {
        "anchor_ns": model.anchor_ns,
        "n_pairs": len(pairs),
        "offset_ns": model.offset_ns,
        "rms_residual_ns": model.rms_residual_ns,
        "skew": model.skew,
        "skew_minus_one": model.skew_minus_one,
        "source": model.source.value,
        "target": model.target.value,
    }
    if args.output == "json":
        _emit_json(_envelope("sync fit", {"input": args.input}, payload), out)
    elif args.output == "csv":
        _emit_csv(
            ["offset_ns", "skew", "rms_residual_ns", "n_pairs"],
            [[model.offset_ns, repr(model.skew), repr(model.rms_residual_ns), len(pairs)]],
            out,
        )
    else:
        out.write(
            f"{model.source.value} -> {model.target.value}: "
            f"offset {model.offset_ns} ns, skew {model.skew!r} "
            f"(skew-1 = {model.skew_minus_one:.3e}), "
            f"rms residual {model.rms_residual_ns:.1f} ns, {len(pairs)} pairs\n"
        )
    return EXIT_OK


def _cmd_sync_convert(args, out):
    model = clocks.read_model(_require(args, "model"))
    raw = _read_stamps(_require(args, "input"))
    converted = [clocks.convert(model, s) for s in raw]

    target = out
    opened = None
    if args.out is not None:
        opened = open(args.out, "w", encoding="utf-8", newline="\n")
        target = opened
    try:
        if args.output == "json":
            payload = {"stamps": [[r, c] for r, c in zip(raw, converted)]}
            _emit_json(
                _envelope("sync convert", {"input": args.input, "model": args.model}, payload),
                target,
            )
        elif args.output == "csv":
            _emit_csv(["raw_ns", "converted_ns"], zip(raw, converted), target)
        else:
            for c in converted:
                target.write(f"{c}\n")
    finally:
        if opened is not None:
            opened.close()
    return EXIT_OK


def _cmd_sync_report(args, out):
    specs = _require(args, "stream")
    streams = {}
    inputs = {}
    for item in specs:
        if "=" not in item:
            raise ParseError(f"--stream needs NAME=PATH, got {item!r}")
        name, path = item.split("=", 1)
        if name in streams:
            raise ParseError(f"duplicate stream name {name!r}")
        streams[name] = _read_stamps(path)
        inputs[f"stream:{name}"] = path
    window_ns = None
    if args.window_ms is not None:
        window_ns = int(float(args.window_ms) * 1e6)
    report = clocks.sync_quality(streams, window_ns=window_ns)

    rows = [
        {
            "max_offset_ns": p.max_offset_ns,
            "n_events": p.n_events,
            "p95_offset_ns": p.p95_offset_ns,
            "stream_a": p.stream_a,
            "stream_b": p.stream_b,
        }
        for p in report.pairs
    ]
    payload = {
        "flagged": report.flagged,
        "pairs": rows,
        "worst_pair": [report.worst_pair.stream_a, report.worst_pair.stream_b],
    }
    if args.output == "json":
        _emit_json(_envelope("sync report", inputs, payload), out)
    elif args.output == "csv":
        _emit_csv(
            ["stream_a", "stream_b", "max_offset_ns", "p95_offset_ns", "n_events"],
            [
                [p.stream_a, p.stream_b, p.max_offset_ns, p.p95_offset_ns, p.n_events]
                for p in report.pairs
            ],
            out,
        )
    else:
        for p in report.pairs:
            out.write(
                f"{p.stream_a} / {p.stream_b}: max {p.max_offset_ns} ns, "
                f"p95 {p.p95_offset_ns} ns over {p.n_events} events\n"
            )
        state = "FLAGGED (worst offset > 1 ms)" if report.flagged else "ok"
        out.write(
            f"worst pair {report.worst_pair.stream_a} / "
            f"{report.worst_pair.stream_b}: {state}\n"
        )
    return EXIT_OK


# -------------------------------------------------------------- imu group


def _cmd_imu_allan(args, out):
    log = allan.read_imu_csv(_require(args, "input"), rate_hz=args.rate)
    sensors = {}
    if args.sensor in ("gyro", "both"):
        sensors["gyro"] = log.gyro
    if args.sensor in ("accel", "both"):
        sensors["accel"] = log.accel

    payload = {"rate_hz": log.rate_hz, "sensors": {}}
    rows = []
    for name, block in sensors.items():
        curves, density_fits, walk_fits = allan.characterize_axes(block, log.rate_hz)
        params = allan.aggregate_params(density_fits, walk_fits)
        payload["sensors"][name] = {
            "axes": [
                {
                    "axis": "xyz"[i],
                    "noise_density": _fit_or_none(density_fits[i]),
                    "random_walk": _fit_or_none(walk_fits[i]),
                }
                for i in range(3)
            ],
            "noise_density": params.noise_density,
            "random_walk": params.random_walk,
        }
        rows.append(
            [
                name,
                "" if params.noise_density is None else repr(params.noise_density),
                "" if params.random_walk is None else repr(params.random_walk),
            ]
        )
        if args.curve_dir is not None:
            os.makedirs(args.curve_dir, exist_ok=True)
            for i, c in enumerate(curves):
                allan.write_curve_csv(
                    c, os.path.join(args.curve_dir, f"{name}_{'xyz'[i]}.csv")
                )

    if args.output == "json":
        _emit_json(_envelope("imu allan", {"input": args.input}, payload), out)
    elif args.output == "csv":
        _emit_csv(["sensor", "noise_density", "random_walk"], rows, out)
    else:
        for name, dens, walk in rows:
            out.write(
                f"{name}: noise density {dens or 'n/a'}, random walk {walk or 'n/a'}\n"
            )
    return EXIT_OK


# -------------------------------------------------------------- cam group


def _select_camera(records, camera_id):
    if camera_id is None:
        if len(records) != 1:
            raise ParseError("--camera-id required when the file defines several cameras")
        return records[0]
    for rec in records:
        if rec["camera_id"] == camera_id:
            return rec
    raise DomainError(f"no camera {camera_id!r} in camera file")


def _cmd_cam_reproj(args, out):
    records = camera.read_camera_file(_require(args, "camera"))
    rec = _select_camera(records, args.camera_id)
    points = _read_xyz_csv(_require(args, "points"), ["x", "y", "z"])
    pixels = _read_xyz_csv(_require(args, "observations"), ["u", "v"])
    if len(points) != len(pixels):
        raise ParseError(
            f"{len(points)} points vs {len(pixels)} observations; counts must match"
        )
    pose = _parse_pose(args.pose) if args.pose is not None else Transform.identity()
    stats = camera.reprojection_stats(
        list(zip(pixels, points)), pose, rec["intrinsics"]
    )

    inputs = {
        "camera": args.camera,
        "observations": args.observations,
        "points": args.points,
    }
    payload = {
        "camera_id": rec["camera_id"],
        "max_px": round(stats.max_px, 6),
        "mean_px": round(stats.mean_px, 6),
        "n_points": stats.n_points,
        "std_px": round(stats.std_px, 6),
    }
    if args.output == "json":
        _emit_json(_envelope("cam reproj", inputs, payload), out)
    elif args.output == "csv":
        _emit_csv(
            ["camera_id", "mean_px", "std_px", "max_px", "n_points"],
            [[rec["camera_id"], f"{stats.mean_px:.6f}", f"{stats.std_px:.6f}",
              f"{stats.max_px:.6f}", stats.n_points]],
            out,
        )
    else:
        out.write(
            f"{rec['camera_id']}: mean {stats.mean_px:.6f} px, "
            f"std {stats.std_px:.6f} px, max {stats.max_px:.6f} px "
            f"over {stats.n_points} points\n"
        )
    return EXIT_OK


# ------------------------------------------------------------ cloud group


def _cmd_cloud_colorize(args, out):
    from .pointcloud import read_ply, write_ply

    cloud = read_ply(_require(args, "cloud"))
    graph = _import_graph(_require(args, "calib"))
    records = camera.read_camera_file(_require(args, "cameras"))
    by_id = {rec["camera_id"]: rec for rec in records}
    cloud_frame = _require(args, "cloud_frame")

    image_specs = _require(args, "image")
    cams = []
    inputs = {
        "calib": args.calib,
        "cameras": args.cameras,
        "cloud": args.cloud,
    }
    for item in image_specs:
        if "=" not in item:
            raise ParseError(f"--image needs CAMERA_ID=PATH, got {item!r}")
        cam_id, path = item.split("=", 1)
        if cam_id not in by_id:
            raise DomainError(f"no camera {cam_id!r} in camera file")
        rec = by_id[cam_id]
        img = camera.load_image(path)
        # colorize_cloud wants camera-from-cloud: p_cam = R p_cloud + t
        pose = tfgraph.lookup(graph, rec["frame"], cloud_frame)
        cams.append((cam_id, pose, rec["intrinsics"], img))
        inputs[f"image:{cam_id}"] = path

    colored = camera.colorize_cloud(cloud, cams, chunk_size=args.chunk_size)
    out_path = _require(args, "out")
    write_ply(colored, out_path)

    counts = {}
    for cid in colored.camera_ids:
        key = cid if cid is not None else "(none)"
        counts[key] = counts.get(key, 0) + 1
    payload = {
        "n_points": len(colored),
        "out": str(out_path),
        "per_camera_points": {k: counts[k] for k in sorted(counts)},
    }
    if args.output == "json":
        _emit_json(_envelope("cloud colorize", inputs, payload), out)
    elif args.output == "csv":
        _emit_csv(
            ["camera_id", "points"],
            [[k, counts[k]] for k in sorted(counts)],
            out,
        )
    else:
        out.write(f"wrote {out_path}: {len(colored)} points\n")
        for k in sorted(counts):
            out.write(f"  {k}: {counts[k]}\n")
    return EXIT_OK


# ------------------------------------------------------------- eval group


def _cmd_eval_ate(args, out):
    gt = trajectory.load_trajectory(_require(args, "gt"))
    est = trajectory.load_trajectory(_require(args, "est"))
    max_dt_ns = int(float(args.max_dt_ms) * 1e6)
    report = trajectory.ate(
        gt,
        est,
        max_dt_ns=max_dt_ns,
        with_scale=bool(args.with_scale),
        align=not args.no_align,
    )

    inputs = {"est": args.est, "gt": args.gt}
    if args.output == "json":
        payload = trajectory.report_json_dict(report)
        _emit_json(_envelope("eval ate", inputs, payload), out)
    elif args.output == "csv":
        out.write(trajectory.ATE_CSV_HEADER + "\n")
        out.write(trajectory.report_csv_row(report) + "\n")
    else:
        out.write(
            f"rmse {report.rmse_m:.6f} m, std {report.std_m:.6f} m, "
            f"mean {report.mean_m:.6f} m, median {report.median_m:.6f} m, "
            f"max {report.max_m:.6f} m over {report.n_pairs} pairs\n"
        )
    return EXIT_OK


# ---------------------------------------------------------- dataset group


def _cmd_dataset_validate(args, out):
    root = _require(args, "dir")
    policy = dataset.ValidationPolicy(
        rate_tol=float(args.rate_tol),
        gap_factor=float(args.gap_factor),
        overlap=float(args.overlap),
    )
    report = dataset.validate_sequence(root, policy)

    inputs = {"dir": root}
    if args.output == "json":
        _emit_json(_envelope("dataset validate", inputs, dataset.report_json_dict(report)), out)
    elif args.output == "csv":
        _emit_csv(
            ["severity", "stream_id", "record_index", "message"],
            [
                [f.severity, f.stream_id,
                 "" if f.record_index is None else f.record_index, f.message]
                for f in report.findings
            ],
            out,
        )
    else:
        out.write(dataset.format_report_text(report) + "\n")
    return EXIT_OK if report.ok else EXIT_DOMAIN


def _cmd_dataset_stats(args, out):
    root = _require(args, "dir")
    stats = dataset.sequence_stats(root)
    inputs = {"dir": root}
    if args.output == "json":
        _emit_json(_envelope("dataset stats", inputs, dataset.stats_json_dict(stats)), out)
    elif args.output == "csv":
        _emit_csv(
            ["stream_id", "kind", "count", "measured_rate_hz", "gap_count", "max_gap_s"],
            [
                [s.stream_id, s.kind, s.count,
                 "" if s.measured_rate_hz is None else f"{s.measured_rate_hz:.6f}",
                 s.gap_count, f"{s.max_gap_s:.6f}"]
                for s in stats.streams
            ],
            out,
        )
    else:
        out.write(dataset.format_stats_text(stats) + "\n")
    return EXIT_OK


# ------------------------------------------------------------ parser setup


def _add_output_flag(parser):
    parser.add_argument(
        "--output", choices=OUTPUT_MODES, default=None,
        help="report format (default: text)",
    )


_COMMON_DEFAULTS = {"output": "text"}


def build_parser():
    """Returns (parser, {section_name: (subparser, defaults)})."""
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Sensor-rig toolkit: transform trees, clock sync, IMU "
        "noise, reprojection, colorization, trajectory evaluation, and "
        "dataset integrity.",
    )
    parser.add_argument(
        "--config",
        default=None,
        help=f"YAML config file; flags override it (default: ${CONFIG_ENV_VAR})",
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)
    registry = {}

    def register(group_parsers, group, sub, func, defaults, help_text):
        p = group_parsers.add_parser(sub, help=help_text)
        _add_output_flag(p)
        merged = dict(_COMMON_DEFAULTS)
        merged.update(defaults)
        p.set_defaults(func=func, section=f"{group} {sub}")
        registry[f"{group} {sub}"] = (p, merged)
        return p

    # tf ------------------------------------------------------------------
    tf = groups.add_parser("tf", help="transformation-tree assembly and diffs")
    tf_sub = tf.add_subparsers(dest="sub", required=True)

    p = register(tf_sub, "tf", "assemble", _cmd_tf_assemble,
                 {"edges": None, "root": None, "out": None},
                 "merge edge files into one validated calibration tree")
    p.add_argument("--edges", nargs="+", default=None,
                   help="calibration files (text or .json) providing edges")
    p.add_argument("--root", default=None, help="root frame of the assembled tree")
    p.add_argument("--out", default=None, help="output calibration file")

    p = register(tf_sub, "tf", "diff", _cmd_tf_diff,
                 {"a": None, "b": None, "pairs": None},
                 "position/angle differences between two calibration trees")
    p.add_argument("--a", default=None, help="first calibration file")
    p.add_argument("--b", default=None, help="second calibration file")
    p.add_argument("--pairs", default=None,
                   help="comma list parent:child (default: root to every shared frame)")

    # sync ----------------------------------------------------------------
    sync = groups.add_parser("sync", help="clock-domain fitting and conversion")
    sync_sub = sync.add_subparsers(dest="sub", required=True)

    p = register(sync_sub, "sync", "fit", _cmd_sync_fit,
                 {"input": None, "source": "tsc", "target": "ptp",
                  "robust": False, "model_out": None},
                 "fit an affine clock model to stamp correspondences")
    p.add_argument("--input", default=None, help="CSV with header source_ns,target_ns")
    p.add_argument("--source", default=None, choices=[k.value for k in clocks.ClockDomainKind],
                   help="source clock domain (default: tsc)")
    p.add_argument("--target", default=None, choices=[k.value for k in clocks.ClockDomainKind],
                   help="target clock domain (default: ptp)")
    p.add_argument("--robust", action="store_const", const=True, default=None,
                   help="drop >3-sigma residuals and refit once")
    p.add_argument("--model-out", default=None, help="write the fitted model JSON here")

    p = register(sync_sub, "sync", "convert", _cmd_sync_convert,
                 {"model": None, "input": None, "out": None},
                 "convert raw stamps through a fitted model")
    p.add_argument("--model", default=None, help="model JSON from 'sync fit'")
    p.add_argument("--input", default=None, help="file with one raw stamp (ns) per line")
    p.add_argument("--out", default=None, help="write converted stamps here instead of stdout")

    p = register(sync_sub, "sync", "report", _cmd_sync_report,
                 {"stream": None, "window_ms": None},
                 "cross-stream nearest-event offset quality report")
    p.add_argument("--stream", action="append", default=None, metavar="NAME=PATH",
                   help="named stamp file (one ns stamp per line); repeatable")
    p.add_argument("--window-ms", type=float, default=None,
                   help="ignore offsets beyond this window")

    # imu -----------------------------------------------------------------
    imu = groups.add_parser("imu", help="IMU noise characterization")
    imu_sub = imu.add_subparsers(dest="sub", required=True)

    p = register(imu_sub, "imu", "allan", _cmd_imu_allan,
                 {"input": None, "rate": None, "sensor": "both", "curve_dir": None},
                 "Allan-deviation noise characterization of a static log")
    p.add_argument("--input", default=None,
                   help="CSV with header t_ns,gx,gy,gz,ax,ay,az")
    p.add_argument("--rate", type=float, default=None,
                   help="sample rate in Hz (default: inferred from stamps)")
    p.add_argument("--sensor", choices=["gyro", "accel", "both"], default=None,
                   help="which sensor block to characterize (default: both)")
    p.add_argument("--curve-dir", default=None,
                   help="write per-axis tau/adev CSV curves into this directory")

    # cam -----------------------------------------------------------------
    cam = groups.add_parser("cam", help="camera model statistics")
    cam_sub = cam.add_subparsers(dest="sub", required=True)

    p = register(cam_sub, "cam", "reproj", _cmd_cam_reproj,
                 {"camera": None, "camera_id": None, "points": None,
                  "observations": None, "pose": None},
                 "reprojection-error statistics for observed pixel/point pairs")
    p.add_argument("--camera", default=None, help="camera definition JSON")
    p.add_argument("--camera-id", default=None,
                   help="camera to use when the file defines several")
    p.add_argument("--points", default=None, help="CSV with header x,y,z")
    p.add_argument("--observations", default=None, help="CSV with header u,v")
    p.add_argument("--pose", default=None,
                   help="world-to-camera pose qw,qx,qy,qz,x,y,z (default: identity)")

    # cloud ---------------------------------------------------------------
    cloud = groups.add_parser("cloud", help="point-cloud operations")
    cloud_sub = cloud.add_subparsers(dest="sub", required=True)

    p = register(cloud_sub, "cloud", "colorize", _cmd_cloud_colorize,
                 {"cloud": None, "calib": None, "cameras": None, "image": None,
                  "cloud_frame": None, "out": None, "chunk_size": None},
                 "project camera colors onto a PLY cloud")
    p.add_argument("--cloud", default=None, help="input PLY point cloud")
    p.add_argument("--calib", default=None, help="calibration tree with all frames")
    p.add_argument("--cameras", default=None, help="camera definition JSON")
    p.add_argument("--image", action="append", default=None, metavar="CAMERA_ID=PATH",
                   help="image for one camera; repeatable")
    p.add_argument("--cloud-frame", default=None, help="frame the cloud is expressed in")
    p.add_argument("--out", default=None, help="output PLY with colors")
    p.add_argument("--chunk-size", type=int, default=None,
                   help="points per processing chunk (result is identical)")

    # eval ----------------------------------------------------------------
    ev = groups.add_parser("eval", help="trajectory evaluation")
    ev_sub = ev.add_subparsers(dest="sub", required=True)

    p = register(ev_sub, "eval", "ate", _cmd_eval_ate,
                 {"gt": None, "est": None, "max_dt_ms": 20.0,
                  "with_scale": False, "no_align": False},
                 "absolute trajectory error after association and alignment")
    p.add_argument("--gt", default=None, help="ground-truth trajectory (t x y z qx qy qz qw)")
    p.add_argument("--est", default=None, help="estimated trajectory (same format)")
    p.add_argument("--max-dt-ms", type=float, default=None,
                   help="association window in milliseconds (default: 20)")
    p.add_argument("--with-scale", action="store_const", const=True, default=None,
                   help="also estimate a similarity scale")
    p.add_argument("--no-align", action="store_const", const=True, default=None,
                   help="score residuals without rigid alignment")

    # dataset -------------------------------------------------------------
    ds = groups.add_parser("dataset", help="sequence container tools")
    ds_sub = ds.add_subparsers(dest="sub", required=True)

    p = register(ds_sub, "dataset", "validate", _cmd_dataset_validate,
                 {"dir": None, "rate_tol": 0.10, "gap_factor": 3.0, "overlap": 0.99},
                 "integrity scan of a sequence directory (exit 3 on errors)")
    p.add_argument("--dir", default=None, help="sequence directory")
    p.add_argument("--rate-tol", type=float, default=None,
                   help="allowed relative rate deviation (default: 0.10)")
    p.add_argument("--gap-factor", type=float, default=None,
                   help="gap warning threshold in nominal periods (default: 3.0)")
    p.add_argument("--overlap", type=float, default=None,
                   help="required per-stream span coverage (default: 0.99)")

    p = register(ds_sub, "dataset", "stats", _cmd_dataset_stats,
                 {"dir": None},
                 "duration, rates, sizes, and trajectory length of a sequence")
    p.add_argument("--dir", default=None, help="sequence directory")

    return parser, registry


def main(argv=None) -> int:
    parser, registry = build_parser()
    try:
        args = parser.parse_args(argv)
        config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
        config = {}
        if config_path:
            config = _load_config(config_path, registry.keys())
        _, defaults = registry[args.section]
        _merge_config(args, defaults, config.get(args.section, {}), args.section)
        if args.output not in OUTPUT_MODES:
            raise ParseError(f"output must be one of {OUTPUT_MODES}")
        return int(args.func(args, sys.stdout))
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, RigkitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
