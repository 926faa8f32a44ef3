"""Portable on-disk sequence container.

Layout: a sequence is a directory holding `manifest.json` plus one
subdirectory per stream with an `index.csv` (columns `stamp_ns,file,bytes`)
and the payload files: PNG for images, binary PLY for scans, a single
`data.csv` chunk for IMU samples, trajectory text for ground truth.
Everything is written canonically so a write/read/write cycle is
byte-identical.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .clocks import ClockDomainKind
from .errors import (
    CorruptRecordError,
    EmptySequenceError,
    MissingManifestError,
    ParseError,
    SchemaError,
    UnknownStreamError,
)
from .pointcloud import PointCloud, read_ply, write_ply
from .se3 import Transform, UnitQuaternion
from .trajectory import (
    Trajectory,
    _parse_stamp_ns,
    load_trajectory,
    save_trajectory,
    trajectory_length,
)

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"
INDEX_NAME = "index.csv"
INDEX_HEADER = ["stamp_ns", "file", "bytes"]
IMU_CHUNK_NAME = "data.csv"
TRAJECTORY_CHUNK_NAME = "poses.txt"

STREAM_KINDS = ("camera", "imu", "lidar", "trajectory")
SCENARIOS = ("indoor", "outdoor")
CHUNKED_KINDS = ("imu", "trajectory")  # stamps live inside the payload

SEV_ERROR = "error"
SEV_WARNING = "warning"


def _check_name(name: str, what: str) -> str:
    if not name or any(c in name for c in "/\\") or name in (".", ".."):
        raise ValueError(f"bad {what}: {name!r}")
    return name


# ------------------------------------------------------------------- types


@dataclass(frozen=True)
class SensorSpec:
    stream_id: str
    kind: str
    frame: str
    nominal_rate_hz: float = None

    def __post_init__(self):
        _check_name(self.stream_id, "stream_id")
        if self.kind not in STREAM_KINDS:
            raise ValueError(f"unknown stream kind {self.kind!r}")
        if not self.frame:
            raise ValueError("frame must be non-empty")
        if self.kind == "trajectory":
            if self.nominal_rate_hz is not None and self.nominal_rate_hz <= 0:
                raise ValueError("nominal_rate_hz must be > 0 when given")
        else:
            if self.nominal_rate_hz is None or self.nominal_rate_hz <= 0:
                raise ValueError(f"{self.kind} stream needs nominal_rate_hz > 0")


@dataclass(frozen=True)
class SequenceManifest:
    sequence_id: str
    scenario: str
    description: str
    clock: ClockDomainKind
    streams: tuple

    def __post_init__(self):
        if not self.sequence_id:
            raise ValueError("sequence_id must be non-empty")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if not isinstance(self.clock, ClockDomainKind):
            raise ValueError("clock must be a ClockDomainKind")
        streams = tuple(self.streams)
        if not streams:
            raise ValueError("need at least one stream")
        ids = [s.stream_id for s in streams]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate stream_id")
        object.__setattr__(self, "streams", streams)

    def stream(self, stream_id: str) -> SensorSpec:
        for s in self.streams:
            if s.stream_id == stream_id:
                return s
        raise UnknownStreamError(f"no stream {stream_id!r} in manifest")


@dataclass(frozen=True)
class IndexRecord:
    stamp_ns: int
    file: str
    bytes: int


@dataclass(frozen=True)
class StreamIndex:
    stream_id: str
    records: tuple


@dataclass(frozen=True)
class ImuRecord:
    stamp_ns: int
    gyro: tuple
    accel: tuple


@dataclass(frozen=True)
class ImageRecord:
    stamp_ns: int
    path: str
    bytes: int


@dataclass(frozen=True)
class LidarRecord:
    stamp_ns: int
    cloud: PointCloud


@dataclass(frozen=True)
class PoseRecord:
    stamp_ns: int
    pose: Transform


@dataclass(frozen=True)
class Finding:
    severity: str  # SEV_ERROR or SEV_WARNING
    stream_id: str
    record_index: int  # None for stream-level findings
    message: str


@dataclass(frozen=True)
class SequenceReport:
    sequence_id: str
    findings: tuple

    @property
    def errors(self):
        return tuple(f for f in self.findings if f.severity == SEV_ERROR)

    @property
    def warnings(self):
        return tuple(f for f in self.findings if f.severity == SEV_WARNING)

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class ValidationPolicy:
    rate_tol: float = 0.10
    gap_factor: float = 3.0
    overlap: float = 0.99


@dataclass(frozen=True)
class StreamStats:
    stream_id: str
    kind: str
    count: int
    bytes: int
    first_ns: int = None
    last_ns: int = None
    measured_rate_hz: float = None
    gap_count: int = 0
    max_gap_s: float = 0.0


@dataclass(frozen=True)
class SequenceStats:
    sequence_id: str
    duration_s: float
    total_bytes: int
    streams: tuple
    trajectory_length_m: float = None


# ---------------------------------------------------------------- manifest


def _manifest_to_dict(manifest: SequenceManifest) -> dict:
    return {
        "format_version": MANIFEST_VERSION,
        "sequence_id": manifest.sequence_id,
        "scenario": manifest.scenario,
        "description": manifest.description,
        "clock": manifest.clock.value,
        "streams": [
            {
                "stream_id": s.stream_id,
                "kind": s.kind,
                "frame": s.frame,
                "nominal_rate_hz": s.nominal_rate_hz,
            }
            for s in manifest.streams
        ],
    }


def write_manifest(root, manifest: SequenceManifest) -> None:
    path = os.path.join(root, MANIFEST_NAME)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_manifest_to_dict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


_MANIFEST_KEYS = {
    "format_version", "sequence_id", "scenario", "description", "clock", "streams",
}
_STREAM_KEYS = {"stream_id", "kind", "frame", "nominal_rate_hz"}


def read_manifest(root) -> SequenceManifest:
    path = os.path.join(root, MANIFEST_NAME)
    if not os.path.isfile(path):
        raise MissingManifestError(f"{path}: not found")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: manifest must be a JSON object")
    unknown = set(raw) - _MANIFEST_KEYS
    if unknown:
        raise SchemaError(f"{path}: unknown keys {sorted(unknown)}")
    missing = _MANIFEST_KEYS - set(raw)
    if missing:
        raise SchemaError(f"{path}: missing keys {sorted(missing)}")
    if raw["format_version"] != MANIFEST_VERSION:
        raise SchemaError(f"{path}: unsupported format_version {raw['format_version']!r}")
    if not isinstance(raw["streams"], list):
        raise SchemaError(f"{path}: streams must be a list")
    streams = []
    for i, s in enumerate(raw["streams"]):
        if not isinstance(s, dict):
            raise SchemaError(f"{path}: stream {i} must be an object")
        unknown = set(s) - _STREAM_KEYS
        if unknown:
            raise SchemaError(f"{path}: stream {i}: unknown keys {sorted(unknown)}")
        missing = _STREAM_KEYS - set(s)
        if missing:
            raise SchemaError(f"{path}: stream {i}: missing keys {sorted(missing)}")
        try:
            streams.append(
                SensorSpec(
                    stream_id=s["stream_id"],
                    kind=s["kind"],
                    frame=s["frame"],
                    nominal_rate_hz=s["nominal_rate_hz"],
                )
            )
        except (ValueError, TypeError) as exc:
            raise SchemaError(f"{path}: stream {i}: {exc}") from None
    try:
        clock = ClockDomainKind(raw["clock"])
    except ValueError:
        raise SchemaError(f"{path}: unknown clock {raw['clock']!r}") from None
    try:
        return SequenceManifest(
            sequence_id=raw["sequence_id"],
            scenario=raw["scenario"],
            description=raw["description"],
            clock=clock,
            streams=tuple(streams),
        )
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{path}: {exc}") from None


# ------------------------------------------------------------------- index


def _write_index(stream_dir, records) -> None:
    path = os.path.join(stream_dir, INDEX_NAME)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(INDEX_HEADER)
        for rec in records:
            writer.writerow([rec.stamp_ns, rec.file, rec.bytes])


def read_stream_index(root, stream_id: str) -> StreamIndex:
    path = os.path.join(root, stream_id, INDEX_NAME)
    if not os.path.isfile(path):
        raise ParseError(f"{path}: not found")
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != INDEX_HEADER:
            raise ParseError(f"{path}: expected header {','.join(INDEX_HEADER)}")
        for i, row in enumerate(reader):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise CorruptRecordError(f"{path}: record {i}: expected 3 columns")
            try:
                name = _check_name(row[1], "payload name")
                records.append(IndexRecord(int(row[0]), name, int(row[2])))
            except ValueError:
                raise CorruptRecordError(f"{path}: record {i}: bad value") from None
    return StreamIndex(stream_id=stream_id, records=tuple(records))


# ------------------------------------------------------------------ writer


class SequenceWriter:
    """Single-owner writer for one sequence directory.

    Records are sorted by stamp before writing so the produced layout
    always satisfies the monotonicity invariant.
    """

    def __init__(self, root, manifest: SequenceManifest):
        self.root = str(root)
        self.manifest = manifest
        os.makedirs(self.root, exist_ok=True)
        write_manifest(self.root, manifest)

    def _stream_dir(self, stream_id: str, kind: str) -> str:
        spec = self.manifest.stream(stream_id)
        if spec.kind != kind:
            raise ValueError(f"stream {stream_id!r} is {spec.kind}, not {kind}")
        d = os.path.join(self.root, stream_id)
        os.makedirs(d, exist_ok=True)
        return d

    def add_images(self, stream_id: str, records) -> None:
        """records: iterable of (stamp_ns, png_bytes)."""
        d = self._stream_dir(stream_id, "camera")
        rows = []
        for i, (stamp, blob) in enumerate(sorted(records, key=lambda r: r[0])):
            name = f"{i:06d}.png"
            with open(os.path.join(d, name), "wb") as fh:
                fh.write(blob)
            rows.append(IndexRecord(int(stamp), name, len(blob)))
        _write_index(d, rows)

    def add_clouds(self, stream_id: str, records) -> None:
        """records: iterable of (stamp_ns, PointCloud)."""
        d = self._stream_dir(stream_id, "lidar")
        rows = []
        for i, (stamp, cloud) in enumerate(sorted(records, key=lambda r: r[0])):
            name = f"{i:06d}.ply"
            path = os.path.join(d, name)
            write_ply(cloud, path)
            rows.append(IndexRecord(int(stamp), name, os.path.getsize(path)))
        _write_index(d, rows)

    def add_imu(self, stream_id: str, stamps_ns, gyro, accel) -> None:
        """stamps (n,), gyro (3, n), accel (3, n); one CSV chunk."""
        d = self._stream_dir(stream_id, "imu")
        stamps = [int(s) for s in stamps_ns]
        g = np.asarray(gyro, dtype=float)
        a = np.asarray(accel, dtype=float)
        if g.shape != (3, len(stamps)) or a.shape != (3, len(stamps)):
            raise ValueError("gyro/accel must be (3, n) matching stamps")
        order = np.argsort(np.asarray(stamps, dtype=np.int64), kind="stable")
        path = os.path.join(d, IMU_CHUNK_NAME)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t_ns", "gx", "gy", "gz", "ax", "ay", "az"])
            for k in order:
                row = [stamps[k]] + [repr(float(v)) for v in (*g[:, k], *a[:, k])]
                writer.writerow(row)
        first = stamps[order[0]] if stamps else 0
        _write_index(d, [IndexRecord(first, IMU_CHUNK_NAME, os.path.getsize(path))])

    def add_trajectory(self, stream_id: str, traj: Trajectory) -> None:
        d = self._stream_dir(stream_id, "trajectory")
        path = os.path.join(d, TRAJECTORY_CHUNK_NAME)
        save_trajectory(traj, path)
        first = int(traj.stamps_ns[0])
        _write_index(d, [IndexRecord(first, TRAJECTORY_CHUNK_NAME, os.path.getsize(path))])


# ------------------------------------------------------------------ reader


def _iter_imu_chunk(path, lenient: bool):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and [h.strip() for h in header] != [
            "t_ns", "gx", "gy", "gz", "ax", "ay", "az",
        ]:
            raise CorruptRecordError(f"{path}: bad IMU chunk header")
        for i, row in enumerate(reader):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                if len(row) != 7:
                    raise ValueError("expected 7 columns")
                stamp = int(row[0])
                vals = [float(v) for v in row[1:]]
            except ValueError as exc:
                if lenient:
                    continue
                raise CorruptRecordError(f"{path}: record {i}: {exc}") from None
            yield ImuRecord(stamp, tuple(vals[0:3]), tuple(vals[3:6]))


def _iter_trajectory_chunk(path, lenient: bool):
    with open(path, "r", encoding="utf-8") as fh:
        i = -1
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            i += 1
            tok = line.split()
            try:
                if len(tok) != 8:
                    raise ValueError(f"expected 8 fields, got {len(tok)}")
                stamp = _parse_stamp_ns(tok[0])
                x, y, z, qx, qy, qz, qw = (float(v) for v in tok[1:])
                pose = Transform(UnitQuaternion(qw, qx, qy, qz), (x, y, z))
            except (ValueError, ArithmeticError) as exc:
                if lenient:
                    continue
                raise CorruptRecordError(f"{path}: record {i}: {exc}") from None
            yield PoseRecord(stamp, pose)


def open_stream(root, stream_id: str, lenient: bool = False):
    """Yield typed records for one stream, in stored order.

    IMU and trajectory streams store all samples in a single payload
    chunk; cameras yield file references, LiDAR yields parsed clouds.
    """
    manifest = read_manifest(root)
    spec = manifest.stream(stream_id)
    index = read_stream_index(root, stream_id)
    stream_dir = os.path.join(root, stream_id)

    if spec.kind in CHUNKED_KINDS:
        for rec in index.records:
            path = os.path.join(stream_dir, rec.file)
            if not os.path.isfile(path):
                if lenient:
                    continue
                raise CorruptRecordError(f"{path}: payload missing")
            it = _iter_imu_chunk if spec.kind == "imu" else _iter_trajectory_chunk
            yield from it(path, lenient)
        return

    for i, rec in enumerate(index.records):
        path = os.path.join(stream_dir, rec.file)
        if not os.path.isfile(path):
            if lenient:
                continue
            raise CorruptRecordError(f"{path}: record {i}: payload missing")
        if spec.kind == "camera":
            yield ImageRecord(rec.stamp_ns, path, rec.bytes)
        else:
            try:
                cloud = read_ply(path)
            except ParseError as exc:
                if lenient:
                    continue
                raise CorruptRecordError(f"record {i}: {exc}") from None
            yield LidarRecord(rec.stamp_ns, cloud)


def _stream_stamps(root, spec: SensorSpec, index: StreamIndex):
    """Stamps used for validation/stats: payload samples for chunked
    streams, index rows otherwise. Returns (stamps, parse_error_msg)."""
    if spec.kind not in CHUNKED_KINDS:
        return [r.stamp_ns for r in index.records], None
    stamps = []
    for rec in index.records:
        path = os.path.join(root, spec.stream_id, rec.file)
        if not os.path.isfile(path):
            return stamps, None  # missing payload reported separately
        try:
            it = _iter_imu_chunk if spec.kind == "imu" else _iter_trajectory_chunk
            stamps.extend(r.stamp_ns for r in it(path, lenient=False))
        except CorruptRecordError as exc:
            return stamps, str(exc)
    return stamps, None


# -------------------------------------------------------------- validation


def validate_sequence(root, policy: ValidationPolicy = ValidationPolicy()) -> SequenceReport:
    """Integrity scan. Monotonicity breaks and missing or corrupt
    payloads are errors; rate, gap, and overlap findings are warnings."""
    manifest = read_manifest(root)
    findings = []
    spans = {}

    for spec in manifest.streams:
        sid = spec.stream_id
        try:
            index = read_stream_index(root, sid)
        except ParseError as exc:
            findings.append(Finding(SEV_ERROR, sid, None, f"unreadable index: {exc}"))
            continue

        for i, rec in enumerate(index.records):
            path = os.path.join(root, sid, rec.file)
            if not os.path.isfile(path):
                findings.append(
                    Finding(SEV_ERROR, sid, i, f"missing payload {rec.file}")
                )
            elif os.path.getsize(path) != rec.bytes:
                findings.append(
                    Finding(
                        SEV_ERROR, sid, i,
                        f"payload {rec.file} is {os.path.getsize(path)} bytes, "
                        f"index says {rec.bytes}",
                    )
                )

        stamps, parse_err = _stream_stamps(root, spec, index)
        if parse_err is not None:
            findings.append(Finding(SEV_ERROR, sid, None, f"corrupt payload: {parse_err}"))

        for i in range(1, len(stamps)):
            if stamps[i] < stamps[i - 1]:
                findings.append(
                    Finding(
                        SEV_ERROR, sid, i,
                        f"stamp {stamps[i]} at record {i} before {stamps[i - 1]}",
                    )
                )

        if stamps:
            spans[sid] = (min(stamps), max(stamps))

        if spec.nominal_rate_hz and len(stamps) >= 2:
            period_ns = 1e9 / spec.nominal_rate_hz
            span_ns = max(stamps) - min(stamps)
            if span_ns > 0:
                measured = (len(stamps) - 1) / (span_ns / 1e9)
                dev = abs(measured - spec.nominal_rate_hz) / spec.nominal_rate_hz
                if dev > policy.rate_tol:
                    findings.append(
                        Finding(
                            SEV_WARNING, sid, None,
                            f"measured rate {measured:.3f} Hz deviates "
                            f"{dev * 100:.1f}% from nominal {spec.nominal_rate_hz:g} Hz",
                        )
                    )
            for i in range(1, len(stamps)):
                dt = stamps[i] - stamps[i - 1]
                if dt > policy.gap_factor * period_ns:
                    findings.append(
                        Finding(
                            SEV_WARNING, sid, i,
                            f"gap of {dt / 1e9:.3f} s at record {i} exceeds "
                            f"{policy.gap_factor:g}x nominal period",
                        )
                    )

    if spans:
        seq_lo = min(lo for lo, _ in spans.values())
        seq_hi = max(hi for _, hi in spans.values())
        seq_dur = seq_hi - seq_lo
        if seq_dur > 0:
            for sid, (lo, hi) in spans.items():
                cover = (hi - lo) / seq_dur
                if cover < policy.overlap:
                    findings.append(
                        Finding(
                            SEV_WARNING, sid, None,
                            f"stream covers {cover * 100:.1f}% of the sequence "
                            f"span, below {policy.overlap * 100:g}%",
                        )
                    )

    findings.sort(key=lambda f: (f.stream_id, -1 if f.record_index is None else f.record_index))
    return SequenceReport(sequence_id=manifest.sequence_id, findings=tuple(findings))


# ------------------------------------------------------------------- stats


def format_duration(seconds: float) -> str:
    total = int(round(seconds))
    return f"{total // 60:02d}m {total % 60:02d}s"


def bytes_to_gb(n: int) -> float:
    return n / 1e9  # decimal gigabytes


def sequence_stats(root, gap_factor: float = 3.0) -> SequenceStats:
    manifest = read_manifest(root)
    per_stream = []
    all_lo, all_hi = None, None
    total_bytes = 0
    traj_len = None

    for spec in manifest.streams:
        index = read_stream_index(root, spec.stream_id)
        stamps, parse_err = _stream_stamps(root, spec, index)
        if parse_err is not None:
            raise ParseError(parse_err)
        stream_bytes = sum(r.bytes for r in index.records)
        total_bytes += stream_bytes

        gap_count = 0
        max_gap_s = 0.0
        measured = None
        first = last = None
        if stamps:
            first, last = min(stamps), max(stamps)
            all_lo = first if all_lo is None else min(all_lo, first)
            all_hi = last if all_hi is None else max(all_hi, last)
        if len(stamps) >= 2:
            diffs = np.diff(np.asarray(sorted(stamps), dtype=np.int64))
            max_gap_s = float(diffs.max()) / 1e9
            span_s = (last - first) / 1e9
            if span_s > 0:
                measured = (len(stamps) - 1) / span_s
            if spec.nominal_rate_hz:
                period_ns = 1e9 / spec.nominal_rate_hz
                gap_count = int((diffs > gap_factor * period_ns).sum())

        per_stream.append(
            StreamStats(
                stream_id=spec.stream_id,
                kind=spec.kind,
                count=len(stamps),
                bytes=stream_bytes,
                first_ns=first,
                last_ns=last,
                measured_rate_hz=measured,
                gap_count=gap_count,
                max_gap_s=max_gap_s,
            )
        )

        if spec.kind == "trajectory" and traj_len is None and stamps:
            path = os.path.join(root, spec.stream_id, index.records[0].file)
            traj_len = trajectory_length(load_trajectory(path, frame=spec.frame))

    if all_lo is None:
        raise EmptySequenceError(f"{root}: no stamped records in any stream")

    return SequenceStats(
        sequence_id=manifest.sequence_id,
        duration_s=(all_hi - all_lo) / 1e9,
        total_bytes=total_bytes,
        streams=tuple(per_stream),
        trajectory_length_m=traj_len,
    )


# ----------------------------------------------------------------- reports


def report_json_dict(report: SequenceReport) -> dict:
    return {
        "findings": [
            {
                "message": f.message,
                "record_index": f.record_index,
                "severity": f.severity,
                "stream_id": f.stream_id,
            }
            for f in report.findings
        ],
        "n_errors": len(report.errors),
        "n_warnings": len(report.warnings),
        "ok": report.ok,
        "sequence_id": report.sequence_id,
    }


def format_report_text(report: SequenceReport) -> str:
    lines = [f"sequence {report.sequence_id}: "
             f"{len(report.errors)} error(s), {len(report.warnings)} warning(s)"]
    for f in report.findings:
        where = f.stream_id if f.record_index is None else f"{f.stream_id}[{f.record_index}]"
        lines.append(f"  {f.severity:7s} {where}: {f.message}")
    return "\n".join(lines)


def stats_json_dict(stats: SequenceStats) -> dict:
    return {
        "duration": format_duration(stats.duration_s),
        "duration_s": round(stats.duration_s, 6),
        "sequence_id": stats.sequence_id,
        "size_gb": round(bytes_to_gb(stats.total_bytes), 6),
        "streams": [
            {
                "count": s.count,
                "gap_count": s.gap_count,
                "kind": s.kind,
                "max_gap_s": round(s.max_gap_s, 6),
                "measured_rate_hz": None if s.measured_rate_hz is None
                else round(s.measured_rate_hz, 6),
                "stream_id": s.stream_id,
            }
            for s in stats.streams
        ],
        "total_bytes": stats.total_bytes,
        "trajectory_length_m": None if stats.trajectory_length_m is None
        else round(stats.trajectory_length_m, 6),
    }


def format_stats_text(stats: SequenceStats) -> str:
    lines = [
        f"sequence {stats.sequence_id}",
        f"  duration: {format_duration(stats.duration_s)} ({stats.duration_s:.3f} s)",
        f"  size: {bytes_to_gb(stats.total_bytes):.3f} GB ({stats.total_bytes} bytes)",
    ]
    if stats.trajectory_length_m is not None:
        lines.append(f"  trajectory length: {stats.trajectory_length_m:.2f} m")
    for s in stats.streams:
        rate = "n/a" if s.measured_rate_hz is None else f"{s.measured_rate_hz:.2f} Hz"
        lines.append(
            f"  {s.stream_id} ({s.kind}): {s.count} records, {rate}, "
            f"{s.gap_count} gap(s), max gap {s.max_gap_s:.3f} s"
        )
    return "\n".join(lines)
