#!/usr/bin/env python3
"""Generate a small synthetic sensor sequence and check it back in.

Writes a complete sequence directory (camera frames, LiDAR clouds, an
IMU chunk, and a ground-truth trajectory on a circular path), then runs
the integrity validator and the stats summary over the result. Useful
as an end-to-end smoke test and as fixture input for the CLI.
"""

import argparse
import io

import numpy as np

from rigkit.clocks import ClockDomainKind
from rigkit.dataset import (
    SensorSpec,
    SequenceManifest,
    SequenceWriter,
    format_report_text,
    format_stats_text,
    sequence_stats,
    validate_sequence,
)
from rigkit.pointcloud import PointCloud
from rigkit.se3 import EulerAnglesDeg, Transform, quat_from_euler
from rigkit.trajectory import Trajectory


def png_bytes(frame_idx, w=64, h=48):
    from PIL import Image

    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[..., 0] = np.linspace(0, 255, w, dtype=np.uint8)
    img[..., 1] = frame_idx % 256
    buf = io.BytesIO()
    Image.fromarray(img, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def circle_pose(t_s, radius, period_s):
    ang = 360.0 * t_s / period_s
    th = np.deg2rad(ang)
    pos = (radius * np.cos(th), radius * np.sin(th), 0.0)
    return Transform(quat_from_euler(EulerAnglesDeg(0.0, 0.0, ang % 360.0)), pos)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="sequence directory to create")
    ap.add_argument("--duration-s", type=int, default=10)
    ap.add_argument("--radius-m", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    end_ns = int(args.duration_s * 1e9) + 1  # inclusive, all streams share the last tick

    manifest = SequenceManifest(
        sequence_id="synthetic_circle_01",
        scenario="indoor",
        description="synthetic circular run for pipeline smoke tests",
        clock=ClockDomainKind.PTP,
        streams=(
            SensorSpec("cam0", "camera", frame="cam0", nominal_rate_hz=20.0),
            SensorSpec("imu0", "imu", frame="imu0", nominal_rate_hz=200.0),
            SensorSpec("lidar0", "lidar", frame="lidar0", nominal_rate_hz=10.0),
            SensorSpec("ground_truth", "trajectory", frame="base"),
        ),
    )
    w = SequenceWriter(args.out, manifest)

    cam_stamps = range(0, end_ns, 50_000_000)
    w.add_images("cam0", [(s, png_bytes(i)) for i, s in enumerate(cam_stamps)])

    imu_stamps = np.arange(0, end_ns, 5_000_000, dtype=np.int64)
    n = imu_stamps.size
    w.add_imu("imu0", imu_stamps, rng.normal(0, 2e-3, (3, n)), rng.normal(0, 1e-2, (3, n)))

    clouds = []
    for s in range(0, end_ns, 100_000_000):
        pts = rng.uniform(-5.0, 5.0, (256, 3)).astype(np.float32)
        clouds.append((s, PointCloud(points=pts, frame="lidar0")))
    w.add_clouds("lidar0", clouds)

    entries = tuple(
        (s, circle_pose(s / 1e9, args.radius_m, period_s=args.duration_s))
        for s in range(0, end_ns, 100_000_000)
    )
    w.add_trajectory("ground_truth", Trajectory(entries, frame="base"))

    print(format_report_text(validate_sequence(args.out)))
    print()
    print(format_stats_text(sequence_stats(args.out)))


if __name__ == "__main__":
    main()
