#!/usr/bin/env python3
"""Colorize a synthetic LiDAR cloud with a two-camera rig.

Points on a cylinder around the rig are projected into two yawed
cameras with distinct solid-color images; points seen by neither stay
at the sentinel color. Prints the per-camera assignment counts and
writes the colored cloud to PLY when asked.
"""

import argparse

import numpy as np

from rigkit.camera import CameraIntrinsics, colorize_cloud
from rigkit.pointcloud import PointCloud, write_ply
from rigkit.se3 import EulerAnglesDeg, Transform, quat_from_euler


def solid(w, h, rgb):
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[:] = rgb
    return img


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=20_000)
    ap.add_argument("--separation-deg", type=float, default=70.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="write colored cloud to this PLY")
    args = ap.parse_args()

    k = CameraIntrinsics(400.0, 400.0, 320.0, 240.0, (0.0, 0.0, 0.0, 0.0), 640, 480)
    cams = []
    for cid, yaw, rgb in (
        ("cam_left", -args.separation_deg / 2, (220, 40, 40)),
        ("cam_right", args.separation_deg / 2, (40, 40, 220)),
    ):
        pose = Transform(quat_from_euler(EulerAnglesDeg(0.0, yaw, 0.0)), (0.0, 0.0, 0.0))
        cams.append((cid, pose, k, solid(640, 480, rgb)))

    rng = np.random.default_rng(args.seed)
    theta = rng.uniform(-np.pi, np.pi, args.points)
    z = rng.uniform(-1.0, 1.0, args.points)
    r = 3.0
    pts = np.column_stack([r * np.sin(theta), z, r * np.cos(theta)]).astype(np.float32)
    cloud = PointCloud(points=pts, frame="base")

    colored = colorize_cloud(cloud, cams)
    counts = {}
    for cid in colored.camera_ids:
        key = cid if cid else "(unseen)"
        counts[key] = counts.get(key, 0) + 1
    for key in sorted(counts):
        print(f"{key:<12s}{counts[key]:>8d}  ({counts[key] / args.points:.1%})")

    if args.out:
        write_ply(colored, args.out)
        print(f"\ncolored cloud -> {args.out}")


if __name__ == "__main__":
    main()
