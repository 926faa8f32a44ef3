"""Pinhole camera with radial-tangential distortion, reprojection
statistics, and point-cloud colorization by nearest-camera projection."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadSpecError,
    DimensionMismatchError,
    NoConvergenceError,
    NoValidProjectionsError,
    ParseError,
)
from .pointcloud import PointCloud
from .se3 import Transform

SENTINEL_COLOR = (0, 0, 0)

_UNDISTORT_ITERS = 50
_UNDISTORT_TOL = 1e-12


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    distortion: tuple  # (k1, k2, p1, p2)
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        d = tuple(float(v) for v in self.distortion)
        if len(d) != 4:
            raise ValueError("distortion must be (k1, k2, p1, p2)")
        object.__setattr__(self, "distortion", d)


@dataclass(frozen=True)
class ReprojStats:
    mean_px: float
    std_px: float
    max_px: float
    n_points: int


def distort_normalized(k: CameraIntrinsics, xy) -> np.ndarray:
    """Apply radial-tangential distortion to normalized coordinates."""
    xy = np.asarray(xy, dtype=float)
    single = xy.ndim == 1
    pts = np.atleast_2d(xy)
    x, y = pts[:, 0], pts[:, 1]
    k1, k2, p1, p2 = k.distortion
    r2 = x * x + y * y
    radial = 1.0 + k1 * r2 + k2 * r2 * r2
    xd = x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
    yd = y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
    out = np.stack([xd, yd], axis=1)
    return out[0] if single else out


def project_points(k: CameraIntrinsics, pts_cam):
    """Project camera-frame points to pixels.

    Returns (uv, valid): points at z <= 0 or landing outside
    [0, width) x [0, height) are marked invalid (uv still filled).
    """
    pts = np.atleast_2d(np.asarray(pts_cam, dtype=float))
    z = pts[:, 2]
    valid = z > 0
    safe_z = np.where(valid, z, 1.0)
    xn = pts[:, 0] / safe_z
    yn = pts[:, 1] / safe_z
    d = distort_normalized(k, np.stack([xn, yn], axis=1))
    u = k.fx * d[:, 0] + k.cx
    v = k.fy * d[:, 1] + k.cy
    valid = valid & (u >= 0) & (u < k.width) & (v >= 0) & (v < k.height)
    return np.stack([u, v], axis=1), valid


def project(k: CameraIntrinsics, p_cam):
    """Single-point convenience wrapper: ((u, v), valid)."""
    uv, valid = project_points(k, np.asarray(p_cam, dtype=float).reshape(1, 3))
    return (float(uv[0, 0]), float(uv[0, 1])), bool(valid[0])


def undistort_normalized(k: CameraIntrinsics, xy_distorted) -> np.ndarray:
    """Invert the distortion by fixed-point iteration.

    The iteration contracts only for moderate distortion; |k1| >= 1 is
    rejected outright and residuals above 1e-8 after 50 iterations raise.
    """
    k1, k2, p1, p2 = k.distortion
    if abs(k1) >= 1.0:
        raise NoConvergenceError(f"|k1| = {abs(k1)} >= 1: iteration cannot contract")
    target = np.asarray(xy_distorted, dtype=float)
    single = target.ndim == 1
    tgt = np.atleast_2d(target)
    xd, yd = tgt[:, 0], tgt[:, 1]
    x, y = xd.copy(), yd.copy()
    for _ in range(_UNDISTORT_ITERS):
        r2 = x * x + y * y
        radial = 1.0 + k1 * r2 + k2 * r2 * r2
        dx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
        dy = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
        x_new = (xd - dx) / radial
        y_new = (yd - dy) / radial
        step = max(np.abs(x_new - x).max(initial=0.0), np.abs(y_new - y).max(initial=0.0))
        x, y = x_new, y_new
        if step < _UNDISTORT_TOL:
            break
    out = np.stack([x, y], axis=1)
    residual = np.abs(distort_normalized(k, out) - tgt).max(initial=0.0)
    if not np.isfinite(residual) or residual > 1e-8:
        raise NoConvergenceError(
            f"undistortion residual {residual:.3g} after {_UNDISTORT_ITERS} iterations"
        )
    return out[0] if single else out


def backproject(k: CameraIntrinsics, uv, depth: float = 1.0) -> np.ndarray:
    """Pixel -> camera-frame point on the ray at the given depth."""
    uv = np.asarray(uv, dtype=float)
    xn = (uv[0] - k.cx) / k.fx
    yn = (uv[1] - k.cy) / k.fy
    x, y = undistort_normalized(k, np.array([xn, yn]))
    return np.array([x * depth, y * depth, depth])


def reprojection_stats(observations, pose: Transform, k: CameraIntrinsics) -> ReprojStats:
    """Pixel-error statistics between measured pixels and projected points.

    observations: iterable of ((u, v), point_world). Points that do not
    project validly are skipped; all invalid raises NoValidProjections.
    """
    obs = list(observations)
    if not obs:
        raise NoValidProjectionsError("no observations")
    pixels = np.array([o[0] for o in obs], dtype=float)
    world = np.array([o[1] for o in obs], dtype=float)
    rot = pose.rotation.as_matrix()
    cam = world @ rot.T + np.asarray(pose.translation)
    uv, valid = project_points(k, cam)
    if not valid.any():
        raise NoValidProjectionsError("no observation projects into the image")
    err = np.linalg.norm(uv[valid] - pixels[valid], axis=1)
    return ReprojStats(
        mean_px=float(err.mean()),
        std_px=float(err.std()),  # population
        max_px=float(err.max()),
        n_points=int(err.size),
    )


def colorize_cloud(cloud: PointCloud, cameras, chunk_size: int = None) -> PointCloud:
    """Color each point from the camera it is most on-axis for.

    cameras: list of (camera_id, base_to_cam: Transform, intrinsics,
    image (h, w, 3) uint8). Points visible in no camera get the black
    sentinel and no camera id. Output order equals input order and is
    bit-identical for any chunk_size.
    """
    cams = []
    for camera_id, base_to_cam, intr, image in cameras:
        img = np.asarray(image)
        if img.ndim != 3 or img.shape[2] != 3:
            raise DimensionMismatchError(f"{camera_id}: image must be (h, w, 3)")
        if img.shape[0] != intr.height or img.shape[1] != intr.width:
            raise DimensionMismatchError(
                f"{camera_id}: image is {img.shape[1]}x{img.shape[0]}, "
                f"intrinsics say {intr.width}x{intr.height}"
            )
        rot = base_to_cam.rotation.as_matrix()
        trans = np.asarray(base_to_cam.translation)
        cams.append((camera_id, rot, trans, intr, img))

    n = len(cloud)
    colors = np.zeros((n, 3), dtype=np.uint8)
    colors[:] = SENTINEL_COLOR
    ids = [None] * n
    if n == 0:
        return PointCloud(cloud.points, colors, tuple(ids), cloud.frame)

    step = n if not chunk_size else max(1, int(chunk_size))
    for start in range(0, n, step):
        stop = min(start + step, n)
        pts = cloud.points[start:stop].astype(float)
        m = stop - start
        best_cos = np.full(m, -np.inf)
        best_cam = np.full(m, -1, dtype=int)
        pix = np.zeros((len(cams), m, 2), dtype=int)
        for ci, (camera_id, rot, trans, intr, img) in enumerate(cams):
            p_cam = pts @ rot.T + trans
            uv, valid = project_points(intr, p_cam)
            norm = np.linalg.norm(p_cam, axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                cos = np.where(norm > 0, p_cam[:, 2] / norm, -np.inf)
            cos = np.where(valid, cos, -np.inf)
            # strict > keeps the earliest camera on exact ties
            better = cos > best_cos
            best_cos = np.where(better, cos, best_cos)
            best_cam = np.where(better, ci, best_cam)
            col = np.clip(np.rint(uv[:, 0]), 0, intr.width - 1).astype(int)
            row = np.clip(np.rint(uv[:, 1]), 0, intr.height - 1).astype(int)
            pix[ci, :, 0] = row
            pix[ci, :, 1] = col
        for ci, (camera_id, rot, trans, intr, img) in enumerate(cams):
            sel = best_cam == ci
            if not sel.any():
                continue
            rows = pix[ci, sel, 0]
            cols = pix[ci, sel, 1]
            colors[start:stop][sel] = img[rows, cols]
            for local_idx in np.nonzero(sel)[0]:
                ids[start + local_idx] = camera_id
    return PointCloud(cloud.points, colors, tuple(ids), cloud.frame)


# --- file interfaces ---------------------------------------------------------

def load_image(path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def save_image(array, path) -> None:
    from PIL import Image

    Image.fromarray(np.asarray(array, dtype=np.uint8), mode="RGB").save(path)


def read_camera_file(path) -> list:
    """Per-camera records: camera_id, frame, and intrinsics as JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: bad JSON: {exc}") from None
    if not isinstance(doc, dict) or "cameras" not in doc:
        raise ParseError(f"{path}: expected top-level 'cameras' list")
    out = []
    for i, rec in enumerate(doc["cameras"]):
        try:
            intr = CameraIntrinsics(
                fx=float(rec["fx"]),
                fy=float(rec["fy"]),
                cx=float(rec["cx"]),
                cy=float(rec["cy"]),
                distortion=tuple(rec["distortion"]),
                width=int(rec["width"]),
                height=int(rec["height"]),
            )
            out.append({"camera_id": rec["camera_id"], "frame": rec["frame"], "intrinsics": intr})
        except KeyError as exc:
            raise ParseError(f"{path}: camera {i}: missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: camera {i}: {exc}") from None
    if not out:
        raise BadSpecError(f"{path}: no cameras defined")
    return out
