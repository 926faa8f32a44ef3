"""Point clouds and binary PLY I/O (little-endian, float32 xyz,
optional uint8 rgb)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Points in a named frame; colors and camera ids are optional and,
    when present, cover every point."""

    points: np.ndarray
    colors: np.ndarray = None
    camera_ids: tuple = None
    frame: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must be an (n, 3) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        if self.colors is not None:
            cols = np.asarray(self.colors, dtype=np.uint8)
            if cols.shape != (pts.shape[0], 3):
                raise ValueError("colors must be (n, 3) uint8")
            object.__setattr__(self, "colors", cols)
        if self.camera_ids is not None:
            ids = tuple(self.camera_ids)
            if len(ids) != pts.shape[0]:
                raise ValueError("camera_ids must have one entry per point")
            object.__setattr__(self, "camera_ids", ids)

    def __len__(self):
        return self.points.shape[0]


_PLY_MAGIC = b"ply"


def write_ply(cloud: PointCloud, path) -> None:
    """Binary little-endian PLY: float32 x,y,z plus uint8 rgb if colored."""
    n = len(cloud)
    header = [
        "ply",
        "format binary_little_endian 1.0",
        f"element vertex {n}",
        "property float x",
        "property float y",
        "property float z",
    ]
    if cloud.colors is not None:
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    header.append("end_header")

    if cloud.colors is not None:
        dtype = np.dtype(
            [("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
             ("red", "u1"), ("green", "u1"), ("blue", "u1")]
        )
        rows = np.empty(n, dtype=dtype)
        pts = cloud.points.astype("<f4")
        rows["x"], rows["y"], rows["z"] = pts[:, 0], pts[:, 1], pts[:, 2]
        rows["red"], rows["green"], rows["blue"] = (
            cloud.colors[:, 0], cloud.colors[:, 1], cloud.colors[:, 2],
        )
    else:
        dtype = np.dtype([("x", "<f4"), ("y", "<f4"), ("z", "<f4")])
        rows = np.empty(n, dtype=dtype)
        pts = cloud.points.astype("<f4")
        rows["x"], rows["y"], rows["z"] = pts[:, 0], pts[:, 1], pts[:, 2]

    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(rows.tobytes())


def read_ply(path, frame: str = "") -> PointCloud:
    """Read the subset of PLY that write_ply emits."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(_PLY_MAGIC):
        raise ParseError(f"{path}: not a PLY file")
    end = data.find(b"end_header\n")
    if end < 0:
        raise ParseError(f"{path}: missing end_header")
    header_lines = data[:end].decode("ascii", errors="replace").splitlines()
    body = data[end + len(b"end_header\n"):]

    n = None
    props = []
    fmt_ok = False
    for line in header_lines[1:]:
        tok = line.split()
        if not tok:
            continue
        if tok[0] == "format":
            if tok[1] != "binary_little_endian":
                raise ParseError(f"{path}: unsupported PLY format {tok[1]!r}")
            fmt_ok = True
        elif tok[0] == "element":
            if tok[1] != "vertex":
                raise ParseError(f"{path}: unsupported element {tok[1]!r}")
            n = int(tok[2])
        elif tok[0] == "property":
            props.append((tok[2], tok[1]))
    if not fmt_ok or n is None:
        raise ParseError(f"{path}: incomplete PLY header")

    names = [p[0] for p in props]
    if names[:3] != ["x", "y", "z"]:
        raise ParseError(f"{path}: expected x,y,z properties, got {names}")
    has_color = names[3:] == ["red", "green", "blue"]
    if names[3:] and not has_color:
        raise ParseError(f"{path}: unsupported property set {names}")
    type_map = {"float": "<f4", "uchar": "u1"}
    try:
        dtype = np.dtype([(nm, type_map[tp]) for nm, tp in props])
    except KeyError as exc:
        raise ParseError(f"{path}: unsupported property type {exc}") from None

    expected = n * dtype.itemsize
    if len(body) < expected:
        raise ParseError(
            f"{path}: body has {len(body)} bytes, header promises {expected}"
        )
    rows = np.frombuffer(body[:expected], dtype=dtype)
    points = np.stack([rows["x"], rows["y"], rows["z"]], axis=1)
    colors = None
    if has_color:
        colors = np.stack([rows["red"], rows["green"], rows["blue"]], axis=1)
    return PointCloud(points=points, colors=colors, frame=frame)
