"""PLY round-trip and validation tests."""

import numpy as np
import pytest

from rigkit.errors import ParseError
from rigkit.pointcloud import PointCloud, read_ply, write_ply


def random_cloud(n, rng, color=True):
    pts = rng.uniform(-10, 10, size=(n, 3)).astype(np.float32)
    cols = rng.integers(0, 256, size=(n, 3), dtype=np.uint8) if color else None
    return PointCloud(points=pts, colors=cols)


def test_round_trip_bytes_with_color(tmp_path):
    cloud = random_cloud(257, np.random.default_rng(1))
    p1, p2 = tmp_path / "a.ply", tmp_path / "b.ply"
    write_ply(cloud, p1)
    again = read_ply(p1)
    write_ply(again, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert np.array_equal(again.points, cloud.points)
    assert np.array_equal(again.colors, cloud.colors)


def test_round_trip_bytes_without_color(tmp_path):
    cloud = random_cloud(64, np.random.default_rng(2), color=False)
    p1, p2 = tmp_path / "a.ply", tmp_path / "b.ply"
    write_ply(cloud, p1)
    again = read_ply(p1)
    assert again.colors is None
    write_ply(again, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_empty_cloud(tmp_path):
    cloud = PointCloud(points=np.zeros((0, 3)))
    p = tmp_path / "empty.ply"
    write_ply(cloud, p)
    again = read_ply(p)
    assert len(again) == 0


def test_header_vertex_count_is_authoritative(tmp_path):
    cloud = random_cloud(10, np.random.default_rng(3))
    p = tmp_path / "a.ply"
    write_ply(cloud, p)
    data = p.read_bytes()
    # truncate the body: promised bytes missing
    p.write_bytes(data[:-4])
    with pytest.raises(ParseError):
        read_ply(p)


def test_not_a_ply(tmp_path):
    p = tmp_path / "a.ply"
    p.write_bytes(b"OFF\n0 0 0\n")
    with pytest.raises(ParseError):
        read_ply(p)


def test_ascii_ply_rejected(tmp_path):
    p = tmp_path / "a.ply"
    p.write_bytes(b"ply\nformat ascii 1.0\nelement vertex 0\nend_header\n")
    with pytest.raises(ParseError):
        read_ply(p)


def test_cloud_validation():
    with pytest.raises(ValueError):
        PointCloud(points=np.zeros((3, 2)))
    with pytest.raises(ValueError):
        PointCloud(points=np.array([[np.nan, 0, 0]]))
    with pytest.raises(ValueError):
        PointCloud(points=np.zeros((2, 3)), colors=np.zeros((3, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        PointCloud(points=np.zeros((2, 3)), camera_ids=("a",))
