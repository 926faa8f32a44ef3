"""Transformation-tree tests: lookup against a matrix-chain oracle,
diffing, and byte-stable serialization."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from rigkit.errors import (
    DisconnectedError,
    DuplicateEdgeError,
    ParseError,
    SelfLoopError,
    UnknownFrameError,
)
from rigkit.se3 import (
    EulerAnglesDeg,
    Transform,
    UnitQuaternion,
    invert,
    compose,
    quat_from_euler,
    rotation_angle_between,
)
from rigkit.tfgraph import (
    CalibEdge,
    FrameGraph,
    add_edge,
    diff_graphs,
    export_calibration,
    import_calibration,
    import_calibration_json,
    lookup,
    validate,
)

DATA = Path(__file__).parent / "data"
GOLDEN = DATA / "rig_tree.calib"


def t_xyz(x, y, z, euler=None):
    q = quat_from_euler(EulerAnglesDeg(*euler)) if euler else UnitQuaternion.identity()
    return Transform(q, (x, y, z))


def random_transform(rng):
    q = UnitQuaternion(*rng.normal(size=4))
    return Transform(q, tuple(rng.uniform(-1, 1, 3)))


def random_tree(rng, n_frames):
    """Random tree rooted at f0; returns (graph, {frame: pose_in_root 4x4})."""
    g = FrameGraph("f0")
    pose = {"f0": np.eye(4)}
    for i in range(1, n_frames):
        parent = f"f{rng.integers(0, i)}"
        child = f"f{i}"
        t = random_transform(rng)
        g = add_edge(g, CalibEdge(parent, child, t))
        pose[child] = pose[parent] @ t.as_matrix()
    return g, pose


# --- construction rules ----------------------------------------------------

def test_add_edge_creates_frames():
    g = add_edge(FrameGraph("base_link"), CalibEdge("base_link", "lidar", Transform.identity()))
    assert g.frames == {"base_link", "lidar"}
    assert len(g.edges) == 1


def test_reversed_pair_rejected():
    g = add_edge(FrameGraph("base_link"), CalibEdge("base_link", "lidar", Transform.identity()))
    with pytest.raises(DuplicateEdgeError):
        add_edge(g, CalibEdge("lidar", "base_link", t_xyz(1, 0, 0)))


def test_connecting_connected_components_rejected():
    g = FrameGraph("a")
    g = add_edge(g, CalibEdge("a", "b", Transform.identity()))
    g = add_edge(g, CalibEdge("b", "c", Transform.identity()))
    # a and c are already connected through b: adding a-c would close a cycle
    with pytest.raises(DuplicateEdgeError):
        add_edge(g, CalibEdge("a", "c", Transform.identity()))


def test_self_loop_rejected():
    with pytest.raises(SelfLoopError):
        CalibEdge("a", "a", Transform.identity())


def test_bad_frame_names_rejected():
    with pytest.raises(ValueError):
        CalibEdge("", "b", Transform.identity())
    with pytest.raises(ValueError):
        CalibEdge("a b", "c", Transform.identity())


def test_bad_source_rejected():
    with pytest.raises(ValueError):
        CalibEdge("a", "b", Transform.identity(), source="guess")


# --- validation --------------------------------------------------------------

def test_validate_single_root():
    rep = validate(FrameGraph("base_link"))
    assert rep.valid
    assert rep.errors == () and rep.warnings == ()


def test_validate_disjoint_component():
    g = FrameGraph("a")
    g = add_edge(g, CalibEdge("a", "b", Transform.identity()))
    g = add_edge(g, CalibEdge("c", "d", Transform.identity()))
    rep = validate(g)
    assert not rep.valid
    assert any("c" in msg and "d" in msg for msg in rep.errors)


def test_validate_golden_fixture():
    rep = validate(import_calibration(GOLDEN))
    assert rep.valid


# --- lookup -------------------------------------------------------------------

def test_lookup_self_is_identity():
    g = FrameGraph("base_link")
    t = lookup(g, "base_link", "base_link")
    assert t == Transform.identity()


def test_lookup_chain_of_translations():
    g = FrameGraph("a")
    g = add_edge(g, CalibEdge("a", "b", t_xyz(1, 0, 0)))
    g = add_edge(g, CalibEdge("b", "c", t_xyz(1, 0, 0)))
    assert np.allclose(lookup(g, "a", "c").translation, (2, 0, 0))


def test_lookup_unknown_frame():
    g = FrameGraph("a")
    with pytest.raises(UnknownFrameError):
        lookup(g, "a", "nope")


def test_lookup_disconnected():
    g = FrameGraph("a")
    g = add_edge(g, CalibEdge("a", "b", Transform.identity()))
    g = add_edge(g, CalibEdge("c", "d", Transform.identity()))
    with pytest.raises(DisconnectedError):
        lookup(g, "a", "d")


def test_lookup_matches_matrix_chain_oracle():
    rng = np.random.default_rng(3)
    for trial in range(20):
        n = int(rng.integers(2, 10))
        g, pose = random_tree(rng, n)
        frames = sorted(pose)
        for fa in frames:
            for fb in frames:
                got = lookup(g, fa, fb).as_matrix()
                want = np.linalg.inv(pose[fa]) @ pose[fb]
                assert np.allclose(got, want, atol=1e-9)


def test_lookup_inverse_symmetry():
    rng = np.random.default_rng(5)
    g, pose = random_tree(rng, 8)
    frames = sorted(pose)
    for fa in frames:
        for fb in frames:
            ab = lookup(g, fa, fb)
            ba = invert(lookup(g, fb, fa))
            assert np.allclose(ab.as_matrix(), ba.as_matrix(), atol=1e-9)


def test_lookup_path_composition():
    rng = np.random.default_rng(9)
    g, pose = random_tree(rng, 7)
    frames = sorted(pose)
    for fa in frames:
        for fb in frames:
            for fc in frames:
                lhs = compose(lookup(g, fa, fb), lookup(g, fb, fc)).as_matrix()
                rhs = lookup(g, fa, fc).as_matrix()
                assert np.allclose(lhs, rhs, atol=1e-9)


# --- diffing -------------------------------------------------------------------

def test_diff_identical_graphs_is_zero():
    g = import_calibration(GOLDEN)
    pairs = [("base_link", "cam_front_left"), ("base_link", "lidar_imu")]
    for d in diff_graphs(g, g, pairs):
        assert d.position_diff_m == 0.0
        assert d.angular_diff_deg == 0.0


def test_diff_detects_known_perturbation():
    g = import_calibration(GOLDEN)
    bump = quat_from_euler(EulerAnglesDeg(0.0, 0.0, 2.0))
    edges = []
    for e in g.edges:
        if e.child == "cam_side_left":
            t = Transform(e.transform.rotation.multiply(bump), e.transform.translation)
            e = CalibEdge(e.parent, e.child, t, e.source, e.label)
        edges.append(e)
    g2 = FrameGraph(g.root, tuple(edges))
    pairs = [("base_link", "cam_side_left"), ("base_link", "cam_front_left")]
    d_hit, d_miss = diff_graphs(g, g2, pairs)
    assert abs(d_hit.angular_diff_deg - 2.0) < 1e-6
    assert d_hit.position_diff_m == 0.0
    assert d_miss.angular_diff_deg == 0.0


def build_pair_graphs(rows):
    """Two one-frame-deep trees (design vs estimate) from table-style rows."""
    ga = FrameGraph("base")
    gb = FrameGraph("base")
    for name, (ta, ea), (tb, eb) in rows:
        ga = add_edge(ga, CalibEdge("base", name, t_xyz(*ta, euler=ea), source="cad"))
        gb = add_edge(gb, CalibEdge("base", name, t_xyz(*tb, euler=eb), source="estimated"))
    return ga, gb


TABLE_ROWS = [
    ("cam_front_left",
     ((0.046, 0.057, 0.087), (134.8, -45.4, -44.8)),
     ((0.061, 0.064, 0.085), (133.6, -44.6, -46.0))),
    ("cam_front_right",
     ((0.046, -0.057, 0.087), (45.4, -90.0, 0.0)),
     ((0.057, -0.063, 0.085), (44.6, -89.9, 1.2))),
    ("cam_side_left",
     ((-0.057, 0.054, 0.087), (180.0, 0.0, -90.0)),
     ((-0.060, 0.088, 0.080), (179.2, -0.7, -89.7))),
    ("cam_side_right",
     ((-0.057, -0.054, 0.087), (0.0, -90.0, 90.0)),
     ((-0.064, -0.077, 0.079), (0.7, -89.5, 89.3))),
]

POSITION_DIFFS = [0.018, 0.013, 0.035, 0.025]


def test_diff_reproduces_published_position_column():
    ga, gb = build_pair_graphs(TABLE_ROWS)
    pairs = [("base", row[0]) for row in TABLE_ROWS]
    diffs = diff_graphs(ga, gb, pairs)
    for d, want in zip(diffs, POSITION_DIFFS):
        assert d.position_diff_m == pytest.approx(want, abs=2e-3)


# --- serialization -------------------------------------------------------------

def test_golden_file_round_trip_bytes(tmp_path):
    g = import_calibration(GOLDEN)
    out = tmp_path / "again.calib"
    export_calibration(g, out)
    assert out.read_bytes() == GOLDEN.read_bytes()


def test_export_import_export_stable(tmp_path):
    rng = np.random.default_rng(17)
    g, _ = random_tree(rng, 9)
    p1, p2 = tmp_path / "one.calib", tmp_path / "two.calib"
    export_calibration(g, p1)
    g2 = import_calibration(p1)
    export_calibration(g2, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_semantic_round_trip_across_rewrites(tmp_path):
    rng = np.random.default_rng(23)
    g0, _ = random_tree(rng, 9)
    p = tmp_path / "rig.calib"
    export_calibration(g0, p)
    g1 = import_calibration(p)       # first quantization to file precision
    export_calibration(g1, p)
    g2 = import_calibration(p)
    frames = sorted(g1.frames)
    for fa in frames:
        for fb in frames:
            t1 = lookup(g1, fa, fb)
            t2 = lookup(g2, fa, fb)
            assert rotation_angle_between(t1.rotation, t2.rotation) < 1e-12
            assert max(abs(a - b) for a, b in zip(t1.translation, t2.translation)) < 1e-12


def test_empty_rooted_graph_round_trip(tmp_path):
    p = tmp_path / "root_only.calib"
    export_calibration(FrameGraph("base_link"), p)
    g = import_calibration(p)
    assert g.frames == {"base_link"}
    q = tmp_path / "root_only2.calib"
    export_calibration(g, q)
    assert p.read_bytes() == q.read_bytes()


def test_corrupt_quaternion_norm_is_parse_error(tmp_path):
    text = GOLDEN.read_text()
    bad = text.replace(
        "rotation 1.000000000000 0.000000000000 0.000000000000 0.000000000000",
        "rotation 0.500000000000 0.000000000000 0.000000000000 0.000000000000",
        1,
    )
    p = tmp_path / "bad.calib"
    p.write_text(bad)
    with pytest.raises(ParseError) as err:
        import_calibration(p)
    # the failing edge must be named
    assert "lidar" in str(err.value)


def test_unknown_source_is_parse_error(tmp_path):
    text = GOLDEN.read_text().replace("source manufacturer", "source vibes", 1)
    p = tmp_path / "bad.calib"
    p.write_text(text)
    with pytest.raises(ParseError):
        import_calibration(p)


def test_missing_field_is_parse_error(tmp_path):
    lines = [l for l in GOLDEN.read_text().splitlines() if not l.startswith("  source")]
    p = tmp_path / "bad.calib"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError):
        import_calibration(p)


def test_missing_header_is_parse_error(tmp_path):
    p = tmp_path / "bad.calib"
    p.write_text("root base_link\n")
    with pytest.raises(ParseError):
        import_calibration(p)


def test_json_import_matches_text_import(tmp_path):
    g = import_calibration(GOLDEN)
    doc = {
        "format": 1,
        "root": g.root,
        "edges": [
            {
                "parent": e.parent,
                "child": e.child,
                "translation": list(e.transform.translation),
                "rotation": [e.transform.rotation.w, e.transform.rotation.x,
                             e.transform.rotation.y, e.transform.rotation.z],
                "source": e.source,
                "label": e.label,
            }
            for e in g.edges
        ],
    }
    p = tmp_path / "rig.json"
    p.write_text(json.dumps(doc))
    g2 = import_calibration_json(p)
    out1, out2 = tmp_path / "a.calib", tmp_path / "b.calib"
    export_calibration(g, out1)
    export_calibration(g2, out2)
    assert out1.read_bytes() == out2.read_bytes()


def test_json_import_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        import_calibration_json(p)
    p.write_text(json.dumps({"format": 99, "root": "a", "edges": []}))
    with pytest.raises(ParseError):
        import_calibration_json(p)
    p.write_text(json.dumps({"format": 1, "edges": []}))
    with pytest.raises(ParseError):
        import_calibration_json(p)
