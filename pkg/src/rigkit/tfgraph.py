"""Device transformation tree: assembly, validation, lookup, diff, and a
byte-stable text serialization.

Edges store the child pose expressed in the parent frame (the usual TF
convention). The graph is restricted to a tree: an edge between two frames
that are already connected is rejected, which makes cycles impossible by
construction. Lookups chain transforms along the unique path, inverting
edges walked child-to-parent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import (
    DisconnectedError,
    DuplicateEdgeError,
    ParseError,
    SelfLoopError,
    UnknownFrameError,
)
from .se3 import Transform, UnitQuaternion, compose, invert, rotation_angle_between, translation_distance

FORMAT_VERSION = 1
EDGE_SOURCES = ("estimated", "manufacturer", "cad")

# norm worse than this on import is a corrupt record, not rounding
_PARSE_NORM_TOL = 1e-6


def _check_frame_name(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise ValueError("frame name must be a non-empty string")
    if any(c.isspace() for c in name):
        raise ValueError(f"frame name may not contain whitespace: {name!r}")
    return name


@dataclass(frozen=True)
class CalibEdge:
    """Calibrated edge: child pose in parent frame, with provenance tag."""

    parent: str
    child: str
    transform: Transform
    source: str = "estimated"
    label: str = ""

    def __post_init__(self):
        _check_frame_name(self.parent)
        _check_frame_name(self.child)
        if self.parent == self.child:
            raise SelfLoopError(f"self loop on frame {self.parent!r}")
        if self.source not in EDGE_SOURCES:
            raise ValueError(
                f"source must be one of {EDGE_SOURCES}, got {self.source!r}"
            )


@dataclass(frozen=True)
class FrameGraph:
    root: str
    edges: tuple = ()

    def __post_init__(self):
        _check_frame_name(self.root)

    @property
    def frames(self) -> set:
        out = {self.root}
        for e in self.edges:
            out.add(e.parent)
            out.add(e.child)
        return out


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    errors: tuple = ()
    warnings: tuple = ()


@dataclass(frozen=True)
class ExtrinsicDiff:
    frame_a: str
    frame_b: str
    position_diff_m: float
    angular_diff_deg: float


def _components(g: FrameGraph) -> dict:
    """Map frame -> component id via union-find over the edges."""
    parent = {f: f for f in g.frames}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in g.edges:
        ra, rb = find(e.parent), find(e.child)
        if ra != rb:
            parent[ra] = rb
    return {f: find(f) for f in g.frames}


def add_edge(g: FrameGraph, e: CalibEdge) -> FrameGraph:
    """Return a new graph with the edge added; frames auto-created."""
    frames = g.frames
    if e.parent in frames and e.child in frames:
        comp = _components(g)
        if comp[e.parent] == comp[e.child]:
            raise DuplicateEdgeError(
                f"frames {e.parent!r} and {e.child!r} are already connected"
            )
    return FrameGraph(g.root, g.edges + (e,))


def validate(g: FrameGraph) -> ValidationReport:
    """Check the graph is a tree rooted at g.root with no orphans."""
    errors = []
    warnings = []
    frames = g.frames
    if g.root not in frames:
        errors.append(f"root frame {g.root!r} missing")

    seen_pairs = set()
    for e in g.edges:
        key = tuple(sorted((e.parent, e.child)))
        if key in seen_pairs:
            errors.append(f"duplicate edge on pair {key[0]!r} -- {key[1]!r}")
        seen_pairs.add(key)

    # cycle check: a connected component with a cycle has >= as many edges
    # as frames; re-checked even though add_edge makes cycles unreachable
    if len(g.edges) >= len(frames) and frames:
        errors.append("edge count implies a cycle")

    adj = _adjacency(g)
    reachable = {g.root}
    stack = [g.root]
    while stack:
        f = stack.pop()
        for nbr, _ in adj.get(f, ()):
            if nbr not in reachable:
                reachable.add(nbr)
                stack.append(nbr)
    orphans = sorted(frames - reachable)
    if orphans:
        errors.append("frames unreachable from root: " + ", ".join(orphans))

    return ValidationReport(valid=not errors, errors=tuple(errors), warnings=tuple(warnings))


def _adjacency(g: FrameGraph) -> dict:
    adj = {}
    for e in g.edges:
        adj.setdefault(e.parent, []).append((e.child, e.transform, False))
        adj.setdefault(e.child, []).append((e.parent, e.transform, True))
    # deterministic traversal order
    return {
        f: tuple((n, t) if not inv else (n, invert(t)) for n, t, inv in sorted(v, key=lambda x: x[0]))
        for f, v in adj.items()
    }


def lookup(g: FrameGraph, frame_from: str, frame_to: str) -> Transform:
    """Pose of frame_to expressed in frame_from."""
    frames = g.frames
    for f in (frame_from, frame_to):
        if f not in frames:
            raise UnknownFrameError(f"unknown frame {f!r}")
    if frame_from == frame_to:
        return Transform.identity()

    adj = _adjacency(g)
    # BFS for the unique path
    prev = {frame_from: None}
    queue = [frame_from]
    while queue:
        f = queue.pop(0)
        if f == frame_to:
            break
        for nbr, t in adj.get(f, ()):
            if nbr not in prev:
                prev[nbr] = (f, t)
                queue.append(nbr)
    if frame_to not in prev:
        raise DisconnectedError(
            f"no path between {frame_from!r} and {frame_to!r}"
        )

    chain = []
    f = frame_to
    while prev[f] is not None:
        f, t = prev[f]
        chain.append(t)
    result = Transform.identity()
    for t in reversed(chain):
        result = compose(result, t)
    return result


def diff_graphs(a: FrameGraph, b: FrameGraph, pairs) -> list:
    """Per-pair position and angular differences between two trees."""
    out = []
    for fa, fb in pairs:
        ta = lookup(a, fa, fb)
        tb = lookup(b, fa, fb)
        out.append(
            ExtrinsicDiff(
                frame_a=fa,
                frame_b=fb,
                position_diff_m=translation_distance(ta.translation, tb.translation),
                angular_diff_deg=rotation_angle_between(ta.rotation, tb.rotation),
            )
        )
    return out


# --- text serialization ----------------------------------------------------

def _fmt(value: float, places: int) -> str:
    s = f"{value:.{places}f}"
    # tiny negatives must not print as -0.000...: breaks byte stability
    if float(s) == 0.0:
        s = f"{0.0:.{places}f}"
    return s


def _render(g: FrameGraph) -> str:
    lines = [f"format {FORMAT_VERSION}", f"root {g.root}"]
    for e in sorted(g.edges, key=lambda e: (e.parent, e.child)):
        t = e.transform.translation
        q = e.transform.rotation
        lines.append("")
        lines.append(f"edge {e.parent} {e.child}")
        lines.append("  translation " + " ".join(_fmt(v, 9) for v in t))
        lines.append(
            "  rotation " + " ".join(_fmt(v, 12) for v in (q.w, q.x, q.y, q.z))
        )
        lines.append(f"  source {e.source}")
        if e.label:
            lines.append(f"  label {e.label}")
    return "\n".join(lines) + "\n"


def export_calibration(g: FrameGraph, path) -> None:
    """Write the canonical text form: sorted edges, fixed float widths."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_render(g))


class _LineReader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next_content(self):
        while self.pos < len(self.lines):
            raw = self.lines[self.pos]
            self.pos += 1
            if raw.strip():
                return self.pos, raw.strip()
        return None, None


def _parse_floats(fields, n, where, what):
    if len(fields) != n:
        raise ParseError(f"{where}: {what} needs {n} values, got {len(fields)}")
    try:
        return [float(v) for v in fields]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: bad {what} value: {exc}") from None


def import_calibration(path) -> FrameGraph:
    """Parse the text calibration format back into a graph."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    rd = _LineReader(text)

    lineno, line = rd.next_content()
    if line is None or not line.startswith("format "):
        raise ParseError(f"line {lineno or 1}: expected 'format <version>' header")
    try:
        version = int(line.split()[1])
    except (IndexError, ValueError):
        raise ParseError(f"line {lineno}: bad format version") from None
    if version != FORMAT_VERSION:
        raise ParseError(f"line {lineno}: unsupported format version {version}")

    lineno, line = rd.next_content()
    if line is None or not line.startswith("root "):
        raise ParseError(f"line {lineno or 1}: expected 'root <frame>'")
    root = line.split(maxsplit=1)[1]

    g = FrameGraph(root)
    while True:
        lineno, line = rd.next_content()
        if line is None:
            break
        parts = line.split()
        if parts[0] != "edge" or len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'edge <parent> <child>'")
        parent, child = parts[1], parts[2]
        fields = {"translation": None, "rotation": None, "source": None, "label": ""}
        for _ in range(4):
            mark = rd.pos
            sub_lineno, sub = rd.next_content()
            if sub is None:
                break
            key = sub.split()[0]
            if key == "edge":
                rd.pos = mark
                break
            if key == "translation":
                fields["translation"] = _parse_floats(sub.split()[1:], 3, f"line {sub_lineno}", "translation")
            elif key == "rotation":
                fields["rotation"] = _parse_floats(sub.split()[1:], 4, f"line {sub_lineno}", "rotation")
            elif key == "source":
                toks = sub.split()
                if len(toks) != 2:
                    raise ParseError(f"line {sub_lineno}: bad source line")
                fields["source"] = toks[1]
            elif key == "label":
                fields["label"] = sub.split(maxsplit=1)[1] if len(sub.split(maxsplit=1)) > 1 else ""
            else:
                raise ParseError(f"line {sub_lineno}: unknown edge field {key!r}")
        for req in ("translation", "rotation", "source"):
            if fields[req] is None:
                raise ParseError(
                    f"line {lineno}: edge {parent} {child} missing {req}"
                )
        g = _build_edge(g, parent, child, fields, f"line {lineno}")
    return g


def _build_edge(g, parent, child, fields, where) -> FrameGraph:
    w, x, y, z = fields["rotation"]
    norm = math.sqrt(w * w + x * x + y * y + z * z)
    if abs(norm - 1.0) > _PARSE_NORM_TOL:
        raise ParseError(
            f"{where}: edge {parent} {child}: quaternion norm {norm:.6f} is not 1"
        )
    if fields["source"] not in EDGE_SOURCES:
        raise ParseError(
            f"{where}: edge {parent} {child}: unknown source {fields['source']!r}"
        )
    try:
        edge = CalibEdge(
            parent=parent,
            child=child,
            transform=Transform(UnitQuaternion(w, x, y, z), tuple(fields["translation"])),
            source=fields["source"],
            label=fields["label"],
        )
        return add_edge(g, edge)
    except (ValueError, SelfLoopError) as exc:
        raise ParseError(f"{where}: edge {parent} {child}: {exc}") from None


def import_calibration_json(path) -> FrameGraph:
    """JSON equivalent of the text format, for programmatic producers."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    version = doc.get("format")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format version {version!r}")
    if "root" not in doc or not isinstance(doc["root"], str):
        raise ParseError("missing or bad 'root'")
    g = FrameGraph(doc["root"])
    for i, rec in enumerate(doc.get("edges", [])):
        if not isinstance(rec, dict):
            raise ParseError(f"edge {i}: must be an object")
        try:
            parent = rec["parent"]
            child = rec["child"]
            translation = rec["translation"]
            rotation = rec["rotation"]
        except KeyError as exc:
            raise ParseError(f"edge {i}: missing field {exc}") from None
        fields = {
            "translation": _parse_floats([str(v) for v in translation], 3, f"edge {i}", "translation"),
            "rotation": _parse_floats([str(v) for v in rotation], 4, f"edge {i}", "rotation"),
            "source": rec.get("source", "estimated"),
            "label": rec.get("label", ""),
        }
        g = _build_edge(g, parent, child, fields, f"edge {i}")
    return g
