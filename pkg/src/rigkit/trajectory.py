"""Trajectory loading, timestamp association, rigid alignment, and
absolute trajectory error statistics.

File format is the whitespace-separated benchmark interchange text:
`t x y z qx qy qz qw`, t in decimal seconds, one pose per line, `#`
comments allowed. Stamps are parsed through Decimal so nanoseconds
survive the round trip exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, ROUND_HALF_EVEN

import numpy as np

from .errors import (
    EmptySequenceError,
    NoMatchesError,
    NonMonotonicError,
    ParseError,
)
from .se3 import Transform, UnitQuaternion

DEFAULT_MAX_DT_NS = 20_000_000  # half a 30 Hz frame interval


@dataclass(frozen=True)
class Trajectory:
    entries: tuple  # ((stamp_ns, Transform), ...)
    frame: str = ""

    def __post_init__(self):
        entries = tuple((int(s), t) for s, t in self.entries)
        if not entries:
            raise EmptySequenceError("trajectory must have >= 1 entry")
        stamps = [s for s, _ in entries]
        for i in range(1, len(stamps)):
            if stamps[i] <= stamps[i - 1]:
                raise NonMonotonicError(
                    f"stamp {stamps[i]} at entry {i} not after {stamps[i - 1]}"
                )
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    @property
    def stamps_ns(self) -> np.ndarray:
        return np.array([s for s, _ in self.entries], dtype=np.int64)

    @property
    def positions(self) -> np.ndarray:
        return np.array([t.translation for _, t in self.entries], dtype=float)


@dataclass(frozen=True)
class AssociationResult:
    pairs: tuple  # ((gt_index, est_index, dt_ns), ...)
    max_dt_ns: int


@dataclass(frozen=True)
class AteReport:
    rmse_m: float
    std_m: float
    mean_m: float
    median_m: float
    max_m: float
    n_pairs: int
    alignment: Transform
    scale: float = 1.0


def _parse_stamp_ns(token: str) -> int:
    d = (Decimal(token) * 10**9).to_integral_value(rounding=ROUND_HALF_EVEN)
    return int(d)


def load_trajectory(path, frame: str = "") -> Trajectory:
    entries = []
    prev = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            if len(tok) != 8:
                raise ParseError(f"{path}:{lineno}: expected 8 fields, got {len(tok)}")
            try:
                stamp = _parse_stamp_ns(tok[0])
                x, y, z, qx, qy, qz, qw = (float(v) for v in tok[1:])
            except (ValueError, InvalidOperation):
                raise ParseError(f"{path}:{lineno}: bad numeric value") from None
            if prev is not None and stamp <= prev:
                raise NonMonotonicError(f"{path}:{lineno}: stamp not increasing")
            prev = stamp
            try:
                pose = Transform(UnitQuaternion(qw, qx, qy, qz), (x, y, z))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            entries.append((stamp, pose))
    if not entries:
        raise EmptySequenceError(f"{path}: no poses")
    return Trajectory(tuple(entries), frame=frame)


def save_trajectory(t: Trajectory, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for stamp, pose in t.entries:
            sec, frac = divmod(stamp, 10**9)
            q = pose.rotation
            x, y, z = pose.translation
            fh.write(
                f"{sec}.{frac:09d} "
                f"{x:.12f} {y:.12f} {z:.12f} "
                f"{q.x:.12f} {q.y:.12f} {q.z:.12f} {q.w:.12f}\n"
            )


def associate(gt: Trajectory, est: Trajectory, max_dt_ns: int = DEFAULT_MAX_DT_NS) -> AssociationResult:
    """Greedy globally-nearest stamp matching.

    Candidate pairs within the window are taken smallest |dt| first
    (ties toward the smaller gt index, then est index); each index is
    used at most once.
    """
    gt_stamps = gt.stamps_ns
    est_stamps = est.stamps_ns
    candidates = []
    for i, t in enumerate(gt_stamps):
        lo = int(np.searchsorted(est_stamps, t - max_dt_ns, side="left"))
        hi = int(np.searchsorted(est_stamps, t + max_dt_ns, side="right"))
        for j in range(lo, hi):
            dt = int(est_stamps[j] - t)
            candidates.append((abs(dt), i, j, dt))
    candidates.sort()
    used_gt = set()
    used_est = set()
    pairs = []
    for _, i, j, dt in candidates:
        if i in used_gt or j in used_est:
            continue
        used_gt.add(i)
        used_est.add(j)
        pairs.append((i, j, dt))
    if not pairs:
        raise NoMatchesError(f"no stamp pairs within {max_dt_ns} ns")
    pairs.sort()
    return AssociationResult(pairs=tuple(pairs), max_dt_ns=int(max_dt_ns))


def umeyama_align(gt_points, est_points, with_scale: bool = False):
    """Closed-form least-squares rigid (optionally scaled) alignment.

    Returns (Transform, scale) minimizing sum ||gt - (s R est + t)||^2.
    Collinear or coincident point sets fall back to translation-only
    with a warning.
    """
    gt_pts = np.asarray(gt_points, dtype=float)
    est_pts = np.asarray(est_points, dtype=float)
    if gt_pts.shape != est_pts.shape or gt_pts.ndim != 2 or gt_pts.shape[1] != 3:
        raise ValueError("point sets must both be (n, 3)")
    n = gt_pts.shape[0]
    if n < 1:
        raise ValueError("need >= 1 pair")
    mu_g = gt_pts.mean(axis=0)
    mu_e = est_pts.mean(axis=0)
    x = est_pts - mu_e
    y = gt_pts - mu_g

    cov = (y.T @ x) / n
    u, d, vt = np.linalg.svd(cov)
    rank_ok = n >= 3 and d[1] > max(1e-12, 1e-9 * d[0])
    if not rank_ok:
        warnings.warn(
            "degenerate geometry: falling back to translation-only alignment",
            RuntimeWarning,
            stacklevel=2,
        )
        rot = UnitQuaternion.identity()
        scale = 1.0
        trans = mu_g - mu_e
        return Transform(rot, tuple(trans)), scale

    s = np.ones(3)
    if np.linalg.det(u @ vt) < 0:
        s[2] = -1.0
    rot_m = u @ np.diag(s) @ vt
    if with_scale:
        var_e = float((x * x).sum()) / n
        scale = float((d * s).sum()) / var_e
    else:
        scale = 1.0
    trans = mu_g - scale * (rot_m @ mu_e)
    return Transform(UnitQuaternion.from_matrix(rot_m), tuple(trans)), scale


def ate(
    gt: Trajectory,
    est: Trajectory,
    max_dt_ns: int = DEFAULT_MAX_DT_NS,
    with_scale: bool = False,
    align: bool = True,
) -> AteReport:
    """Associate, align, and report translational error statistics."""
    assoc = associate(gt, est, max_dt_ns)
    gt_pos = gt.positions
    est_pos = est.positions
    gi = [p[0] for p in assoc.pairs]
    ei = [p[1] for p in assoc.pairs]
    g = gt_pos[gi]
    e = est_pos[ei]
    if align:
        alignment, scale = umeyama_align(g, e, with_scale=with_scale)
        rot = alignment.rotation.as_matrix()
        e_aligned = scale * (e @ rot.T) + np.asarray(alignment.translation)
    else:
        alignment, scale = Transform.identity(), 1.0
        e_aligned = e
    residuals = np.linalg.norm(g - e_aligned, axis=1)
    return report_from_residuals(residuals, alignment, scale)


def report_from_residuals(residuals, alignment: Transform, scale: float = 1.0) -> AteReport:
    r = np.asarray(residuals, dtype=float)
    if r.size == 0:
        raise NoMatchesError("no residuals")
    mean = float(r.mean())
    ms = float((r * r).mean())
    rmse = float(np.sqrt(ms))
    # population std derived from the identity rmse^2 = mean^2 + std^2
    std = float(np.sqrt(max(0.0, ms - mean * mean)))
    return AteReport(
        rmse_m=rmse,
        std_m=std,
        mean_m=mean,
        median_m=float(np.median(r)),
        max_m=float(r.max()),
        n_pairs=int(r.size),
        alignment=alignment,
        scale=float(scale),
    )


def trajectory_length(t: Trajectory) -> float:
    """Sum of straight-line distances between consecutive positions."""
    pos = t.positions
    if len(pos) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(pos, axis=0), axis=1).sum())


def duration_s(t: Trajectory) -> float:
    stamps = t.stamps_ns
    return float(int(stamps[-1]) - int(stamps[0])) / 1e9


def report_json_dict(report: AteReport) -> dict:
    """Canonical JSON form: sorted keys, floats at 6 decimal places."""
    q = report.alignment.rotation
    return {
        "alignment": {
            "quaternion_wxyz": [round(v, 6) for v in (q.w, q.x, q.y, q.z)],
            "translation_m": [round(v, 6) for v in report.alignment.translation],
        },
        "max_m": round(report.max_m, 6),
        "mean_m": round(report.mean_m, 6),
        "median_m": round(report.median_m, 6),
        "n_pairs": report.n_pairs,
        "rmse_m": round(report.rmse_m, 6),
        "scale": round(report.scale, 6),
        "std_m": round(report.std_m, 6),
    }


ATE_CSV_HEADER = "rmse_m,std_m,mean_m,median_m,max_m,n_pairs"


def report_csv_row(report: AteReport) -> str:
    return (
        f"{report.rmse_m:.6f},{report.std_m:.6f},{report.mean_m:.6f},"
        f"{report.median_m:.6f},{report.max_m:.6f},{report.n_pairs}"
    )
