"""Rotation and rigid-transform algebra.

Quaternions follow the Hamilton convention (w, x, y, z) and are kept in a
canonical form: unit norm, w >= 0 (ties broken on the first nonzero vector
component). Euler angles are exchanged in degrees; the canonical convention
is intrinsic X-then-Y-then-Z, i.e. the rotation matrix factors as
Rx(x) @ Ry(y) @ Rz(z). Two alternative conventions are kept selectable
because printed calibration tables rarely state theirs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

_NORM_TOL = 1e-9
_LOCK_DEG = 89.99


class EulerConvention(enum.Enum):
    INTRINSIC_XYZ = "intrinsic-xyz"
    EXTRINSIC_XYZ = "extrinsic-xyz"
    INTRINSIC_ZYX = "intrinsic-zyx"


DEFAULT_CONVENTION = EulerConvention.INTRINSIC_XYZ


def _clean_zero(v: float) -> float:
    # collapse -0.0 to 0.0 so serialized output is byte-stable
    return v + 0.0


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion, canonical sign, components (w, x, y, z)."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        w, x, y, z = float(self.w), float(self.x), float(self.y), float(self.z)
        n2 = w * w + x * x + y * y + z * z
        if n2 == 0.0:
            raise ValueError("zero-norm quaternion")
        n = math.sqrt(n2)
        if abs(n - 1.0) > _NORM_TOL:
            # hard renormalization only when clearly off; values already unit
            # within tolerance pass through untouched so parsed calibrations
            # round-trip byte-identically
            w, x, y, z = w / n, x / n, y / n, z / n
        if w < 0.0 or (w == 0.0 and _first_nonzero_negative(x, y, z)):
            w, x, y, z = -w, -x, -y, -z
        object.__setattr__(self, "w", _clean_zero(w))
        object.__setattr__(self, "x", _clean_zero(x))
        object.__setattr__(self, "y", _clean_zero(y))
        object.__setattr__(self, "z", _clean_zero(z))

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    def conjugate(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def multiply(self, other: "UnitQuaternion") -> "UnitQuaternion":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return UnitQuaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v) -> np.ndarray:
        """Rotate a 3-vector by this quaternion."""
        v = np.asarray(v, dtype=float)
        u = np.array([self.x, self.y, self.z])
        t = 2.0 * np.cross(u, v)
        return v + self.w * t + np.cross(u, t)

    def as_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    @classmethod
    def from_matrix(cls, m) -> "UnitQuaternion":
        """Quaternion from a 3x3 rotation matrix (Shepperd's method)."""
        m = np.asarray(m, dtype=float)
        t = m[0, 0] + m[1, 1] + m[2, 2]
        if t > 0.0:
            s = 2.0 * math.sqrt(t + 1.0)
            w = 0.25 * s
            x = (m[2, 1] - m[1, 2]) / s
            y = (m[0, 2] - m[2, 0]) / s
            z = (m[1, 0] - m[0, 1]) / s
        elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
            s = 2.0 * math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
            w = (m[2, 1] - m[1, 2]) / s
            x = 0.25 * s
            y = (m[0, 1] + m[1, 0]) / s
            z = (m[0, 2] + m[2, 0]) / s
        elif m[1, 1] >= m[2, 2]:
            s = 2.0 * math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
            w = (m[0, 2] - m[2, 0]) / s
            x = (m[0, 1] + m[1, 0]) / s
            y = 0.25 * s
            z = (m[1, 2] + m[2, 1]) / s
        else:
            s = 2.0 * math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
            w = (m[1, 0] - m[0, 1]) / s
            x = (m[0, 2] + m[2, 0]) / s
            y = (m[1, 2] + m[2, 1]) / s
            z = 0.25 * s
        return cls(w, x, y, z)


def _first_nonzero_negative(x: float, y: float, z: float) -> bool:
    for c in (x, y, z):
        if c != 0.0:
            return c < 0.0
    return False


@dataclass(frozen=True)
class EulerAnglesDeg:
    """Euler angles in degrees; gimbal_lock marks a degenerate extraction.

    Outputs of euler_from_quat are canonical: x/z in (-180, 180], y in
    [-90, 90]. Inputs to quat_from_euler may be any finite angles.
    """

    x_deg: float
    y_deg: float
    z_deg: float
    gimbal_lock: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("x_deg", "y_deg", "z_deg"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"non-finite angle {name}")
            object.__setattr__(self, name, _clean_zero(v))


@dataclass(frozen=True)
class Transform:
    """Rigid SE(3) transform: rotation then translation (meters)."""

    rotation: UnitQuaternion
    translation: tuple

    def __post_init__(self):
        t = tuple(_clean_zero(float(v)) for v in self.translation)
        if len(t) != 3:
            raise ValueError("translation must have 3 components")
        if not all(math.isfinite(v) for v in t):
            raise ValueError("non-finite translation")
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Transform":
        return cls(UnitQuaternion.identity(), (0.0, 0.0, 0.0))

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation.as_matrix()
        m[:3, 3] = self.translation
        return m

    @classmethod
    def from_matrix(cls, m) -> "Transform":
        m = np.asarray(m, dtype=float)
        return cls(UnitQuaternion.from_matrix(m[:3, :3]), tuple(m[:3, 3]))


def _axis_rotations(e: EulerAnglesDeg):
    hx = math.radians(e.x_deg) / 2.0
    hy = math.radians(e.y_deg) / 2.0
    hz = math.radians(e.z_deg) / 2.0
    qx = UnitQuaternion(math.cos(hx), math.sin(hx), 0.0, 0.0)
    qy = UnitQuaternion(math.cos(hy), 0.0, math.sin(hy), 0.0)
    qz = UnitQuaternion(math.cos(hz), 0.0, 0.0, math.sin(hz))
    return qx, qy, qz


def quat_from_euler(
    e: EulerAnglesDeg, convention: EulerConvention = DEFAULT_CONVENTION
) -> UnitQuaternion:
    """Quaternion from Euler angles under the given convention."""
    qx, qy, qz = _axis_rotations(e)
    if convention is EulerConvention.INTRINSIC_XYZ:
        return qx.multiply(qy).multiply(qz)
    # extrinsic XYZ and intrinsic ZYX share the matrix product Rz @ Ry @ Rx
    return qz.multiply(qy).multiply(qx)


def _wrap_deg(a: float) -> float:
    # wrap into (-180, 180]
    a = math.fmod(a, 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return _clean_zero(a)


def euler_from_quat(
    q: UnitQuaternion, convention: EulerConvention = DEFAULT_CONVENTION
) -> EulerAnglesDeg:
    """Euler angles in degrees from a unit quaternion.

    Near the pitch pole (|y| > 89.99 deg) x and z are not separable; the
    full residual is assigned to x, z is set to 0 and gimbal_lock is set.
    """
    m = q.as_matrix()
    if convention is EulerConvention.INTRINSIC_XYZ:
        sy = max(-1.0, min(1.0, m[0, 2]))
        y = math.asin(sy)
        if abs(math.degrees(y)) > _LOCK_DEG:
            x = math.atan2(m[1, 0], m[1, 1]) if sy > 0 else math.atan2(-m[1, 0], m[1, 1])
            return EulerAnglesDeg(
                _wrap_deg(math.degrees(x)), math.degrees(y), 0.0, gimbal_lock=True
            )
        x = math.atan2(-m[1, 2], m[2, 2])
        z = math.atan2(-m[0, 1], m[0, 0])
    else:
        sy = max(-1.0, min(1.0, -m[2, 0]))
        y = math.asin(sy)
        if abs(math.degrees(y)) > _LOCK_DEG:
            x = math.atan2(m[0, 1], m[0, 2]) if sy > 0 else math.atan2(-m[0, 1], -m[0, 2])
            return EulerAnglesDeg(
                _wrap_deg(math.degrees(x)), math.degrees(y), 0.0, gimbal_lock=True
            )
        x = math.atan2(m[2, 1], m[2, 2])
        z = math.atan2(m[1, 0], m[0, 0])
    return EulerAnglesDeg(
        _wrap_deg(math.degrees(x)), math.degrees(y), _wrap_deg(math.degrees(z))
    )


def compose(a: Transform, b: Transform) -> Transform:
    """Transform equal to applying b first, then a."""
    rot = a.rotation.multiply(b.rotation)
    trans = a.rotation.rotate(b.translation) + np.asarray(a.translation)
    return Transform(rot, tuple(trans))


def invert(t: Transform) -> Transform:
    rot = t.rotation.conjugate()
    trans = -rot.rotate(t.translation)
    return Transform(rot, tuple(trans))


def transform_point(t: Transform, p) -> np.ndarray:
    """Apply t to a 3D point: R @ p + translation."""
    return t.rotation.rotate(p) + np.asarray(t.translation)


def rotation_angle_between(a: UnitQuaternion, b: UnitQuaternion) -> float:
    """Geodesic angle between two rotations, degrees in [0, 180].

    Uses the chord between the quaternions (sign-aligned) rather than
    acos of the dot product; the latter loses ~1e-8 rad of precision
    near zero, this form is exact for identical inputs.
    """
    va = (a.w, a.x, a.y, a.z)
    vb = (b.w, b.x, b.y, b.z)
    d_minus = math.sqrt(sum((p - q) ** 2 for p, q in zip(va, vb)))
    d_plus = math.sqrt(sum((p + q) ** 2 for p, q in zip(va, vb)))
    c = min(d_minus, d_plus) / 2.0
    return min(180.0, math.degrees(4.0 * math.asin(min(1.0, c))))


def translation_distance(a, b) -> float:
    """Euclidean distance between two translations, meters."""
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))
