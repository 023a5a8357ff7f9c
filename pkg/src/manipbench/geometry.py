"""Geometry, sensor, and grasp message types shared by every module.

Conventions (used everywhere, never overridden):

* units: meters, radians, pixels
* orientation: intrinsic X-Y-Z roll-pitch-yaw, i.e. the rotation matrix is
  ``R = Rx(roll) @ Ry(pitch) @ Rz(yaw)`` with each rotation about the moved
  body axis; matches the (x, y, z, r, p, y) field order of 6-DoF grasp poses
* angles normalized to the half-open interval (-pi, pi]
* invalid depth pixels carry the sentinel ``INVALID_DEPTH`` (-1.0)
* pinhole camera: +z is the optical axis, +x right, +y down in the image
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import BoundsError, InvalidPoseError, NoDepthError

TWO_PI = 2.0 * math.pi

#: Reserved sentinel for depth pixels without a valid measurement.
INVALID_DEPTH = -1.0

QUALITY_KINDS = ("success_probability", "force_closure", "heuristic", "none")


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    r = math.remainder(a, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidPoseError(f"{name} has non-finite field: {v!r}")


@dataclass(frozen=True)
class Pose6DoF:
    """Position in meters plus intrinsic X-Y-Z roll-pitch-yaw in radians."""

    x: float
    y: float
    z: float
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        _require_finite("Pose6DoF", self.x, self.y, self.z,
                        self.roll, self.pitch, self.yaw)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def rotation_matrix(self) -> np.ndarray:
        return rpy_to_matrix(self.roll, self.pitch, self.yaw)

    def transform_point(self, p: Sequence[float]) -> np.ndarray:
        """Map a point from this pose's frame into the parent frame."""
        return self.rotation_matrix() @ np.asarray(p, dtype=float) + self.position


IDENTITY_POSE = Pose6DoF(0.0, 0.0, 0.0)


def normalize_angles(pose: Pose6DoF) -> Pose6DoF:
    """Wrap the pose's roll/pitch/yaw into (-pi, pi]; position unchanged."""
    return Pose6DoF(pose.x, pose.y, pose.z,
                    wrap_angle(pose.roll), wrap_angle(pose.pitch), wrap_angle(pose.yaw))


@dataclass(frozen=True)
class GraspRectangle:
    """2D grasp parameterization in the image plane.

    ``x, y`` are the rectangle center in pixels, ``angle`` is the in-plane
    rotation in radians. ``quality`` is an optional success probability
    (rectangle-family planners may score their output).
    """

    x: float
    y: float
    width: float
    height: float
    angle: float
    quality: Optional[float] = None

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"rectangle extents must be positive, got "
                             f"{self.width} x {self.height}")
        _require_finite("GraspRectangle", self.x, self.y, self.angle)


@dataclass(frozen=True)
class GraspCandidate:
    """A scored 6-DoF grasp pose; the normalized output of any grasp planner.

    ``quality`` must be present exactly when ``quality_kind`` is not "none",
    and lies in [0, 1] when the kind is "success_probability". Force-closure
    scores are carried opaquely (no range constraint).
    """

    pose: Pose6DoF
    quality: Optional[float] = None
    quality_kind: str = "none"

    def __post_init__(self):
        if self.quality_kind not in QUALITY_KINDS:
            raise ValueError(f"unknown quality_kind: {self.quality_kind!r}")
        if (self.quality is None) != (self.quality_kind == "none"):
            raise ValueError("quality must be present iff quality_kind != 'none'")
        if self.quality is not None:
            if not math.isfinite(self.quality):
                raise ValueError("quality must be finite")
            if self.quality_kind == "success_probability" and not (0.0 <= self.quality <= 1.0):
                raise ValueError(f"success_probability out of [0, 1]: {self.quality}")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DepthImage:
    """Row-major depth map in meters; invalid pixels hold ``INVALID_DEPTH``."""

    width: int
    height: int
    data: np.ndarray
    frame: str = "camera"

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64).reshape(-1)
        if data.size != self.width * self.height:
            raise ValueError(f"depth data length {data.size} != "
                             f"{self.width} x {self.height}")
        bad = ~((data >= 0.0) | (data == INVALID_DEPTH))
        if bad.any():
            raise ValueError("depth values must be >= 0 or the invalid sentinel")
        object.__setattr__(self, "data", _readonly(data))

    def __eq__(self, other):
        if not isinstance(other, DepthImage):
            return NotImplemented
        return (self.width, self.height, self.frame) == (other.width, other.height, other.frame) \
            and np.array_equal(self.data, other.data)

    def at(self, u: int, v: int) -> float:
        """Depth at integer pixel (u, v); raises on out-of-image coordinates."""
        if not (0 <= u < self.width and 0 <= v < self.height):
            raise BoundsError(f"pixel ({u}, {v}) outside {self.width}x{self.height} image")
        return float(self.data[v * self.width + u])

    def grid(self) -> np.ndarray:
        """Depth as a (height, width) view."""
        return self.data.reshape(self.height, self.width)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Unordered (N, 3) points in meters."""

    points: np.ndarray
    frame: str = "world"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (N, 3), got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", _readonly(pts))

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.frame == other.frame and np.array_equal(self.points, other.points)

    def __len__(self) -> int:
        return self.points.shape[0]


def _polygon_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _is_convex(vertices: np.ndarray) -> bool:
    n = len(vertices)
    sign = 0.0
    for i in range(n):
        a, b, c = vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross == 0.0:
            continue
        if sign == 0.0:
            sign = math.copysign(1.0, cross)
        elif math.copysign(1.0, cross) != sign:
            return False
    return sign != 0.0


@dataclass(frozen=True, eq=False)
class ObjectModel:
    """Graspable object simplified to a convex footprint extruded to ``height``.

    The footprint is a convex polygon of (x, y) vertices in the object frame,
    counter-clockwise, centered wherever the author put the object origin.
    """

    name: str
    footprint: tuple
    height: float

    def __post_init__(self):
        verts = np.asarray([(float(x), float(y)) for x, y in self.footprint], dtype=float)
        if len(verts) < 3:
            raise ValueError("footprint needs at least 3 vertices")
        if not np.isfinite(verts).all():
            raise ValueError("footprint has non-finite vertices")
        area = _polygon_area(verts)
        if area < 0:  # normalize to counter-clockwise
            verts = verts[::-1]
            area = -area
        if area <= 0.0:
            raise ValueError("footprint area must be positive")
        if not _is_convex(verts):
            raise ValueError("footprint must be convex")
        if not self.height > 0:
            raise ValueError("height must be positive")
        object.__setattr__(self, "footprint", tuple(map(tuple, verts.tolist())))

    def __eq__(self, other):
        if not isinstance(other, ObjectModel):
            return NotImplemented
        return (self.name, self.footprint, self.height) == \
            (other.name, other.footprint, other.height)

    def footprint_array(self) -> np.ndarray:
        return np.asarray(self.footprint, dtype=float)

    def footprint_centroid(self) -> np.ndarray:
        """Area centroid of the footprint polygon, object frame."""
        v = self.footprint_array()
        x, y = v[:, 0], v[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        a = cross.sum() / 2.0
        cx = ((x + xn) * cross).sum() / (6.0 * a)
        cy = ((y + yn) * cross).sum() / (6.0 * a)
        return np.array([cx, cy])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")


JointState = Mapping[str, float]


def _freeze_joint_state(js: Mapping[str, float]) -> Mapping[str, float]:
    return MappingProxyType({str(k): float(v) for k, v in js.items()})


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A sequence of at least two waypoints over one fixed joint-name set."""

    waypoints: tuple

    def __post_init__(self):
        wps = tuple(_freeze_joint_state(w) for w in self.waypoints)
        if len(wps) < 2:
            raise ValueError("trajectory needs at least 2 waypoints")
        names = set(wps[0])
        for i, w in enumerate(wps[1:], start=1):
            if set(w) != names:
                raise ValueError(f"waypoint {i} joint names differ from waypoint 0")
        object.__setattr__(self, "waypoints", wps)

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return [dict(w) for w in self.waypoints] == [dict(w) for w in other.waypoints]

    def joint_names(self) -> tuple:
        return tuple(sorted(self.waypoints[0]))


# --- rotations -------------------------------------------------------------

def rpy_to_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rotation matrix for intrinsic X-Y-Z roll-pitch-yaw."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return rx @ ry @ rz


def matrix_to_rpy(m: np.ndarray) -> tuple:
    """Inverse of :func:`rpy_to_matrix`; angles in (-pi, pi].

    At gimbal lock (|pitch| = pi/2) the roll/yaw split is not unique; roll
    is set to 0 and yaw absorbs the remaining rotation.
    """
    sp = float(np.clip(m[0, 2], -1.0, 1.0))
    pitch = math.asin(sp)
    if abs(sp) < 1.0 - 1e-12:
        roll = math.atan2(-m[1, 2], m[2, 2])
        yaw = math.atan2(-m[0, 1], m[0, 0])
    else:
        roll = 0.0
        yaw = math.atan2(m[1, 0], m[1, 1]) * (1.0 if sp > 0 else -1.0)
    return wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)


def pose_to_quaternion(pose: Pose6DoF) -> tuple:
    """Unit quaternion (qw, qx, qy, qz) for the pose's orientation.

    Composes qx(roll) * qy(pitch) * qz(yaw), matching the intrinsic X-Y-Z
    convention of :func:`rpy_to_matrix`.
    """
    hr, hp, hy = pose.roll / 2.0, pose.pitch / 2.0, pose.yaw / 2.0
    qx = (math.cos(hr), math.sin(hr), 0.0, 0.0)
    qy = (math.cos(hp), 0.0, math.sin(hp), 0.0)
    qz = (math.cos(hy), 0.0, 0.0, math.sin(hy))
    q = _qmul(_qmul(qx, qy), qz)
    n = math.sqrt(sum(c * c for c in q))
    return tuple(c / n for c in q)


def quaternion_to_angles(qw: float, qx: float, qy: float, qz: float) -> tuple:
    """(roll, pitch, yaw) reversing :func:`pose_to_quaternion`."""
    n = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
    if n == 0.0 or not math.isfinite(n):
        raise InvalidPoseError("quaternion has zero or non-finite norm")
    qw, qx, qy, qz = qw / n, qx / n, qy / n, qz / n
    m = np.array([
        [1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw)],
        [2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw)],
        [2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)],
    ])
    return matrix_to_rpy(m)


def _qmul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


# --- camera model ----------------------------------------------------------

def deproject_pixel(u: float, v: float, depth: float, k: CameraIntrinsics) -> np.ndarray:
    """Pinhole deprojection of pixel (u, v) at ``depth`` into the camera frame."""
    return np.array([(u - k.cx) * depth / k.fx,
                     (v - k.cy) * depth / k.fy,
                     depth])


def rect_to_pose(rect: GraspRectangle, depth: DepthImage, k: CameraIntrinsics,
                 camera_pose: Pose6DoF) -> Pose6DoF:
    """Lift a 2D grasp rectangle into a 6-DoF grasp pose.

    Position is the pinhole deprojection of the rectangle center at the
    image depth there, expressed in the camera_pose parent frame.
    Orientation is ``R_cam @ Rx(pi) @ Rz(rect.angle)``: the grasp approach
    axis (+z) is anti-parallel to the camera optical axis and the rectangle
    angle composes with the camera yaw.
    """
    u, v = int(round(rect.x)), int(round(rect.y))
    d = depth.at(u, v)  # raises BoundsError outside the image
    if d == INVALID_DEPTH or d <= 0.0:
        raise NoDepthError(f"no valid depth at rectangle center ({u}, {v})")
    p_cam = deproject_pixel(rect.x, rect.y, d, k)
    p_world = camera_pose.transform_point(p_cam)
    r_grasp = camera_pose.rotation_matrix() @ rpy_to_matrix(math.pi, 0.0, 0.0) \
        @ rpy_to_matrix(0.0, 0.0, rect.angle)
    roll, pitch, yaw = matrix_to_rpy(r_grasp)
    return Pose6DoF(float(p_world[0]), float(p_world[1]), float(p_world[2]),
                    roll, pitch, yaw)


def deproject_depth_image(depth: DepthImage, k: CameraIntrinsics,
                          camera_pose: Pose6DoF, frame: str = "world") -> PointCloud:
    """Deproject every valid pixel of a depth image into a point cloud."""
    grid = depth.grid()
    vs, us = np.mgrid[0:depth.height, 0:depth.width]
    valid = grid > 0.0
    d = grid[valid]
    u = us[valid].astype(float)
    v = vs[valid].astype(float)
    pts_cam = np.stack([(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d], axis=1)
    pts = pts_cam @ camera_pose.rotation_matrix().T + camera_pose.position
    return PointCloud(points=pts, frame=frame)
