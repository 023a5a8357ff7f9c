"""Deterministic simulated world.

WorldState is immutable; every operation returns a new state. Object
poses keep z relative to the support surface, so raising the workspace
elevation moves table and objects together and reset comparisons stay
exact under elevation changes. Placed objects are upright: roll and
pitch of a placement are ignored by the contact model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

from ..errors import (
    ApparatusRangeError,
    ConfigError,
    MissingNominalPoseError,
    ObjectHeldError,
    UnknownObjectError,
)
from ..geometry import CameraIntrinsics, GraspCandidate, ObjectModel, Pose6DoF

DOOR_RANGE = (0.0, math.pi / 2)
DRAWER_RANGE = (0.0, 0.5)
DEFAULT_GRASP_TOLERANCE = 0.02


@dataclass(frozen=True)
class EmbodimentParams:
    """Everything that may differ between robots. Behavior code never does."""

    name: str
    reach: float
    home: Mapping
    gripper_max_width: float
    mount_pose: Pose6DoF
    camera: CameraIntrinsics
    camera_pose: Pose6DoF
    image_width: int = 160
    image_height: int = 120
    base_noise: float = 0.004

    def __post_init__(self):
        if self.reach <= 0:
            raise ValueError(f"embodiment {self.name!r}: reach must be positive")
        if self.gripper_max_width <= 0:
            raise ValueError(
                f"embodiment {self.name!r}: gripper_max_width must be positive")
        object.__setattr__(self, "home", MappingProxyType(dict(self.home)))


# Two presets differing only in this record: reach, home posture, gripper,
# mount offset. Cameras sit at the same pose so grasp outcomes depend only
# on candidate geometry.
_CAMERA = CameraIntrinsics(fx=130.0, fy=130.0, cx=79.5, cy=59.5)
_CAMERA_POSE = Pose6DoF(0.45, 0.0, 1.15, math.pi, 0.0, 0.0)

EMBODIMENT_PRESETS = {
    "arm_a": EmbodimentParams(
        name="arm_a",
        reach=0.85,
        home={"shoulder_pan": 0.0, "shoulder_lift": -1.571, "elbow": 1.571,
              "wrist_1": -1.571, "wrist_2": -1.571, "wrist_3": 0.0},
        gripper_max_width=0.085,
        mount_pose=Pose6DoF(0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        camera=_CAMERA,
        camera_pose=_CAMERA_POSE,
    ),
    "arm_b": EmbodimentParams(
        name="arm_b",
        reach=0.90,
        home={"joint_1": 4.712, "joint_2": 2.618, "joint_3": 0.0,
              "joint_4": 0.524, "joint_5": -1.571, "joint_6": 1.345},
        gripper_max_width=0.085,
        mount_pose=Pose6DoF(-0.05, 0.0, 0.0, 0.0, 0.0, 0.0),
        camera=_CAMERA,
        camera_pose=_CAMERA_POSE,
    ),
}


def get_embodiment(name: str) -> EmbodimentParams:
    try:
        return EMBODIMENT_PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"no embodiment preset named {name!r}; "
            f"available: {sorted(EMBODIMENT_PRESETS)}") from None


@dataclass(frozen=True)
class ObjectInstance:
    model: ObjectModel
    pose: Pose6DoF
    held: bool = False


@dataclass(frozen=True)
class WorldState:
    objects: Mapping = field(default_factory=dict)
    door_angle: float = 0.0
    drawer_extension: float = 0.0
    workspace_elevation: float = 0.0
    lighting_noise_scale: float = 1.0
    table_noise_scale: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "objects",
                           MappingProxyType(dict(self.objects)))
        _check_range("door_angle", self.door_angle, DOOR_RANGE)
        _check_range("drawer_extension", self.drawer_extension, DRAWER_RANGE)

    def object_named(self, name: str) -> ObjectInstance:
        instance = self.objects.get(name)
        if instance is None:
            raise UnknownObjectError(f"no object named {name!r} in world")
        return instance

    def with_object(self, name: str, instance: ObjectInstance) -> "WorldState":
        objects = dict(self.objects)
        objects[name] = instance
        return replace(self, objects=objects)

    def scene_signature(self) -> dict:
        """The resettable state: object placements plus apparatus readings.

        Excludes seed and noise scales, which are trial configuration
        rather than things a reset behavior restores.
        """
        return {
            "objects": {
                name: (inst.pose.x, inst.pose.y, inst.pose.z, inst.pose.roll,
                       inst.pose.pitch, inst.pose.yaw, inst.held)
                for name, inst in sorted(self.objects.items())
            },
            "door_angle": self.door_angle,
            "drawer_extension": self.drawer_extension,
        }


def _check_range(name: str, value: float, bounds) -> None:
    low, high = bounds
    if not (low <= value <= high):
        raise ApparatusRangeError(
            f"{name} = {value} outside [{low}, {high}]")


@dataclass(frozen=True)
class GraspAttempt:
    candidate: GraspCandidate
    embodiment: str
    target: str


@dataclass(frozen=True)
class GraspResult:
    success: bool
    reason: Optional[str] = None


# -- contact geometry ----------------------------------------------------------

def placed_footprint(instance: ObjectInstance) -> np.ndarray:
    """Object footprint in world xy: local vertices rotated by yaw, translated."""
    yaw = instance.pose.yaw
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[c, -s], [s, c]])
    verts = instance.model.footprint_array() @ rot.T
    return verts + np.array([instance.pose.x, instance.pose.y])


def placed_centroid(instance: ObjectInstance) -> np.ndarray:
    yaw = instance.pose.yaw
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[c, -s], [s, c]])
    return rot @ instance.model.footprint_centroid() + \
        np.array([instance.pose.x, instance.pose.y])


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def point_in_convex_polygon(point, verts: np.ndarray) -> bool:
    """Inclusive containment test for a CCW convex polygon."""
    n = len(verts)
    for i in range(n):
        if _cross(verts[i], verts[(i + 1) % n], point) < 0:
            return False
    return True


def _on_segment(p, q, r) -> bool:
    return (min(p[0], r[0]) <= q[0] <= max(p[0], r[0])
            and min(p[1], r[1]) <= q[1] <= max(p[1], r[1]))


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
       ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True  # proper crossing
    # touching or collinear overlap
    if d1 == 0 and _on_segment(q1, p1, q2):
        return True
    if d2 == 0 and _on_segment(q1, p2, q2):
        return True
    if d3 == 0 and _on_segment(p1, q1, p2):
        return True
    if d4 == 0 and _on_segment(p1, q2, p2):
        return True
    return False


def segment_intersects_polygon(p1, p2, verts: np.ndarray) -> bool:
    """True if segment p1-p2 touches or enters the convex polygon."""
    if point_in_convex_polygon(p1, verts) or point_in_convex_polygon(p2, verts):
        return True
    n = len(verts)
    for i in range(n):
        if _segments_intersect(p1, p2, verts[i], verts[(i + 1) % n]):
            return True
    return False


# -- operations ------------------------------------------------------------------

def attempt_grasp(world: WorldState, attempt: GraspAttempt,
                  embodiment: EmbodimentParams,
                  grasp_tolerance: float = DEFAULT_GRASP_TOLERANCE):
    """Execute one grasp. Returns (GraspResult, new world).

    Success needs all three: the candidate within the arm's reach of its
    mount, the closing segment touching the object footprint inside the
    object's height band (tolerance of overshoot above the top), and the
    xy error from the footprint centroid at most grasp_tolerance. On
    success the object is held and leaves the support surface.
    """
    instance = world.object_named(attempt.target)
    if instance.held:
        raise ObjectHeldError(f"object {attempt.target!r} is already held")
    pose = attempt.candidate.pose
    position = np.array([pose.x, pose.y, pose.z])

    mount = embodiment.mount_pose.position
    if float(np.linalg.norm(position - mount)) > embodiment.reach:
        return GraspResult(False, "out-of-reach"), world

    z_bottom = world.workspace_elevation + instance.pose.z
    z_top = z_bottom + instance.model.height
    verts = placed_footprint(instance)
    half = embodiment.gripper_max_width / 2.0
    direction = np.array([math.cos(pose.yaw), math.sin(pose.yaw)])
    center = position[:2]
    p1, p2 = center - half * direction, center + half * direction
    in_band = z_bottom <= pose.z <= z_top + grasp_tolerance
    if not (in_band and segment_intersects_polygon(p1, p2, verts)):
        return GraspResult(False, "no-contact"), world

    offset = float(np.linalg.norm(center - placed_centroid(instance)))
    if offset > grasp_tolerance:
        return GraspResult(False, "tolerance"), world

    held = replace(instance, held=True)
    return GraspResult(True, None), world.with_object(attempt.target, held)


def reset_objects(world: WorldState, nominal_poses: Mapping) -> WorldState:
    """Restore every object exactly to its nominal pose and release it."""
    objects = {}
    for name, instance in world.objects.items():
        nominal = nominal_poses.get(name)
        if nominal is None:
            raise MissingNominalPoseError(
                f"object {name!r} has no nominal pose to reset to")
        objects[name] = replace(instance, pose=nominal, held=False)
    return replace(world, objects=objects)


def operate_door(world: WorldState, angle: float) -> WorldState:
    _check_range("door_angle", angle, DOOR_RANGE)
    return replace(world, door_angle=angle)


def operate_drawer(world: WorldState, extension: float) -> WorldState:
    _check_range("drawer_extension", extension, DRAWER_RANGE)
    return replace(world, drawer_extension=extension)


def reset_apparatus(world: WorldState) -> WorldState:
    return replace(world, door_angle=0.0, drawer_extension=0.0)
