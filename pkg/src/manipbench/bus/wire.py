"""Codecs between domain objects and their wire (JSON) form.

Depth images travel as base64-encoded little-endian 32-bit floats in
row-major order; point clouds as flat [x0, y0, z0, x1, ...] arrays.
Both are bit-exact: encode then decode reproduces the array bytes.
"""

from __future__ import annotations

import base64

import numpy as np

from ..errors import SchemaError
from ..geometry import (
    CameraIntrinsics,
    DepthImage,
    GraspCandidate,
    GraspRectangle,
    ObjectModel,
    PointCloud,
    Pose6DoF,
)


def encode_pose(pose: Pose6DoF) -> list:
    return [pose.x, pose.y, pose.z, pose.roll, pose.pitch, pose.yaw]


def decode_pose(doc) -> Pose6DoF:
    if len(doc) != 6:
        raise SchemaError(f"pose needs 6 numbers, got {len(doc)}", field="pose")
    return Pose6DoF(*[float(v) for v in doc])


def encode_depth_image(image: DepthImage) -> dict:
    raw = np.ascontiguousarray(image.data, dtype="<f4").tobytes()
    return {
        "width": image.width,
        "height": image.height,
        "data": base64.b64encode(raw).decode("ascii"),
        "frame": image.frame,
    }


def decode_depth_image(doc: dict) -> DepthImage:
    raw = base64.b64decode(doc["data"], validate=True)
    expected = doc["width"] * doc["height"] * 4
    if len(raw) != expected:
        raise SchemaError(
            f"depth data holds {len(raw)} bytes, {doc['width']}x{doc['height']} "
            f"needs {expected}", field="depth_image.data")
    data = np.frombuffer(raw, dtype="<f4").reshape(doc["height"], doc["width"])
    return DepthImage(width=doc["width"], height=doc["height"],
                      data=data.astype(np.float64),
                      frame=doc.get("frame", "camera"))


def encode_cloud(cloud: PointCloud) -> dict:
    return {
        "points": [float(v) for v in np.asarray(cloud.points).reshape(-1)],
        "frame": cloud.frame,
    }


def decode_cloud(doc: dict) -> PointCloud:
    flat = doc["points"]
    if len(flat) % 3 != 0:
        raise SchemaError(f"point list length {len(flat)} is not a multiple of 3",
                          field="point_cloud.points")
    points = np.asarray(flat, dtype=np.float64).reshape(-1, 3)
    return PointCloud(points=points, frame=doc.get("frame", "world"))


def encode_object_model(model: ObjectModel) -> dict:
    return {
        "name": model.name,
        "footprint": [[float(x), float(y)] for x, y in model.footprint],
        "height": model.height,
    }


def decode_object_model(doc: dict) -> ObjectModel:
    return ObjectModel(name=doc["name"],
                       footprint=tuple((float(x), float(y))
                                       for x, y in doc["footprint"]),
                       height=float(doc["height"]))


def encode_intrinsics(k: CameraIntrinsics) -> dict:
    return {"fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy}


def decode_intrinsics(doc: dict) -> CameraIntrinsics:
    return CameraIntrinsics(fx=float(doc["fx"]), fy=float(doc["fy"]),
                            cx=float(doc["cx"]), cy=float(doc["cy"]))


def encode_candidate(candidate: GraspCandidate) -> dict:
    doc = {"pose": encode_pose(candidate.pose)}
    if candidate.quality_kind != "none":
        doc["quality"] = candidate.quality
        doc["quality_kind"] = candidate.quality_kind
    return doc


def decode_candidate(doc: dict) -> GraspCandidate:
    return GraspCandidate(pose=decode_pose(doc["pose"]),
                          quality=doc.get("quality"),
                          quality_kind=doc.get("quality_kind", "none"))


def encode_rect(rect: GraspRectangle) -> dict:
    doc = {"x": rect.x, "y": rect.y, "width": rect.width,
           "height": rect.height, "angle": rect.angle}
    if rect.quality is not None:
        doc["quality"] = rect.quality
    return doc


def decode_rect(doc: dict) -> GraspRectangle:
    return GraspRectangle(x=float(doc["x"]), y=float(doc["y"]),
                          width=float(doc["width"]), height=float(doc["height"]),
                          angle=float(doc["angle"]), quality=doc.get("quality"))


def encode_joint_state(js: dict) -> dict:
    return {name: float(v) for name, v in js.items()}


def encode_trajectory(trajectory) -> list:
    return [encode_joint_state(wp) for wp in trajectory.waypoints]


def decode_trajectory_waypoints(doc: list) -> list:
    return [dict(wp) for wp in doc]
