"""The planning logic: one candidate at the centroid of the cloud.

This component accepts exactly one sensor product, a point cloud, and
answers plan_grasp with a single top-down pose at the arithmetic mean
of the points. Quality is a constant 1.0 heuristic: the component makes
no claim beyond "this is the middle of what you showed me". An empty
cloud yields an empty candidate list.

Requests are validated here rather than trusted, because the socket
protocol puts the component on its own process boundary: anything on
the wire is foreign input. Every rejection is a RequestRejected, which
the server reports as a schema error without closing the connection.
"""

from __future__ import annotations

COMPONENT_ID = "ext_centroid"
INTERFACE = "grasp_planner"
ACCEPTED_INPUTS = ("point_cloud",)
OUTPUT_KIND = "pose"

SENSOR_FIELDS = ("depth_image", "point_cloud", "object_model")

# the full plan_grasp request vocabulary; anything else is rejected
_KNOWN_FIELDS = frozenset(SENSOR_FIELDS) | {
    "intrinsics", "camera_pose", "max_candidates", "min_quality",
}


class RequestRejected(Exception):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _validate_cloud(doc) -> list:
    if not isinstance(doc, dict):
        raise RequestRejected("point_cloud must be an object",
                              field="point_cloud")
    extra = doc.keys() - {"points", "frame"}
    if extra:
        raise RequestRejected(f"point_cloud has unknown fields: {sorted(extra)}",
                              field=f"point_cloud.{sorted(extra)[0]}")
    if "points" not in doc:
        raise RequestRejected("point_cloud is missing the points list",
                              field="point_cloud.points")
    points = doc["points"]
    if not isinstance(points, list) or not all(_is_number(v) for v in points):
        raise RequestRejected("points must be a flat list of numbers",
                              field="point_cloud.points")
    if len(points) % 3 != 0:
        raise RequestRejected(
            f"point list length {len(points)} is not a multiple of 3",
            field="point_cloud.points")
    frame = doc.get("frame", "world")
    if not isinstance(frame, str):
        raise RequestRejected("frame must be a string",
                              field="point_cloud.frame")
    return points


def validate_request(payload: dict) -> list:
    """Check a plan_grasp payload; returns the flat point list."""
    unknown = payload.keys() - _KNOWN_FIELDS
    if unknown:
        raise RequestRejected(f"unknown field {sorted(unknown)[0]!r}",
                              field=sorted(unknown)[0])
    present = [f for f in SENSOR_FIELDS if f in payload]
    if len(present) != 1:
        raise RequestRejected(
            f"exactly one of {list(SENSOR_FIELDS)} required, "
            f"got {present or 'none'}")
    if present[0] not in ACCEPTED_INPUTS:
        raise RequestRejected(
            f"this planner accepts {list(ACCEPTED_INPUTS)}, "
            f"request carries {present}", field="accepted_inputs")
    if "max_candidates" in payload:
        limit = payload["max_candidates"]
        if not isinstance(limit, int) or isinstance(limit, bool) or limit < 1:
            raise RequestRejected("max_candidates must be a positive integer",
                                  field="max_candidates")
    if "min_quality" in payload and not _is_number(payload["min_quality"]):
        raise RequestRejected("min_quality must be a number",
                              field="min_quality")
    return _validate_cloud(payload["point_cloud"])


def plan_grasp(payload: dict) -> dict:
    points = validate_request(payload)
    count = len(points) // 3
    if count == 0:
        return {"candidates": []}
    cx = sum(points[0::3]) / count
    cy = sum(points[1::3]) / count
    cz = sum(points[2::3]) / count
    candidate = {
        "pose": [float(cx), float(cy), float(cz), 0.0, 0.0, 0.0],
        "quality": 1.0,
        "quality_kind": "heuristic",
    }
    if payload.get("min_quality", 0.0) > 1.0:
        return {"candidates": []}
    return {"candidates": [candidate]}
