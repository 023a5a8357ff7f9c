"""Built-in components: two grasp planners, a motion planner, a cloud filter.

These are the batteries-included implementations that let a pipeline run
end to end without any external process. The two grasp planners cover
the two output families on purpose: ``top_surface`` emits pose
candidates directly, ``centroid_rect`` emits image rectangles and so
exercises the bus's rectangle-to-pose normalization. Everything here is
a pure function of its inputs, hence reentrant.

Selection (``select_candidate``) is not a bus component; behaviors call
it as a compute step to collapse a candidate list into one grasp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .bus import ComponentBus, ComponentDescriptor, interface_class, wire
from .bus.registry import SENSOR_FIELDS
from .errors import ConfigError, NoCandidateError, SchemaError, ServiceFailure
from .geometry import (
    CameraIntrinsics,
    DepthImage,
    GraspCandidate,
    GraspRectangle,
    PointCloud,
    Pose6DoF,
    Trajectory,
)

DEFAULT_MAX_CANDIDATES = 5
DEFAULT_CLUSTER_DISTANCE = 0.02
DEFAULT_PLANE_TOLERANCE = 0.01
DEFAULT_FOREGROUND_MARGIN = 0.02


@dataclass(frozen=True)
class PlannerConfig:
    max_candidates: int = DEFAULT_MAX_CANDIDATES
    min_quality: float = 0.0

    def __post_init__(self):
        if not isinstance(self.max_candidates, int) \
                or self.max_candidates < 1:
            raise ConfigError(
                f"max_candidates must be a positive integer, "
                f"got {self.max_candidates!r}")


def _config_from_request(request: dict) -> PlannerConfig:
    return PlannerConfig(
        max_candidates=request.get("max_candidates", DEFAULT_MAX_CANDIDATES),
        min_quality=request.get("min_quality", 0.0))


def _modal_level(values: np.ndarray, bin_width: float) -> float:
    """Mean of the most populated bin; ties go to the lowest bin."""
    bins = np.round(values / bin_width).astype(np.int64)
    uniq, counts = np.unique(bins, return_counts=True)
    modal = uniq[int(np.argmax(counts))]
    return float(values[bins == modal].mean())


def _principal_angle(dx: np.ndarray, dy: np.ndarray) -> float:
    """Orientation of the major axis from second central moments.

    Returned in (-pi/2, pi/2]; isotropic spreads (squares, single
    points) resolve to 0 so symmetric scenes stay deterministic.
    """
    mxx = float(np.mean(dx * dx))
    myy = float(np.mean(dy * dy))
    mxy = float(np.mean(dx * dy))
    eps = 1e-12 * (mxx + myy) + 1e-30
    if abs(2.0 * mxy) <= eps and abs(mxx - myy) <= eps:
        return 0.0
    return 0.5 * math.atan2(2.0 * mxy, mxx - myy)


# -- grasp planning --------------------------------------------------------------

def top_surface_plan(cloud: PointCloud, cfg: PlannerConfig,
                     cluster_distance: float = DEFAULT_CLUSTER_DISTANCE,
                     plane_tolerance: float = DEFAULT_PLANE_TOLERANCE) -> list:
    """Top-down candidates from above-plane connectivity clusters.

    The support plane is the modal z level; points more than
    plane_tolerance above it are clustered at cluster_distance
    connectivity. Each cluster yields one candidate: xy at its centroid,
    z at its top, yaw along its principal axis, quality the cluster's
    share of the above-plane points.
    """
    if len(cloud) == 0:
        return []
    pts = cloud.points
    plane_z = _modal_level(pts[:, 2], plane_tolerance)
    above = pts[pts[:, 2] > plane_z + plane_tolerance]
    if len(above) == 0:
        return []

    tree = cKDTree(above[:, :2])
    pairs = tree.query_pairs(cluster_distance, output_type="ndarray")
    n = len(above)
    adjacency = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    count, labels = connected_components(adjacency, directed=False)

    candidates = []
    for label in range(count):  # label order follows first occurrence
        cluster = above[labels == label]
        quality = len(cluster) / n
        if quality < cfg.min_quality:
            continue
        cx, cy = cluster[:, 0].mean(), cluster[:, 1].mean()
        yaw = _principal_angle(cluster[:, 0] - cx, cluster[:, 1] - cy)
        candidates.append(GraspCandidate(
            pose=Pose6DoF(float(cx), float(cy), float(cluster[:, 2].max()),
                          0.0, 0.0, yaw),
            quality=quality, quality_kind="heuristic"))
    candidates.sort(key=lambda c: -c.quality)  # stable: ties keep order
    return candidates[:cfg.max_candidates]


def centroid_rect_plan(depth: DepthImage, k: CameraIntrinsics,
                       cfg: PlannerConfig,
                       foreground_margin: float = DEFAULT_FOREGROUND_MARGIN) -> list:
    """One rectangle over the largest foreground region of a depth image.

    Foreground means valid pixels more than foreground_margin nearer
    than the modal (table) depth. The rectangle sits at the region's
    pixel centroid, turned along its principal axis, sized by its
    extents; quality is the region's fill ratio of that oriented box.
    Intrinsics are unused here: the rectangle is an image-plane product
    and deprojection happens downstream.
    """
    del k
    grid = depth.grid()
    valid = grid > 0.0
    if not valid.any():
        return []
    table = _modal_level(grid[valid], foreground_margin)
    foreground = valid & (grid < table - foreground_margin)
    if not foreground.any():
        return []

    labels, count = ndimage.label(foreground, structure=np.ones((3, 3)))
    sizes = ndimage.sum_labels(foreground, labels, index=range(1, count + 1))
    largest = int(np.argmax(sizes)) + 1  # first label wins ties
    vs, us = np.nonzero(labels == largest)

    cu, cv = us.mean(), vs.mean()
    angle = _principal_angle(us - cu, vs - cv)
    axis = np.array([math.cos(angle), math.sin(angle)])
    normal = np.array([-axis[1], axis[0]])
    offsets = np.column_stack([us - cu, vs - cv])
    along = offsets @ axis
    across = offsets @ normal
    width = float(np.ptp(along)) + 1.0   # +1: pixels occupy unit cells
    height = float(np.ptp(across)) + 1.0
    quality = min(1.0, len(us) / (width * height))
    if quality < cfg.min_quality:
        return []
    return [GraspRectangle(x=float(cu), y=float(cv), width=width,
                           height=height, angle=angle, quality=quality)]


# -- motion and perception ---------------------------------------------------------

def straight_line_plan(start, goal, steps: int) -> Trajectory:
    """Per-joint linear interpolation, endpoints included."""
    if not isinstance(steps, int) or steps < 2:
        raise ValueError(f"steps must be an integer >= 2, got {steps!r}")
    if set(start) != set(goal):
        raise ValueError(
            f"start and goal joints differ: {sorted(set(start) ^ set(goal))}")
    names = list(start)
    series = {name: np.linspace(start[name], goal[name], steps)
              for name in names}
    waypoints = [{name: float(series[name][i]) for name in names}
                 for i in range(steps)]
    return Trajectory(waypoints=waypoints)


def crop_and_remove_plane(cloud: PointCloud, workspace=None,
                          plane_tolerance: float = DEFAULT_PLANE_TOLERANCE) -> PointCloud:
    """Workspace crop followed by support-plane removal.

    workspace is (xmin, ymin, zmin, xmax, ymax, zmax), inclusive; None
    skips the crop. The plane is the modal z level of the cropped cloud;
    only points strictly more than plane_tolerance above it survive.
    """
    if len(cloud) == 0:
        return cloud
    pts = cloud.points
    if workspace is not None:
        low, high = np.asarray(workspace[:3]), np.asarray(workspace[3:])
        if len(workspace) != 6 or np.any(low > high):
            raise ValueError(f"workspace must be a valid 6-number box, "
                             f"got {workspace!r}")
        keep = np.all((pts >= low) & (pts <= high), axis=1)
        pts = pts[keep]
    if len(pts) == 0:
        return PointCloud(points=pts.reshape(0, 3), frame=cloud.frame)
    plane_z = _modal_level(pts[:, 2], plane_tolerance)
    pts = pts[pts[:, 2] > plane_z + plane_tolerance]
    return PointCloud(points=pts, frame=cloud.frame)


# -- candidate selection -------------------------------------------------------------

SELECTION_POLICIES = ("best_quality", "nearest", "first")


def select_candidate(candidates, policy: str = "best_quality",
                     reference=None) -> GraspCandidate:
    """Collapse a candidate list to one grasp; ties keep list order."""
    if not candidates:
        raise NoCandidateError("no grasp candidates to select from")
    if policy == "first":
        return candidates[0]
    if policy == "best_quality":
        worst = -math.inf
        return max(candidates,
                   key=lambda c: worst if c.quality is None else c.quality)
    if policy == "nearest":
        if reference is None:
            ref = np.zeros(3)
        elif isinstance(reference, Pose6DoF):
            ref = reference.position
        else:
            ref = np.asarray(reference, dtype=float)
        return min(candidates,
                   key=lambda c: float(np.linalg.norm(c.pose.position - ref)))
    raise ConfigError(f"unknown selection policy {policy!r}; "
                      f"expected one of {SELECTION_POLICIES}")


# -- bus adapters ---------------------------------------------------------------------

def _reject_undeclared_inputs(descriptor, request):
    for kind in SENSOR_FIELDS:
        if kind in request and kind not in descriptor.accepted_inputs:
            raise SchemaError(
                f"component {descriptor.id!r} does not accept {kind}",
                field=kind)


class TopSurfacePlanner:
    """grasp_planner over point clouds, emitting pose candidates."""

    def __init__(self, component_id: str = "top_surface",
                 cluster_distance: float = DEFAULT_CLUSTER_DISTANCE,
                 plane_tolerance: float = DEFAULT_PLANE_TOLERANCE):
        self.cluster_distance = cluster_distance
        self.plane_tolerance = plane_tolerance
        self.descriptor = ComponentDescriptor(
            id=component_id, interface=interface_class("grasp_planner"),
            accepted_inputs=("point_cloud",), output_kind="pose_with_quality")

    def handle(self, op: str, request: dict) -> dict:
        if op != "plan_grasp":
            raise ServiceFailure(f"{self.descriptor.id} has no op {op!r}")
        _reject_undeclared_inputs(self.descriptor, request)
        candidates = top_surface_plan(
            wire.decode_cloud(request["point_cloud"]),
            _config_from_request(request),
            cluster_distance=self.cluster_distance,
            plane_tolerance=self.plane_tolerance)
        return {"candidates": [wire.encode_candidate(c) for c in candidates]}


class CentroidRectPlanner:
    """grasp_planner over depth images, emitting grasp rectangles."""

    def __init__(self, component_id: str = "centroid_rect",
                 foreground_margin: float = DEFAULT_FOREGROUND_MARGIN):
        self.foreground_margin = foreground_margin
        self.descriptor = ComponentDescriptor(
            id=component_id, interface=interface_class("grasp_planner"),
            accepted_inputs=("depth_image",), output_kind="rectangle")

    def handle(self, op: str, request: dict) -> dict:
        if op != "plan_grasp":
            raise ServiceFailure(f"{self.descriptor.id} has no op {op!r}")
        _reject_undeclared_inputs(self.descriptor, request)
        k = (wire.decode_intrinsics(request["intrinsics"])
             if "intrinsics" in request else None)
        rects = centroid_rect_plan(
            wire.decode_depth_image(request["depth_image"]), k,
            _config_from_request(request),
            foreground_margin=self.foreground_margin)
        return {"rectangles": [wire.encode_rect(r) for r in rects]}


class LineMotionPlanner:
    """motion_planner producing straight-line joint trajectories."""

    def __init__(self, component_id: str = "line_motion",
                 default_steps: int = 10):
        self.default_steps = default_steps
        self.descriptor = ComponentDescriptor(
            id=component_id, interface=interface_class("motion_planner"))

    def handle(self, op: str, request: dict) -> dict:
        if op != "plan_motion":
            raise ServiceFailure(f"{self.descriptor.id} has no op {op!r}")
        trajectory = straight_line_plan(request["start"], request["goal"],
                                        request.get("steps",
                                                    self.default_steps))
        return {"trajectory": wire.encode_trajectory(trajectory)}


class PlaneCropFilter:
    """perception filter: workspace crop plus plane removal."""

    def __init__(self, component_id: str = "plane_crop",
                 default_tolerance: float = DEFAULT_PLANE_TOLERANCE):
        self.default_tolerance = default_tolerance
        self.descriptor = ComponentDescriptor(
            id=component_id, interface=interface_class("perception"))

    def handle(self, op: str, request: dict) -> dict:
        if op != "filter_cloud":
            raise ServiceFailure(f"{self.descriptor.id} has no op {op!r}")
        filtered = crop_and_remove_plane(
            wire.decode_cloud(request["point_cloud"]),
            workspace=request.get("workspace"),
            plane_tolerance=request.get("plane_tolerance",
                                        self.default_tolerance))
        return {"point_cloud": wire.encode_cloud(filtered)}


def register_reference_components(bus: ComponentBus) -> dict:
    """Register all four built-ins in-process; returns handles by id."""
    components = [TopSurfacePlanner(), CentroidRectPlanner(),
                  LineMotionPlanner(), PlaneCropFilter()]
    return {c.descriptor.id: bus.register(c.descriptor, c)
            for c in components}
