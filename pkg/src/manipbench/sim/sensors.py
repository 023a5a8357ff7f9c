"""Sensor synthesis: top-surface ray-cast depth plus deprojected clouds.

Rays carry a camera-frame z component of 1, so the parameter t at a hit
IS the pinhole depth value; a flat plane therefore renders at constant
depth. Noise is zero-mean Gaussian with standard deviation
base_noise x lighting_noise_scale, with table pixels further scaled by
table_noise_scale, all drawn from one generator seeded by the world.
"""

from __future__ import annotations

import numpy as np

from ..geometry import INVALID_DEPTH, DepthImage, PointCloud, deproject_depth_image
from .world import EmbodimentParams, WorldState, placed_footprint


def render_depth(world: WorldState, embodiment: EmbodimentParams) -> DepthImage:
    k = embodiment.camera
    w, h = embodiment.image_width, embodiment.image_height
    cam = embodiment.camera_pose
    rotation = cam.rotation_matrix()
    origin = cam.position

    us, vs = np.meshgrid(np.arange(w, dtype=np.float64),
                         np.arange(h, dtype=np.float64))
    dirs_cam = np.stack([(us - k.cx) / k.fx, (vs - k.cy) / k.fy,
                         np.ones_like(us)], axis=-1)
    dirs = dirs_cam @ rotation.T
    dz = dirs[..., 2]

    depth = _plane_hits(origin, dirs, dz, world.workspace_elevation)
    table_mask = np.isfinite(depth)
    for instance in world.objects.values():
        if instance.held:
            continue
        z_top = (world.workspace_elevation + instance.pose.z
                 + instance.model.height)
        t = _plane_hits(origin, dirs, dz, z_top)
        hit_xy = origin[:2] + t[..., None] * dirs[..., :2]
        inside = _points_in_polygon(hit_xy, placed_footprint(instance))
        nearer = inside & np.isfinite(t) & ((t < depth) | ~np.isfinite(depth))
        depth = np.where(nearer, t, depth)
        table_mask &= ~nearer

    sigma = embodiment.base_noise * world.lighting_noise_scale
    if sigma > 0:
        rng = np.random.default_rng(world.rng_seed)
        scale = np.where(table_mask, sigma * world.table_noise_scale, sigma)
        depth = depth + rng.standard_normal(depth.shape) * scale

    # rays that hit nothing (only possible for non-downward cameras)
    depth = np.where(np.isfinite(depth), depth, INVALID_DEPTH)
    return DepthImage(width=w, height=h, data=depth, frame="camera")


def render_cloud(world: WorldState, embodiment: EmbodimentParams) -> PointCloud:
    """Deprojection of render_depth, point for point, in the world frame."""
    depth = render_depth(world, embodiment)
    return deproject_depth_image(depth, embodiment.camera,
                                 embodiment.camera_pose, frame="world")


def _plane_hits(origin, dirs, dz, plane_z):
    """Ray parameter t for the horizontal plane, +inf where rays miss it."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (plane_z - origin[2]) / dz
    return np.where((dz != 0) & (t > 0), t, np.inf)


def _points_in_polygon(points, verts) -> np.ndarray:
    """Vectorized inclusive containment in a CCW convex polygon."""
    inside = np.ones(points.shape[:-1], dtype=bool)
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        cross = ((bx - ax) * (points[..., 1] - ay)
                 - (by - ay) * (points[..., 0] - ax))
        inside &= cross >= 0
    return inside
