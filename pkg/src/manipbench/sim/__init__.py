from .world import (
    DEFAULT_GRASP_TOLERANCE,
    DOOR_RANGE,
    DRAWER_RANGE,
    EMBODIMENT_PRESETS,
    EmbodimentParams,
    GraspAttempt,
    GraspResult,
    ObjectInstance,
    WorldState,
    attempt_grasp,
    get_embodiment,
    operate_door,
    operate_drawer,
    placed_centroid,
    placed_footprint,
    point_in_convex_polygon,
    reset_apparatus,
    reset_objects,
    segment_intersects_polygon,
)
from .sensors import render_cloud, render_depth
from .scenario import SCENARIO_SCHEMA_VERSION, build_world, load_scenario
from .drivers import (
    SimApparatusDriver,
    SimRobotDriver,
    SimWorldStore,
    register_sim_components,
)

__all__ = [
    "DEFAULT_GRASP_TOLERANCE",
    "DOOR_RANGE",
    "DRAWER_RANGE",
    "EMBODIMENT_PRESETS",
    "EmbodimentParams",
    "GraspAttempt",
    "GraspResult",
    "ObjectInstance",
    "WorldState",
    "attempt_grasp",
    "get_embodiment",
    "operate_door",
    "operate_drawer",
    "placed_centroid",
    "placed_footprint",
    "point_in_convex_polygon",
    "reset_apparatus",
    "reset_objects",
    "segment_intersects_polygon",
    "render_cloud",
    "render_depth",
    "SCENARIO_SCHEMA_VERSION",
    "build_world",
    "load_scenario",
    "SimApparatusDriver",
    "SimRobotDriver",
    "SimWorldStore",
    "register_sim_components",
]
