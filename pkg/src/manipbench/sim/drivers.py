"""Bus-facing drivers over the simulated world.

The world itself is immutable, so the drivers share one SimWorldStore
and swap whole states under a lock. Both drivers are in-process
components; they mutate shared state, which a socket boundary would
only complicate.
"""

from __future__ import annotations

import threading

from ..bus import ComponentBus, ComponentDescriptor, interface_class
from ..bus import wire
from ..errors import ServiceFailure
from ..geometry import GraspCandidate
from .sensors import render_cloud, render_depth
from .world import (
    DEFAULT_GRASP_TOLERANCE,
    EmbodimentParams,
    GraspAttempt,
    WorldState,
    attempt_grasp,
    get_embodiment,
    operate_door,
    operate_drawer,
    reset_apparatus,
    reset_objects,
)


class SimWorldStore:
    """Holds the current WorldState and the nominal poses resets restore."""

    def __init__(self, world: WorldState, nominal_poses=None):
        self._lock = threading.RLock()
        self._world = world
        if nominal_poses is None:
            nominal_poses = {name: inst.pose
                             for name, inst in world.objects.items()}
        self._nominal = dict(nominal_poses)

    @property
    def world(self) -> WorldState:
        with self._lock:
            return self._world

    @property
    def nominal_poses(self) -> dict:
        return dict(self._nominal)

    def replace(self, world: WorldState) -> None:
        with self._lock:
            self._world = world

    def update(self, fn) -> WorldState:
        """Apply fn(world) -> world atomically; returns the new state."""
        with self._lock:
            self._world = fn(self._world)
            return self._world


class SimRobotDriver:
    """robot_driver component: sensing and grasp execution on the store."""

    def __init__(self, store: SimWorldStore, embodiment,
                 component_id: str = "sim_robot",
                 grasp_tolerance: float = DEFAULT_GRASP_TOLERANCE):
        if isinstance(embodiment, str):
            embodiment = get_embodiment(embodiment)
        if not isinstance(embodiment, EmbodimentParams):
            raise TypeError("embodiment must be a preset name or "
                            "EmbodimentParams")
        self.store = store
        self.embodiment = embodiment
        self.grasp_tolerance = grasp_tolerance
        self.joints = dict(embodiment.home)
        self.descriptor = ComponentDescriptor(
            id=component_id, interface=interface_class("robot_driver"))

    def handle(self, op: str, request: dict) -> dict:
        if op == "sense":
            world = self.store.world
            return {
                "depth_image": wire.encode_depth_image(
                    render_depth(world, self.embodiment)),
                "point_cloud": wire.encode_cloud(
                    render_cloud(world, self.embodiment)),
                "intrinsics": wire.encode_intrinsics(self.embodiment.camera),
                "camera_pose": wire.encode_pose(self.embodiment.camera_pose),
            }
        if op == "grasp":
            attempt = GraspAttempt(
                candidate=GraspCandidate(pose=wire.decode_pose(request["pose"])),
                embodiment=self.embodiment.name,
                target=request["target"],
            )
            outcome_box = []

            def _do(world):
                result, world = attempt_grasp(
                    world, attempt, self.embodiment,
                    grasp_tolerance=self.grasp_tolerance)
                outcome_box.append(result)
                return world

            self.store.update(_do)
            result = outcome_box[0]
            return {
                "success": result.success,
                "reason": result.reason,
                "outcome": "succeeded" if result.success else "grasp_failed",
            }
        if op == "execute_trajectory":
            waypoints = wire.decode_trajectory_waypoints(request["trajectory"])
            self.joints = dict(waypoints[-1])
            return {"outcome": "succeeded"}
        if op == "home":
            self.joints = dict(self.embodiment.home)
            return {"joint_state": wire.encode_joint_state(self.joints)}
        raise ServiceFailure(f"robot driver has no op {op!r}")


class SimApparatusDriver:
    """apparatus component: scene resets and articulation on the store."""

    def __init__(self, store: SimWorldStore,
                 component_id: str = "sim_apparatus"):
        self.store = store
        self.descriptor = ComponentDescriptor(
            id=component_id, interface=interface_class("apparatus"))

    def handle(self, op: str, request: dict) -> dict:
        store = self.store
        if op == "reset_objects":
            store.update(lambda w: reset_objects(w, store.nominal_poses))
            return {"outcome": "succeeded"}
        if op == "reset_apparatus":
            store.update(reset_apparatus)
            return {"outcome": "succeeded"}
        if op == "set_door":
            store.update(lambda w: operate_door(w, request["angle"]))
            return {"outcome": "succeeded"}
        if op == "set_drawer":
            store.update(lambda w: operate_drawer(w, request["extension"]))
            return {"outcome": "succeeded"}
        if op == "status":
            world = store.world
            return {"door_angle": world.door_angle,
                    "drawer_extension": world.drawer_extension}
        raise ServiceFailure(f"apparatus driver has no op {op!r}")


def register_sim_components(bus: ComponentBus, store: SimWorldStore,
                            embodiment,
                            robot_id: str = "sim_robot",
                            apparatus_id: str = "sim_apparatus",
                            grasp_tolerance: float = DEFAULT_GRASP_TOLERANCE):
    """Register both drivers on the bus; returns (robot, apparatus)."""
    robot = SimRobotDriver(store, embodiment, component_id=robot_id,
                           grasp_tolerance=grasp_tolerance)
    apparatus = SimApparatusDriver(store, component_id=apparatus_id)
    # shared mutable store; serialize callers
    bus.register(robot.descriptor, robot, reentrant=False)
    bus.register(apparatus.descriptor, apparatus, reentrant=False)
    return robot, apparatus
