"""Simulated world: contact model, rendering, resets, scenario files, drivers."""

import dataclasses
import json
import math

import numpy as np
import pytest
from matplotlib.path import Path as MplPath

from manipbench.bus import ComponentBus
from manipbench.errors import (
    ApparatusRangeError,
    ConfigError,
    MissingNominalPoseError,
    ObjectHeldError,
    ServiceFailure,
    UnknownObjectError,
)
from manipbench.geometry import (
    INVALID_DEPTH,
    GraspCandidate,
    ObjectModel,
    Pose6DoF,
    deproject_depth_image,
)
from manipbench.sim import (
    DEFAULT_GRASP_TOLERANCE,
    EMBODIMENT_PRESETS,
    EmbodimentParams,
    GraspAttempt,
    ObjectInstance,
    SimWorldStore,
    WorldState,
    attempt_grasp,
    build_world,
    get_embodiment,
    load_scenario,
    operate_door,
    operate_drawer,
    placed_centroid,
    register_sim_components,
    render_cloud,
    render_depth,
    reset_apparatus,
    reset_objects,
)
from manipbench.bus import wire

ARM_A = EMBODIMENT_PRESETS["arm_a"]
ARM_B = EMBODIMENT_PRESETS["arm_b"]


def box_model(name, wx, wy, height):
    h_x, h_y = wx / 2.0, wy / 2.0
    return ObjectModel(name=name, height=height,
                       footprint=[(-h_x, -h_y), (h_x, -h_y),
                                  (h_x, h_y), (-h_x, h_y)])


def single_box_world(x=0.45, y=0.0, size=0.08, height=0.1, **world_kw):
    inst = ObjectInstance(model=box_model("box", size, size, height),
                          pose=Pose6DoF(x, y, 0, 0, 0, 0))
    return WorldState(objects={"box": inst}, **world_kw)


def centroid_candidate(world, name, z, yaw=0.0):
    cx, cy = placed_centroid(world.objects[name])
    return GraspCandidate(pose=Pose6DoF(float(cx), float(cy), z, 0, 0, yaw))


def quiet(embodiment):
    return dataclasses.replace(embodiment, base_noise=0.0)


# -- independent grasp oracle --------------------------------------------------
#
# Same decision cascade, different geometry code: polygon tests go through
# matplotlib.path, the centroid comes from a triangle-fan decomposition.

def oracle_grasp(world, attempt, emb, tol=DEFAULT_GRASP_TOLERANCE):
    inst = world.objects[attempt.target]
    pose = attempt.candidate.pose
    mount = emb.mount_pose
    if math.dist((pose.x, pose.y, pose.z),
                 (mount.x, mount.y, mount.z)) > emb.reach:
        return (False, "out-of-reach")

    c, s = math.cos(inst.pose.yaw), math.sin(inst.pose.yaw)
    verts = [(inst.pose.x + c * vx - s * vy, inst.pose.y + s * vx + c * vy)
             for vx, vy in inst.model.footprint]
    z_bottom = world.workspace_elevation + inst.pose.z
    z_top = z_bottom + inst.model.height
    half = emb.gripper_max_width / 2.0
    dx, dy = math.cos(pose.yaw), math.sin(pose.yaw)
    p1 = (pose.x - half * dx, pose.y - half * dy)
    p2 = (pose.x + half * dx, pose.y + half * dy)
    # closed Path consumes its last vertex as the CLOSEPOLY marker,
    # so the first vertex has to be repeated
    poly = MplPath(np.asarray(verts + verts[:1]), closed=True)
    seg = MplPath(np.asarray([p1, p2]))
    touches = (poly.intersects_path(seg, filled=True)
               or poly.contains_point(p1) or poly.contains_point(p2))
    if not (touches and z_bottom <= pose.z <= z_top + tol):
        return (False, "no-contact")

    cx = cy = area = 0.0
    x0, y0 = verts[0]
    for (x1, y1), (x2, y2) in zip(verts[1:], verts[2:]):
        a = ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)) / 2.0
        area += a
        cx += a * (x0 + x1 + x2) / 3.0
        cy += a * (y0 + y1 + y2) / 3.0
    cx, cy = cx / area, cy / area
    if math.hypot(pose.x - cx, pose.y - cy) > tol:
        return (False, "tolerance")
    return (True, None)


def build_oracle_world():
    objects = {
        "box": ObjectInstance(model=box_model("box", 0.08, 0.08, 0.12),
                              pose=Pose6DoF(0.30, 0.05, 0, 0, 0, 0.4)),
        "slab": ObjectInstance(model=box_model("slab", 0.14, 0.04, 0.06),
                               pose=Pose6DoF(0.52, -0.18, 0, 0, 0, -1.1)),
        "wedge": ObjectInstance(
            model=ObjectModel(name="wedge", height=0.09,
                              footprint=[(-0.04, -0.03), (0.05, -0.03),
                                         (0.0, 0.05)]),
            pose=Pose6DoF(0.10, 0.22, 0, 0, 0, 2.0)),
    }
    return WorldState(objects=objects)


@pytest.fixture
def oracle_world():
    return build_oracle_world()


def test_grasp_model_matches_oracle_on_random_candidates(oracle_world):
    rng = np.random.default_rng(20240817)
    names = list(oracle_world.objects)
    embodiments = [ARM_A, ARM_B]
    seen = set()
    for i in range(1000):
        target = names[i % len(names)]
        emb = embodiments[i % 2]
        if i % 2 == 0:  # spread over the workspace
            x = rng.uniform(-0.3, 0.9)
            y = rng.uniform(-0.5, 0.5)
            z = rng.uniform(-0.05, 0.3)
        else:  # aimed near the target with jitter
            cx, cy = placed_centroid(oracle_world.objects[target])
            x = cx + rng.normal(0, 0.03)
            y = cy + rng.normal(0, 0.03)
            top = oracle_world.objects[target].model.height
            z = rng.uniform(-0.02, top + 0.06)
        attempt = GraspAttempt(
            candidate=GraspCandidate(
                pose=Pose6DoF(x, y, z, 0, 0, rng.uniform(-math.pi, math.pi))),
            embodiment=emb.name, target=target)
        result, _ = attempt_grasp(oracle_world, attempt, emb)
        got = (result.success, result.reason)
        assert got == oracle_grasp(oracle_world, attempt, emb), \
            f"candidate {i}: {attempt.candidate.pose} on {target} ({emb.name})"
        seen.add(got)
    # the sample must exercise every branch of the cascade
    assert seen == {(True, None), (False, "out-of-reach"),
                    (False, "no-contact"), (False, "tolerance")}


# -- grasp boundary cases -------------------------------------------------------

def test_grasp_at_centroid_succeeds_and_marks_held():
    world = single_box_world()
    attempt = GraspAttempt(candidate=centroid_candidate(world, "box", 0.05),
                           embodiment="arm_a", target="box")
    result, after = attempt_grasp(world, attempt, ARM_A)
    assert result.success and result.reason is None
    assert after.objects["box"].held
    assert not world.objects["box"].held  # original state untouched


def test_offset_equal_to_tolerance_is_inclusive():
    # box at the origin so the 0.02 offset is exact in floating point
    world = single_box_world(x=0.0, y=0.0)
    cx, cy = placed_centroid(world.objects["box"])
    assert (cx, cy) == (0.0, 0.0)
    ok = GraspAttempt(
        candidate=GraspCandidate(pose=Pose6DoF(cx + 0.02, cy, 0.05, 0, 0, 0)),
        embodiment="arm_a", target="box")
    result, _ = attempt_grasp(world, ok, ARM_A)
    assert result.success

    off = GraspAttempt(
        candidate=GraspCandidate(
            pose=Pose6DoF(cx + 0.02 + 1e-6, cy, 0.05, 0, 0, 0)),
        embodiment="arm_a", target="box")
    result, after = attempt_grasp(world, off, ARM_A)
    assert (result.success, result.reason) == (False, "tolerance")
    assert after is world


def test_height_band_upper_edge():
    world = single_box_world(height=0.1)
    at_edge = GraspAttempt(
        candidate=centroid_candidate(world, "box", 0.1 + 0.02),
        embodiment="arm_a", target="box")
    assert attempt_grasp(world, at_edge, ARM_A)[0].success

    above = GraspAttempt(
        candidate=centroid_candidate(world, "box", 0.1 + 0.02 + 1e-9),
        embodiment="arm_a", target="box")
    result, _ = attempt_grasp(world, above, ARM_A)
    assert (result.success, result.reason) == (False, "no-contact")


def test_below_support_is_no_contact():
    world = single_box_world()
    attempt = GraspAttempt(candidate=centroid_candidate(world, "box", -0.01),
                           embodiment="arm_a", target="box")
    result, _ = attempt_grasp(world, attempt, ARM_A)
    assert (result.success, result.reason) == (False, "no-contact")


def test_reach_is_measured_from_the_mount():
    world = single_box_world(x=-0.88, y=0.0)
    attempt = GraspAttempt(candidate=centroid_candidate(world, "box", 0.05),
                           embodiment="arm_a", target="box")
    result_a, _ = attempt_grasp(world, attempt, ARM_A)
    assert (result_a.success, result_a.reason) == (False, "out-of-reach")
    # arm_b mounts 5 cm back along -x, bringing the same point in range
    result_b, _ = attempt_grasp(world, attempt, ARM_B)
    assert result_b.success


def test_gripper_contact_reaches_past_the_tolerance_radius():
    # segment touches the footprint edge while the centroid error is large
    world = single_box_world(size=0.08)
    cx, cy = placed_centroid(world.objects["box"])
    attempt = GraspAttempt(
        candidate=GraspCandidate(pose=Pose6DoF(cx + 0.07, cy, 0.05, 0, 0, 0)),
        embodiment="arm_a", target="box")
    result, _ = attempt_grasp(world, attempt, ARM_A)
    assert (result.success, result.reason) == (False, "tolerance")

    # rotate the gripper parallel to the edge: no part of it touches
    attempt = GraspAttempt(
        candidate=GraspCandidate(
            pose=Pose6DoF(cx + 0.07, cy, 0.05, 0, 0, math.pi / 2)),
        embodiment="arm_a", target="box")
    result, _ = attempt_grasp(world, attempt, ARM_A)
    assert (result.success, result.reason) == (False, "no-contact")


def test_elevated_workspace_shifts_the_grasp_band():
    world = single_box_world(workspace_elevation=0.2)
    low = GraspAttempt(candidate=centroid_candidate(world, "box", 0.05),
                       embodiment="arm_a", target="box")
    result, _ = attempt_grasp(world, low, ARM_A)
    assert (result.success, result.reason) == (False, "no-contact")
    lifted = GraspAttempt(candidate=centroid_candidate(world, "box", 0.25),
                          embodiment="arm_a", target="box")
    assert attempt_grasp(world, lifted, ARM_A)[0].success


def test_held_and_unknown_targets_raise():
    world = single_box_world()
    attempt = GraspAttempt(candidate=centroid_candidate(world, "box", 0.05),
                           embodiment="arm_a", target="box")
    _, held_world = attempt_grasp(world, attempt, ARM_A)
    with pytest.raises(ObjectHeldError):
        attempt_grasp(held_world, attempt, ARM_A)
    missing = dataclasses.replace(attempt, target="ghost")
    with pytest.raises(UnknownObjectError):
        attempt_grasp(world, missing, ARM_A)


# -- resets and apparatus --------------------------------------------------------

def test_reset_objects_restores_the_signature_exactly():
    world = single_box_world()
    nominal = {"box": world.objects["box"].pose}
    before = world.scene_signature()

    attempt = GraspAttempt(candidate=centroid_candidate(world, "box", 0.05),
                           embodiment="arm_a", target="box")
    _, disturbed = attempt_grasp(world, attempt, ARM_A)
    moved = disturbed.with_object(
        "box", dataclasses.replace(disturbed.objects["box"],
                                   pose=Pose6DoF(0.1, 0.1, 0, 0, 0, 1.0)))
    assert moved.scene_signature() != before

    restored = reset_objects(moved, nominal)
    assert restored.scene_signature() == before
    assert reset_objects(restored, nominal).scene_signature() == before


def test_reset_objects_requires_a_nominal_pose_for_every_object():
    world = single_box_world()
    with pytest.raises(MissingNominalPoseError):
        reset_objects(world, {})


def test_apparatus_ranges_are_inclusive():
    world = WorldState()
    assert operate_door(world, math.pi / 2).door_angle == math.pi / 2
    assert operate_drawer(world, 0.5).drawer_extension == 0.5
    with pytest.raises(ApparatusRangeError):
        operate_door(world, -0.001)
    with pytest.raises(ApparatusRangeError):
        operate_door(world, math.pi / 2 + 0.001)
    with pytest.raises(ApparatusRangeError):
        operate_drawer(world, 0.51)


def test_reset_apparatus_zeroes_articulation():
    world = operate_drawer(operate_door(WorldState(), 0.7), 0.3)
    cleared = reset_apparatus(world)
    assert (cleared.door_angle, cleared.drawer_extension) == (0.0, 0.0)
    assert reset_apparatus(cleared) == cleared


def test_signature_ignores_seed_and_noise_settings():
    world = single_box_world(rng_seed=1)
    other = dataclasses.replace(world, rng_seed=99,
                                lighting_noise_scale=2.5,
                                table_noise_scale=4.0)
    assert world.scene_signature() == other.scene_signature()
    assert world.scene_signature() != \
        dataclasses.replace(world, door_angle=0.2).scene_signature()


def test_world_rejects_out_of_range_articulation():
    with pytest.raises(ApparatusRangeError):
        WorldState(door_angle=3.0)
    with pytest.raises(ApparatusRangeError):
        WorldState(drawer_extension=-0.1)


# -- rendering -------------------------------------------------------------------

def test_empty_world_renders_the_support_plane():
    depth = render_depth(WorldState(), quiet(ARM_A))
    grid = depth.grid()
    assert grid.shape == (120, 160)
    assert np.allclose(grid, 1.15, atol=1e-9)
    assert not np.any(grid == INVALID_DEPTH)


def test_elevation_moves_the_plane_toward_the_camera():
    depth = render_depth(WorldState(workspace_elevation=0.1), quiet(ARM_A))
    assert np.allclose(depth.grid(), 1.05, atol=1e-9)


def test_box_renders_nearer_than_the_table():
    depth = render_depth(single_box_world(), quiet(ARM_A))
    assert depth.at(79, 59) == pytest.approx(1.05, abs=1e-9)
    assert depth.at(0, 0) == pytest.approx(1.15, abs=1e-9)


def test_overlapping_objects_keep_the_nearer_surface():
    tall = ObjectInstance(model=box_model("tall", 0.04, 0.04, 0.3),
                          pose=Pose6DoF(0.45, 0, 0, 0, 0, 0))
    wide = ObjectInstance(model=box_model("wide", 0.2, 0.2, 0.1),
                          pose=Pose6DoF(0.45, 0, 0, 0, 0, 0))
    for order in [("tall", tall, "wide", wide), ("wide", wide, "tall", tall)]:
        world = WorldState(objects={order[0]: order[1], order[2]: order[3]})
        depth = render_depth(world, quiet(ARM_A))
        assert depth.at(79, 59) == pytest.approx(0.85, abs=1e-9)
        # inside the wide footprint, outside the tall one: ~0.06 m off-center
        assert depth.at(90, 59) == pytest.approx(1.05, abs=1e-9)


def test_held_objects_disappear_from_the_image():
    world = single_box_world()
    attempt = GraspAttempt(candidate=centroid_candidate(world, "box", 0.05),
                           embodiment="arm_a", target="box")
    _, held = attempt_grasp(world, attempt, ARM_A)
    depth = render_depth(held, quiet(ARM_A))
    assert np.allclose(depth.grid(), 1.15, atol=1e-9)


def test_rendering_is_deterministic_per_seed():
    world = single_box_world(rng_seed=7)
    a = render_depth(world, ARM_A)
    b = render_depth(world, ARM_A)
    assert np.array_equal(a.grid(), b.grid())
    other = dataclasses.replace(world, rng_seed=8)
    assert not np.array_equal(a.grid(),
                              render_depth(other, ARM_A).grid())


def test_noise_magnitude_tracks_lighting_scale():
    world = WorldState(lighting_noise_scale=2.5, rng_seed=3)
    clean = render_depth(WorldState(), quiet(ARM_A)).grid()
    noisy = render_depth(world, ARM_A).grid()
    sigma = float(np.std(noisy - clean))
    assert sigma == pytest.approx(0.004 * 2.5, rel=0.05)


def test_table_noise_scale_multiplies_table_pixels_only():
    big = ObjectInstance(model=box_model("big", 0.5, 0.5, 0.1),
                         pose=Pose6DoF(0.45, 0, 0, 0, 0, 0))
    world = WorldState(objects={"big": big}, table_noise_scale=3.0, rng_seed=5)
    clean = render_depth(dataclasses.replace(world, rng_seed=5),
                         quiet(ARM_A)).grid()
    noisy = render_depth(world, ARM_A).grid()
    residual = noisy - clean
    on_object = np.isclose(clean, 1.05)
    assert on_object.sum() > 2000 and (~on_object).sum() > 2000
    ratio = float(np.std(residual[~on_object]) / np.std(residual[on_object]))
    assert ratio == pytest.approx(3.0, rel=0.1)


def test_cloud_matches_the_depth_image_point_for_point():
    world = single_box_world()
    emb = quiet(ARM_A)
    cloud = render_cloud(world, emb)
    depth = render_depth(world, emb)
    assert cloud == deproject_depth_image(depth, emb.camera, emb.camera_pose,
                                          frame="world")
    assert len(cloud) == 160 * 120
    box_points = int(np.isclose(depth.grid(), 1.05).sum())
    near_top = np.isclose(cloud.points[:, 2], 0.1, atol=1e-6).sum()
    assert near_top == box_points


def test_rays_missing_every_surface_are_invalid():
    upward = dataclasses.replace(
        quiet(ARM_A), camera_pose=Pose6DoF(0.45, 0, 1.15, 0, 0, 0))
    depth = render_depth(WorldState(), upward)
    assert np.all(depth.grid() == INVALID_DEPTH)
    assert len(render_cloud(WorldState(), upward)) == 0


# -- scenario files ---------------------------------------------------------------

SCENARIO_DOC = {
    "schema_version": 1,
    "objects": [
        {"name": "brick", "height": 0.05,
         "footprint": [[-0.03, -0.02], [0.03, -0.02], [0.03, 0.02],
                       [-0.03, 0.02]],
         "pose": [0.4, 0.1, 0.0, 0.0, 0.0, 0.3]},
    ],
    "door_angle": 0.5,
    "drawer_extension": 0.25,
    "workspace_elevation": 0.05,
    "lighting_noise_scale": 2.5,
    "table_noise_scale": 1.5,
    "seed": 42,
}


def test_scenario_loads_world_and_nominal_poses(tmp_path):
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(SCENARIO_DOC))
    world, nominal = load_scenario(path)
    assert set(world.objects) == {"brick"}
    assert world.objects["brick"].pose == Pose6DoF(0.4, 0.1, 0, 0, 0, 0.3)
    assert nominal["brick"] == world.objects["brick"].pose
    assert world.door_angle == 0.5
    assert world.drawer_extension == 0.25
    assert world.workspace_elevation == 0.05
    assert world.lighting_noise_scale == 2.5
    assert world.table_noise_scale == 1.5
    assert world.rng_seed == 42


def test_scenario_defaults_are_benign():
    world, nominal = build_world({})
    assert world == WorldState()
    assert nominal == {}


@pytest.mark.parametrize("mutate, match", [
    (lambda d: d.update(schema_version=2), "schema_version"),
    (lambda d: d["objects"].append(dict(d["objects"][0])), "duplicate"),
    (lambda d: d["objects"][0].pop("height"), "bad object"),
    (lambda d: d["objects"][0].update(pose=[1, 2, 3]), "bad object"),
    (lambda d: d.update(door_angle="wide"), "scenario fields"),
])
def test_scenario_problems_become_config_errors(mutate, match):
    doc = json.loads(json.dumps(SCENARIO_DOC))
    mutate(doc)
    with pytest.raises(ConfigError, match=match):
        build_world(doc)


def test_scenario_file_problems_become_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_scenario(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_scenario(bad)
    listy = tmp_path / "list.json"
    listy.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="JSON object"):
        load_scenario(listy)


def test_out_of_range_articulation_in_scenario_is_rejected():
    with pytest.raises(ApparatusRangeError):
        build_world({"door_angle": 3.0})


# -- drivers on the bus ------------------------------------------------------------

@pytest.fixture
def sim_bus():
    world = single_box_world(rng_seed=11)
    store = SimWorldStore(world)
    bus = ComponentBus()
    robot, apparatus = register_sim_components(bus, store, "arm_a")
    return bus, store, robot


def test_sense_returns_the_rendered_scene(sim_bus):
    bus, store, robot = sim_bus
    response = bus.call("sim_robot", {"op": "sense"})
    image = wire.decode_depth_image(response["depth_image"])
    expected = render_depth(store.world, robot.embodiment)
    # depth crosses the wire as float32; compare at that precision
    assert np.array_equal(image.grid(),
                          expected.grid().astype("<f4").astype(float))
    cloud = wire.decode_cloud(response["point_cloud"])
    assert len(cloud) == len(render_cloud(store.world, robot.embodiment))
    assert wire.decode_intrinsics(response["intrinsics"]) == ARM_A.camera
    assert wire.decode_pose(response["camera_pose"]) == ARM_A.camera_pose


def test_grasp_op_routes_outcomes_and_mutates_the_store(sim_bus):
    bus, store, _ = sim_bus
    cx, cy = placed_centroid(store.world.objects["box"])
    bad = bus.call("sim_robot", {
        "op": "grasp",
        "pose": [cx + 0.05, cy, 0.05, 0, 0, 0],
        "target": "box",
    })
    assert bad == {"success": False, "reason": "tolerance",
                   "outcome": "grasp_failed"}
    assert not store.world.objects["box"].held

    good = bus.call("sim_robot", {
        "op": "grasp",
        "pose": [cx, cy, 0.05, 0, 0, 0],
        "target": "box",
    })
    assert good == {"success": True, "reason": None, "outcome": "succeeded"}
    assert store.world.objects["box"].held


def test_reset_ops_restore_the_initial_signature(sim_bus):
    bus, store, _ = sim_bus
    nominal_signature = store.world.scene_signature()
    cx, cy = placed_centroid(store.world.objects["box"])
    bus.call("sim_robot", {"op": "grasp", "pose": [cx, cy, 0.05, 0, 0, 0],
                           "target": "box"})
    bus.call("sim_apparatus", {"op": "set_door", "angle": 0.8})
    bus.call("sim_apparatus", {"op": "set_drawer", "extension": 0.2})
    assert store.world.scene_signature() != nominal_signature

    bus.call("sim_apparatus", {"op": "reset_objects"})
    bus.call("sim_apparatus", {"op": "reset_apparatus"})
    assert store.world.scene_signature() == nominal_signature


def test_status_reports_articulation(sim_bus):
    bus, _, _ = sim_bus
    bus.call("sim_apparatus", {"op": "set_door", "angle": 0.4})
    status = bus.call("sim_apparatus", {"op": "status"})
    assert status["door_angle"] == pytest.approx(0.4)
    assert status["drawer_extension"] == 0.0


def test_out_of_range_set_door_is_a_service_failure(sim_bus):
    bus, store, _ = sim_bus
    with pytest.raises(ServiceFailure):
        bus.call("sim_apparatus", {"op": "set_door", "angle": 9.0})
    assert store.world.door_angle == 0.0


def test_trajectory_and_home_track_joint_state(sim_bus):
    bus, _, robot = sim_bus
    goal = {name: 0.5 for name in ARM_A.home}
    bus.call("sim_robot", {"op": "execute_trajectory",
                           "trajectory": [dict(ARM_A.home), goal]})
    assert robot.joints == goal
    response = bus.call("sim_robot", {"op": "home"})
    assert response["joint_state"] == {k: float(v)
                                       for k, v in ARM_A.home.items()}
    assert robot.joints == dict(ARM_A.home)


def test_register_sim_components_registers_both_interfaces(sim_bus):
    bus, _, _ = sim_bus
    assert bus.resolve("sim_robot").interface.name == "robot_driver"
    assert bus.resolve("sim_apparatus").interface.name == "apparatus"


def test_embodiment_lookup_rejects_unknown_names():
    with pytest.raises(ConfigError, match="arm_z"):
        get_embodiment("arm_z")
    assert get_embodiment("arm_b").reach == 0.90


def test_driver_accepts_params_or_preset_name():
    store = SimWorldStore(WorldState())
    from manipbench.sim import SimRobotDriver
    by_name = SimRobotDriver(store, "arm_b", component_id="r1")
    by_params = SimRobotDriver(store, ARM_B, component_id="r2")
    assert by_name.embodiment == by_params.embodiment
    with pytest.raises(TypeError):
        SimRobotDriver(store, 42, component_id="r3")
