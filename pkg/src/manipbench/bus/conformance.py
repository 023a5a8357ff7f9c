"""Conformance suite: the checks that license a component to be swapped in.

Every check runs even after earlier ones fail; failures are report rows,
never exceptions. Fixtures are tiny deterministic scenes built inline so
the suite needs no files and no live world.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import ManipBenchError, SchemaError
from ..geometry import INVALID_DEPTH, DepthImage, PointCloud
from . import wire
from .registry import SENSOR_FIELDS

DEFAULT_TIMEOUT = 30.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class ConformanceReport:
    component_id: str
    interface: str
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "component_id": self.component_id,
            "interface": self.interface,
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }

    def render_text(self) -> str:
        lines = [f"conformance: {self.component_id} ({self.interface})"]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            detail = f"  {c.detail}" if c.detail else ""
            lines.append(f"  [{mark}] {c.name}{detail}")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


# -- fixtures ------------------------------------------------------------------

def fixture_cloud() -> dict:
    """Table plane at z=0 plus a 16-point cluster 8 cm above it."""
    xs, ys = np.meshgrid(np.linspace(0.2, 0.4, 10), np.linspace(-0.1, 0.1, 10))
    plane = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(xs.size)])
    cx, cy = np.meshgrid(np.linspace(0.29, 0.32, 4), np.linspace(-0.015, 0.015, 4))
    cluster = np.column_stack([cx.ravel(), cy.ravel(), np.full(cx.size, 0.08)])
    points = np.vstack([plane, cluster])
    return wire.encode_cloud(PointCloud(points=points, frame="world"))


def fixture_depth() -> dict:
    """32x24 image: table at 0.5 m with a raised rectangular patch."""
    data = np.full((24, 32), 0.5)
    data[8:16, 10:22] = 0.4
    return wire.encode_depth_image(DepthImage(width=32, height=24, data=data))


def fixture_intrinsics() -> dict:
    return {"fx": 40.0, "fy": 40.0, "cx": 15.5, "cy": 11.5}


def fixture_object_model() -> dict:
    return {
        "name": "probe_box",
        "footprint": [[0.25, -0.05], [0.35, -0.05], [0.35, 0.05], [0.25, 0.05]],
        "height": 0.1,
    }


def _sensor_request(kind: str) -> dict:
    if kind == "point_cloud":
        return {"point_cloud": fixture_cloud()}
    if kind == "depth_image":
        return {"depth_image": fixture_depth(),
                "intrinsics": fixture_intrinsics()}
    return {"object_model": fixture_object_model()}


def _empty_sensor_request(kind: str):
    if kind == "point_cloud":
        return {"point_cloud": {"points": [], "frame": "world"}}
    if kind == "depth_image":
        image = DepthImage(width=8, height=6,
                           data=np.full((6, 8), INVALID_DEPTH))
        return {"depth_image": wire.encode_depth_image(image),
                "intrinsics": fixture_intrinsics()}
    return None  # an object model has no empty form


# -- the suite -----------------------------------------------------------------

def run_conformance(bus, component_id: str,
                    timeout: float = DEFAULT_TIMEOUT) -> ConformanceReport:
    descriptor = bus.resolve(component_id)
    interface = descriptor.interface.name
    checks = [_check_descriptor(descriptor)]
    if interface == "grasp_planner":
        checks += _grasp_planner_checks(bus, descriptor, timeout)
    elif interface == "motion_planner":
        checks += _motion_planner_checks(bus, descriptor, timeout)
    elif interface == "perception":
        checks += _perception_checks(bus, descriptor, timeout)
    elif interface == "robot_driver":
        checks += [_responds(bus, descriptor, "home", {}, timeout)]
    elif interface == "apparatus":
        checks += [_responds(bus, descriptor, "status", {}, timeout)]
    checks.append(_check_id_matching(bus, descriptor, timeout))
    checks.append(_check_latency(bus, descriptor, timeout))
    return ConformanceReport(component_id=component_id, interface=interface,
                             checks=tuple(checks))


def _check(name: str, fn) -> CheckResult:
    try:
        detail = fn()
    except ManipBenchError as exc:
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    except Exception as exc:  # noqa: BLE001 - report, never raise
        return CheckResult(name, False, f"unexpected {type(exc).__name__}: {exc}")
    return CheckResult(name, True, detail or "")


def _check_descriptor(descriptor) -> CheckResult:
    # construction enforces the invariants, so reaching here means they hold
    return CheckResult("descriptor-valid", True,
                       f"inputs={list(descriptor.accepted_inputs)} "
                       f"output={descriptor.output_kind}")


def _grasp_planner_checks(bus, descriptor, timeout) -> list:
    checks = []
    expected_key = ("rectangles" if descriptor.output_kind == "rectangle"
                    else "candidates")

    for kind in descriptor.accepted_inputs:
        def responds(kind=kind):
            request = dict(_sensor_request(kind), op="plan_grasp")
            response = bus.call_raw(descriptor.id, request, timeout=timeout)
            if expected_key not in response:
                raise SchemaError(
                    f"declared output_kind {descriptor.output_kind!r} but "
                    f"response carries {sorted(set(response) - {'outcome'})}")
            if descriptor.output_kind == "pose_with_quality":
                missing = [c for c in response["candidates"]
                           if "quality" not in c]
                if missing:
                    raise SchemaError(
                        f"{len(missing)} candidates lack the quality field "
                        f"promised by output_kind")
            return f"{len(response[expected_key])} {expected_key}"
        checks.append(_check(f"responds-{kind}", responds))

    def empty_input():
        for kind in descriptor.accepted_inputs:
            request = _empty_sensor_request(kind)
            if request is None:
                continue
            response = bus.call_raw(descriptor.id, dict(request, op="plan_grasp"),
                                    timeout=timeout)
            produced = response.get(expected_key, [])
            if produced:
                raise SchemaError(
                    f"{kind}: produced {len(produced)} {expected_key} "
                    f"from empty input")
            return f"empty {kind} -> empty {expected_key}"
        return "no input kind has an empty form"
    checks.append(_check("empty-input", empty_input))

    for kind in SENSOR_FIELDS:
        if kind in descriptor.accepted_inputs:
            continue

        def rejects(kind=kind):
            request = dict(_sensor_request(kind), op="plan_grasp")
            try:
                bus.call_raw(descriptor.id, request, timeout=timeout)
            except SchemaError:
                return "rejected with a schema error"
            raise SchemaError(
                f"component answered a {kind} request but does not "
                f"declare {kind} in accepted_inputs")
        checks.append(_check(f"rejects-undeclared-{kind}", rejects))

    def rejects_malformed():
        try:
            bus.call_raw(descriptor.id, {"op": "plan_grasp"}, timeout=timeout)
        except SchemaError:
            return "rejected with a schema error"
        raise SchemaError("accepted a request with no sensor input at all")
    checks.append(_check("rejects-malformed-request", rejects_malformed))
    return checks


def _motion_planner_checks(bus, descriptor, timeout) -> list:
    def responds():
        request = {"op": "plan_motion",
                   "start": {"j1": 0.0, "j2": 1.0},
                   "goal": {"j1": 1.0, "j2": 3.0},
                   "steps": 3}
        response = bus.call_raw(descriptor.id, request, timeout=timeout)
        trajectory = response["trajectory"]
        if len(trajectory) != 3:
            raise SchemaError(f"asked for 3 steps, got {len(trajectory)} waypoints")
        if trajectory[0] != request["start"] or trajectory[-1] != request["goal"]:
            raise SchemaError("trajectory endpoints do not match start/goal")
        return "3-step plan with exact endpoints"

    def rejects_malformed():
        try:
            bus.call_raw(descriptor.id,
                         {"op": "plan_motion", "start": {"j1": 0.0}},
                         timeout=timeout)
        except SchemaError:
            return "rejected with a schema error"
        raise SchemaError("accepted a request without a goal")

    return [_check("responds-plan", responds),
            _check("rejects-malformed-request", rejects_malformed)]


def _perception_checks(bus, descriptor, timeout) -> list:
    def responds():
        request = {"op": "filter_cloud", "point_cloud": fixture_cloud()}
        response = bus.call_raw(descriptor.id, request, timeout=timeout)
        points = response["point_cloud"]["points"]
        if len(points) % 3 != 0:
            raise SchemaError("filtered cloud is not a flat xyz array")
        return f"{len(points) // 3} points retained"

    def empty_input():
        request = {"op": "filter_cloud",
                   "point_cloud": {"points": [], "frame": "world"}}
        response = bus.call_raw(descriptor.id, request, timeout=timeout)
        if response["point_cloud"]["points"]:
            raise SchemaError("produced points from an empty cloud")
        return "empty in, empty out"

    return [_check("responds-cloud", responds),
            _check("empty-input", empty_input)]


def _responds(bus, descriptor, op, payload, timeout) -> CheckResult:
    def fn():
        bus.call_raw(descriptor.id, dict(payload, op=op), timeout=timeout)
        return "schema-valid response"
    return _check(f"responds-{op}", fn)


def _check_id_matching(bus, descriptor, timeout) -> CheckResult:
    def fn():
        for _ in range(3):
            bus.call_raw(descriptor.id, {"op": "ping"}, timeout=timeout)
        return "3 pings answered in order with matching ids"
    return _check("id-matching", fn)


def _check_latency(bus, descriptor, timeout) -> CheckResult:
    def fn():
        started = time.monotonic()
        bus.call_raw(descriptor.id, {"op": "ping"}, timeout=timeout)
        elapsed = time.monotonic() - started
        if elapsed >= timeout:
            raise SchemaError(f"ping took {elapsed:.3f}s with a {timeout}s budget")
        return f"ping in {elapsed * 1000:.1f} ms"
    return _check("latency-within-timeout", fn)
