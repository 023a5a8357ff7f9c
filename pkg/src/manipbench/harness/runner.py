"""Trial execution: configure, reset, run, record.

One protocol run drives one simulated world through the planned trial
list strictly in order. Damage from a trial (a displaced or held
object, an open door) persists into the next trial, so the reset phase
and its verification do real work rather than rubber-stamping.

Per trial the runner

  1. configures the condition: embodiment driver, staged objects,
     scalar world fields, per-trial seed, bindings, parameters,
     userdata;
  2. restores the world, either by running the protocol's reset
     behavior or directly when none is named, then verifies the scene
     signature against nominal (every staged object at its scenario
     pose, nothing held, door closed, drawer shut). A failed reset is
     recorded as outcome "failure" with reason "reset-failure" and the
     manipulation is skipped;
  3. executes the manipulation behavior and maps its terminal outcome;
  4. appends the record, streaming it to the JSON Lines log when one
     is open.

Trial records always enter the returned list, aborts included, so the
output length equals the plan length unless fail_fast cuts the run.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Optional

from ..behaviors import BUILTIN_COMPUTES
from ..bus.registry import ComponentBus
from ..components import register_reference_components
from ..errors import ConfigError
from ..sim import (
    DEFAULT_GRASP_TOLERANCE,
    SimApparatusDriver,
    SimRobotDriver,
    SimWorldStore,
    reset_apparatus,
    reset_objects,
)
from ..statemachine.engine import ExecutionEnv, execute
from .protocol import ProtocolDef, plan_trials

RECORD_SCHEMA_VERSION = 1

OUTCOME_SUCCESS = "success"
OUTCOME_FAILURE = "failure"
OUTCOME_ABORTED = "aborted"
OUTCOME_PREEMPTED = "preempted"
OUTCOME_LABELS = (OUTCOME_SUCCESS, OUTCOME_FAILURE, OUTCOME_ABORTED,
                  OUTCOME_PREEMPTED)

RESET_FAILURE_REASON = "reset-failure"


@dataclass(frozen=True)
class TrialRecord:
    """One executed trial.

    ``components`` is the slot-to-component-id map the trial ran with.
    ``trace`` is the manipulation trace, except for reset failures,
    where it is the failed reset behavior's trace (when one ran).
    """

    index: int
    condition: Mapping
    outcome: str
    seed: int
    behavior: str
    components: Mapping = field(default_factory=dict)
    reason: Optional[str] = None
    reset_ok: bool = True
    trace: Optional[dict] = None
    started: float = 0.0
    ended: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "condition",
                           MappingProxyType(dict(self.condition)))
        object.__setattr__(self, "components",
                           MappingProxyType(dict(self.components)))

    @property
    def duration(self) -> float:
        return self.ended - self.started

    def to_json(self, timestamps: bool = True) -> dict:
        doc = {
            "schema_version": RECORD_SCHEMA_VERSION,
            "index": self.index,
            "condition": dict(self.condition),
            "outcome": self.outcome,
            "reason": self.reason,
            "seed": self.seed,
            "behavior": self.behavior,
            "components": dict(self.components),
            "reset_ok": self.reset_ok,
            "trace": self.trace,
        }
        if timestamps:
            doc["started"] = self.started
            doc["ended"] = self.ended
            doc["duration"] = self.duration
        return doc


def _split_condition(protocol: ProtocolDef, condition: Mapping):
    """Sort a condition's factor levels into their application buckets."""
    buckets = {
        "embodiment": None,
        "object": None,
        "world": {},
        "binding": {},
        "parameter": {},
        "userdata": {},
    }
    for factor, level in condition.items():
        target = protocol.target_for(factor)
        if target.kind == "embodiment":
            buckets["embodiment"] = level
        elif target.kind == "object":
            buckets["object"] = level
        elif target.kind == "world":
            buckets["world"][target.field] = level
        else:
            buckets[target.kind][target.field or factor] = level
    return buckets


def _expected_signature(staged, nominal) -> dict:
    return {
        "objects": {
            name: (pose.x, pose.y, pose.z, pose.roll, pose.pitch, pose.yaw,
                   False)
            for name, pose in sorted((n, nominal[n]) for n in staged)
        },
        "door_angle": 0.0,
        "drawer_extension": 0.0,
    }


def _map_outcome(result):
    if result.final_outcome == "succeeded":
        return OUTCOME_SUCCESS, None
    if result.final_outcome == "aborted":
        return OUTCOME_ABORTED, result.trace.diagnostic
    if result.final_outcome == "preempted":
        return OUTCOME_PREEMPTED, None
    return OUTCOME_FAILURE, result.final_outcome


def run_protocol(protocol: ProtocolDef, bindings: Mapping, world, *,
                 behaviors: Mapping,
                 nominal_poses: Optional[Mapping] = None,
                 computes: Optional[Mapping] = None,
                 parameters: Optional[Mapping] = None,
                 initial_userdata: Optional[Mapping] = None,
                 bus: Optional[ComponentBus] = None,
                 log_path=None,
                 fail_fast: bool = False,
                 record_timestamps: bool = True,
                 default_embodiment: str = "arm_a",
                 robot_id: str = "sim_robot",
                 apparatus_id: str = "sim_apparatus",
                 grasp_tolerance: float = DEFAULT_GRASP_TOLERANCE,
                 max_steps: int = 10000,
                 call_timeout: float = 30.0,
                 clock=time.time) -> list:
    """Execute every planned trial of ``protocol`` against ``world``.

    ``bindings`` maps the behavior's slot names to bus component ids and
    doubles as each record's components map. When ``bus`` is None a
    private bus is built with the reference components registered; the
    simulated robot and apparatus drivers are registered either way and
    removed again on exit. ``log_path``, when given, receives one JSON
    line per record as it is produced, flushed immediately.

    With ``fail_fast`` the run stops after the first record whose
    outcome is not success; otherwise reset failures and aborts are
    recorded and the run continues.
    """
    plan = plan_trials(protocol)
    if protocol.behavior not in behaviors:
        raise ConfigError(f"protocol behavior {protocol.behavior!r} is not "
                          f"among the loaded behaviors")
    if protocol.reset_behavior is not None \
            and protocol.reset_behavior not in behaviors:
        raise ConfigError(f"reset behavior {protocol.reset_behavior!r} is "
                          f"not among the loaded behaviors")

    if bus is None:
        bus = ComponentBus()
        register_reference_components(bus)

    store = SimWorldStore(world, nominal_poses)
    nominal = store.nominal_poses
    catalog = dict(world.objects)
    base = world

    all_computes = dict(BUILTIN_COMPUTES)
    all_computes.update(computes or {})

    apparatus = SimApparatusDriver(store, component_id=apparatus_id)
    bus.register(apparatus.descriptor, apparatus, reentrant=False)
    robot = None
    current_embodiment = None

    records = []
    log = open(log_path, "w") if log_path is not None else None
    try:
        for trial in plan:
            started = clock()
            buckets = _split_condition(protocol, trial.condition)

            emb_name = buckets["embodiment"] or default_embodiment
            if emb_name != current_embodiment:
                if robot is not None:
                    bus.unregister(robot_id)
                robot = SimRobotDriver(store, emb_name, component_id=robot_id,
                                       grasp_tolerance=grasp_tolerance)
                bus.register(robot.descriptor, robot, reentrant=False)
                current_embodiment = emb_name

            if buckets["object"] is not None:
                if buckets["object"] not in catalog:
                    raise ConfigError(
                        f"object factor level {buckets['object']!r} names no "
                        f"scenario object")
                staged = (buckets["object"],)
            else:
                staged = tuple(catalog)
            overrides = buckets["world"]

            def _configure(current, staged=staged, overrides=overrides,
                           seed=trial.seed):
                if set(current.objects) != set(staged):
                    objects = {
                        name: replace(catalog[name], pose=nominal[name],
                                      held=False)
                        for name in staged
                    }
                else:
                    objects = current.objects
                # Unset condition fields revert to the scenario's values;
                # door and drawer are resettable state, left to the reset
                # phase and to the behaviors themselves.
                return replace(
                    current, objects=objects,
                    workspace_elevation=overrides.get(
                        "workspace_elevation", base.workspace_elevation),
                    lighting_noise_scale=overrides.get(
                        "lighting_noise_scale", base.lighting_noise_scale),
                    table_noise_scale=overrides.get(
                        "table_noise_scale", base.table_noise_scale),
                    rng_seed=seed)

            store.update(_configure)

            trial_bindings = dict(bindings)
            trial_bindings.update(buckets["binding"])
            params = dict(parameters or {})
            params.update(buckets["parameter"])
            params["embodiment"] = emb_name
            params["home_joints"] = dict(robot.embodiment.home)

            reset_ok = True
            reset_trace = None
            if protocol.reset_behavior is not None:
                env = ExecutionEnv(bus=bus, bindings=trial_bindings,
                                   behaviors=behaviors, computes=all_computes,
                                   parameters=params, max_steps=max_steps,
                                   call_timeout=call_timeout, clock=clock)
                reset = execute(behaviors[protocol.reset_behavior], {}, env)
                reset_trace = reset.trace.to_json(record_timestamps)
                if reset.final_outcome != "succeeded":
                    reset_ok = False
            else:
                store.update(
                    lambda w: reset_apparatus(reset_objects(w, nominal)))
            if reset_ok and store.world.scene_signature() \
                    != _expected_signature(staged, nominal):
                reset_ok = False
            trace_doc = None if reset_ok else reset_trace

            if reset_ok:
                userdata = dict(initial_userdata or {})
                userdata.update(buckets["userdata"])
                if buckets["object"] is not None:
                    userdata["target"] = buckets["object"]
                env = ExecutionEnv(bus=bus, bindings=trial_bindings,
                                   behaviors=behaviors, computes=all_computes,
                                   parameters=params, max_steps=max_steps,
                                   call_timeout=call_timeout, clock=clock)
                result = execute(behaviors[protocol.behavior], userdata, env)
                outcome, reason = _map_outcome(result)
                trace_doc = result.trace.to_json(record_timestamps)
            else:
                outcome, reason = OUTCOME_FAILURE, RESET_FAILURE_REASON

            record = TrialRecord(
                index=trial.index,
                condition=trial.condition,
                outcome=outcome,
                seed=trial.seed,
                behavior=protocol.behavior,
                components=trial_bindings,
                reason=reason,
                reset_ok=reset_ok,
                trace=trace_doc,
                started=started,
                ended=clock(),
            )
            records.append(record)
            if log is not None:
                log.write(json.dumps(record.to_json(record_timestamps),
                                     sort_keys=True) + "\n")
                log.flush()
            if fail_fast and record.outcome != OUTCOME_SUCCESS:
                break
    finally:
        if log is not None:
            log.close()
        if robot is not None:
            bus.unregister(robot_id)
        bus.unregister(apparatus_id)
    return records
