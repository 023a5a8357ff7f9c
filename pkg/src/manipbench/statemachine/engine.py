"""Hierarchical state-machine executor.

One execution is single-threaded and owns its userdata; the preemption
signal is the only cross-thread channel in. Nested behaviors share the
step budget of the top-level execution and their states appear in the
trace with slash-joined paths ("outer_ref/inner_state").
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from ..errors import BehaviorValidationError, BindingError
from .defs import BehaviorDef, StateDef, Userdata, UserdataView, validate_behavior

DEFAULT_MAX_STEPS = 10000


class PreemptSignal:
    """Cooperative stop request; safe to trigger from any thread.

    The engine checks it at state boundaries only: the state in flight
    finishes (its service call is awaited) and its result is recorded,
    then execution stops with final outcome "preempted".
    """

    def __init__(self):
        self._event = threading.Event()

    def trigger(self) -> bool:
        """Request preemption. Idempotent; returns True as acknowledgement."""
        self._event.set()
        return True

    def is_set(self) -> bool:
        return self._event.is_set()


def preempt(signal: PreemptSignal) -> bool:
    """Acknowledge-and-stop entry point used by operators and tests."""
    return signal.trigger()


@dataclass
class TraceEntry:
    """One executed leaf state."""

    state: str
    path: str
    outcome: str
    started: float
    ended: float
    written: tuple

    def to_json(self, timestamps: bool = True) -> dict:
        doc = {
            "state": self.state,
            "path": self.path,
            "outcome": self.outcome,
            "written": list(self.written),
        }
        if timestamps:
            doc["started"] = self.started
            doc["ended"] = self.ended
        return doc


@dataclass
class ExecutionTrace:
    """Append-only record of an execution: leaf states in order plus outcome."""

    entries: list = field(default_factory=list)
    final_outcome: str = ""
    diagnostic: Optional[str] = None

    def state_sequence(self) -> list:
        return [e.state for e in self.entries]

    def path_sequence(self) -> list:
        return [e.path for e in self.entries]

    def outcome_sequence(self) -> list:
        return [(e.state, e.outcome) for e in self.entries]

    def to_json(self, timestamps: bool = True) -> dict:
        return {
            "entries": [e.to_json(timestamps) for e in self.entries],
            "final_outcome": self.final_outcome,
            "diagnostic": self.diagnostic,
        }


@dataclass
class ExecutionResult:
    final_outcome: str
    userdata: Userdata
    trace: ExecutionTrace


@dataclass
class ExecutionEnv:
    """Everything an execution resolves against.

    ``bindings`` maps behavior slot names to bus component ids;
    ``computes`` maps compute bindings to callables
    ``fn(userdata_view, params) -> outcome``. ``parameters`` are per-run
    overrides and take precedence over behavior defaults.
    """

    bus: Optional[object] = None
    bindings: Mapping = field(default_factory=dict)
    behaviors: Mapping = field(default_factory=dict)
    computes: Mapping = field(default_factory=dict)
    parameters: Mapping = field(default_factory=dict)
    max_steps: int = DEFAULT_MAX_STEPS
    call_timeout: float = 30.0
    clock: Callable[[], float] = time.time


class _Budget:
    """Step counter shared across nesting levels of one execution."""

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self) -> bool:
        self.used += 1
        return self.used <= self.limit


class _StateError(Exception):
    """Internal: wraps a state failure with its diagnostic."""


def execute(behavior: BehaviorDef, initial_userdata, env: ExecutionEnv,
            preempt_signal: Optional[PreemptSignal] = None) -> ExecutionResult:
    """Run a behavior to a terminal outcome.

    Raises :class:`BehaviorValidationError` up front if the behavior (or
    any behavior it references, transitively) fails validation; execution
    errors after that surface as the "aborted" outcome, never exceptions.
    """
    _validate_tree(behavior, env)
    userdata = initial_userdata if isinstance(initial_userdata, Userdata) \
        else Userdata(initial_userdata)
    trace = ExecutionTrace()
    budget = _Budget(env.max_steps)
    outcome = _run_machine(behavior, userdata, env, preempt_signal, trace, budget, path=())
    trace.final_outcome = outcome
    return ExecutionResult(outcome, userdata, trace)


def _validate_tree(behavior: BehaviorDef, env: ExecutionEnv, _seen=None) -> None:
    seen = _seen if _seen is not None else set()
    if behavior.name in seen:
        return
    seen.add(behavior.name)
    findings = validate_behavior(behavior, known_behaviors=env.behaviors.keys())
    if findings:
        raise BehaviorValidationError(findings)
    for s in behavior.states:
        if s.kind == "behavior_ref":
            _validate_tree(env.behaviors[s.binding], env, seen)


def _run_machine(behavior, userdata, env, preempt_signal, trace, budget, path):
    states = behavior.state_map()
    current = behavior.initial
    params = dict(behavior.parameters)
    params.update(env.parameters)
    if preempt_signal is not None and preempt_signal.is_set():
        return "preempted"
    while True:
        if not budget.spend():
            trace.diagnostic = (f"step budget of {budget.limit} exceeded "
                                f"at state {current!r}")
            return "aborted"
        state = states[current]

        if state.kind == "behavior_ref":
            outcome = _run_nested(state, behavior, userdata, env,
                                  preempt_signal, trace, budget, path)
            if outcome == "preempted":
                return "preempted"
        else:
            started = env.clock()
            try:
                outcome, written = _run_leaf(state, userdata, env, params)
            except Exception as exc:  # noqa: BLE001 - any state error aborts
                outcome, written = "aborted", ()
                if trace.diagnostic is None:
                    trace.diagnostic = f"state {state.name!r}: {exc}"
            trace.entries.append(TraceEntry(
                state=state.name,
                path="/".join(path + (state.name,)),
                outcome=outcome,
                started=started,
                ended=env.clock(),
                written=tuple(written),
            ))

        if preempt_signal is not None and preempt_signal.is_set():
            return "preempted"

        target = behavior.transitions.get((current, outcome))
        if target is None:
            if outcome == "aborted":
                return "aborted"  # undeclared failure, no explicit mapping
            if trace.diagnostic is None:
                trace.diagnostic = (f"state {current!r} returned undeclared "
                                    f"outcome {outcome!r}")
            return "aborted"
        if target in behavior.terminal_outcomes:
            return target
        current = target


def _run_nested(state, behavior, userdata, env, preempt_signal, trace, budget, path):
    inner = env.behaviors[state.binding]
    inner_ud = Userdata({k: userdata[k] for k in state.input_keys if k in userdata})
    outcome = _run_machine(inner, inner_ud, env, preempt_signal, trace, budget,
                           path + (state.name,))
    for key in state.output_keys:
        if key in inner_ud:
            userdata[key] = inner_ud[key]
    return outcome


def _run_leaf(state: StateDef, userdata, env: ExecutionEnv, behavior_params):
    if state.kind == "compute":
        fn = env.computes.get(state.binding)
        if fn is None:
            raise BindingError(f"no compute operation registered as {state.binding!r}")
        params = dict(behavior_params)
        params.update(state.config)  # per-state config is the most specific
        view = UserdataView(userdata, state.input_keys, state.output_keys,
                            state_name=state.name)
        outcome = fn(view, params)
        return (outcome if outcome is not None else "succeeded"), tuple(view.written)

    # service_call / action_call
    if env.bus is None:
        raise BindingError(f"state {state.name!r} needs a component bus")
    component_id = env.bindings.get(state.binding)
    if component_id is None:
        raise BindingError(f"slot {state.binding!r} is not bound to any component")
    # "timeout" is reserved for the call deadline, never sent on the wire
    request = {k: v for k, v in state.config.items() if k != "timeout"}
    for key in state.input_keys:
        if key in userdata:
            request[key] = userdata[key]
    timeout = state.config.get("timeout", env.call_timeout)
    response = env.bus.call(component_id, request, timeout=timeout)
    outcome = response.get("outcome", "succeeded")
    written = []
    for key in state.output_keys:
        if key in response:
            userdata[key] = response[key]
            written.append(key)
    return outcome, tuple(written)
