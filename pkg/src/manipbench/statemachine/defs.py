"""Declarative hierarchical state machine definitions.

A behavior is a reusable state machine: states return named outcomes,
transitions are keyed on (state, outcome), and a behavior can appear as
a single state inside another behavior. Structure is pure data so that
adding, removing, or reordering states is a data edit, not a code change.

Behavior documents are JSON with ``schema_version`` (currently 1); see
docs/behavior-format.md for the full schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from ..errors import KeyDisciplineError

BEHAVIOR_SCHEMA_VERSION = 1

STATE_KINDS = ("service_call", "action_call", "compute", "behavior_ref")

#: Outcome labels with engine-level meaning. States may declare and
#: behaviors may map them like any other label; everything else is opaque.
RESERVED_OUTCOMES = ("succeeded", "aborted", "preempted")


@dataclass(frozen=True)
class StateDef:
    """One state: what it calls, which userdata keys it touches, its outcomes.

    ``binding`` names a bus slot (service/action states), a registered
    compute operation, or a nested behavior. ``config`` carries static
    per-state settings merged into the request (service states) or the
    parameter map (compute states).
    """

    name: str
    kind: str
    binding: str
    input_keys: tuple = ()
    output_keys: tuple = ()
    outcomes: tuple = ("succeeded",)
    config: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise ValueError(f"state {self.name!r}: unknown kind {self.kind!r}")
        if not self.outcomes:
            raise ValueError(f"state {self.name!r}: declared outcomes must be non-empty")
        object.__setattr__(self, "input_keys", tuple(self.input_keys))
        object.__setattr__(self, "output_keys", tuple(self.output_keys))
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "config", dict(self.config))


@dataclass(frozen=True)
class BehaviorDef:
    """A named state machine with outcome-labeled transitions.

    ``transitions`` maps (state name, outcome) to either another state
    name or a terminal outcome. ``parameters`` are defaults; a run config
    may override them (per-run config wins).
    """

    name: str
    states: tuple
    initial: str
    transitions: Mapping
    terminal_outcomes: frozenset
    parameters: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", dict(self.transitions))
        object.__setattr__(self, "terminal_outcomes", frozenset(self.terminal_outcomes))
        object.__setattr__(self, "parameters", dict(self.parameters))

    def state_map(self) -> dict:
        return {s.name: s for s in self.states}


@dataclass(frozen=True)
class Finding:
    """One validation problem, located by state/outcome where applicable."""

    code: str
    message: str
    state: Optional[str] = None
    outcome: Optional[str] = None


def validate_behavior(behavior: BehaviorDef, known_behaviors=None) -> list:
    """Check every structural invariant; returns one finding per violation.

    ``known_behaviors`` is an optional collection of registered behavior
    names; when given, behavior_ref bindings are checked against it.
    """
    findings = []
    names = [s.name for s in behavior.states]
    by_name = {}
    for s in behavior.states:
        if s.name in by_name:
            findings.append(Finding("duplicate-state",
                                    f"duplicate state name {s.name!r}", state=s.name))
        by_name[s.name] = s

    if behavior.initial not in by_name:
        findings.append(Finding("missing-initial",
                                f"initial state {behavior.initial!r} does not exist"))

    if not behavior.terminal_outcomes:
        findings.append(Finding("no-terminals", "behavior declares no terminal outcomes"))

    overlap = behavior.terminal_outcomes & set(names)
    for label in sorted(overlap):
        findings.append(Finding("terminal-shadows-state",
                                f"terminal outcome {label!r} is also a state name",
                                state=label))

    # transition completeness and target validity
    for s in behavior.states:
        for outcome in s.outcomes:
            key = (s.name, outcome)
            if key not in behavior.transitions:
                findings.append(Finding("missing-transition",
                                        f"state {s.name!r} outcome {outcome!r} has no transition",
                                        state=s.name, outcome=outcome))
    for (state, outcome), target in behavior.transitions.items():
        src = by_name.get(state)
        if src is None:
            findings.append(Finding("unknown-source",
                                    f"transition from unknown state {state!r}",
                                    state=state, outcome=outcome))
            continue
        if outcome not in src.outcomes:
            findings.append(Finding("undeclared-outcome",
                                    f"transition on outcome {outcome!r} not declared by "
                                    f"state {state!r}", state=state, outcome=outcome))
        if target not in by_name and target not in behavior.terminal_outcomes:
            findings.append(Finding("unknown-target",
                                    f"transition ({state!r}, {outcome!r}) targets "
                                    f"{target!r}, which is neither a state nor terminal",
                                    state=state, outcome=outcome))

    # reachability from initial over declared transitions
    if behavior.initial in by_name:
        seen = {behavior.initial}
        frontier = [behavior.initial]
        while frontier:
            current = frontier.pop()
            for outcome in by_name[current].outcomes:
                target = behavior.transitions.get((current, outcome))
                if target in by_name and target not in seen:
                    seen.add(target)
                    frontier.append(target)
        for name in names:
            if name not in seen:
                findings.append(Finding("unreachable-state",
                                        f"state {name!r} is unreachable from "
                                        f"{behavior.initial!r}", state=name))

    if known_behaviors is not None:
        known = set(known_behaviors)
        for s in behavior.states:
            if s.kind == "behavior_ref" and s.binding not in known:
                findings.append(Finding("unknown-behavior",
                                        f"state {s.name!r} references unregistered "
                                        f"behavior {s.binding!r}", state=s.name))
    return findings


class Userdata:
    """The keyed blackboard through which states pass data."""

    def __init__(self, initial: Optional[Mapping] = None):
        self._data = dict(initial or {})

    def __contains__(self, key):
        return key in self._data

    def __getitem__(self, key):
        return self._data[key]

    def __setitem__(self, key, value):
        self._data[key] = value

    def get(self, key, default=None):
        return self._data.get(key, default)

    def keys(self):
        return self._data.keys()

    def as_dict(self) -> dict:
        return dict(self._data)

    def __repr__(self):
        return f"Userdata({self._data!r})"


class UserdataView:
    """Restricted window onto a Userdata enforcing a state's key discipline.

    Reads outside ``input_keys`` and writes outside ``output_keys`` raise
    :class:`KeyDisciplineError`; the engine hands every compute state one
    of these instead of the raw blackboard.
    """

    def __init__(self, userdata: Userdata, input_keys, output_keys, state_name=""):
        self._ud = userdata
        self._readable = frozenset(input_keys)
        self._writable = frozenset(output_keys)
        self._state = state_name
        self.written = []

    def __contains__(self, key):
        return key in self._readable and key in self._ud

    def __getitem__(self, key):
        if key not in self._readable:
            raise KeyDisciplineError(
                f"state {self._state!r} read key {key!r} outside its input_keys")
        return self._ud[key]

    def get(self, key, default=None):
        if key not in self._readable:
            raise KeyDisciplineError(
                f"state {self._state!r} read key {key!r} outside its input_keys")
        return self._ud.get(key, default)

    def __setitem__(self, key, value):
        if key not in self._writable:
            raise KeyDisciplineError(
                f"state {self._state!r} wrote key {key!r} outside its output_keys")
        self._ud[key] = value
        self.written.append(key)


# --- JSON form ---------------------------------------------------------------

def behavior_to_json(behavior: BehaviorDef) -> dict:
    return {
        "schema_version": BEHAVIOR_SCHEMA_VERSION,
        "name": behavior.name,
        "initial": behavior.initial,
        "terminal_outcomes": sorted(behavior.terminal_outcomes),
        "parameters": dict(behavior.parameters),
        "states": [
            {
                "name": s.name,
                "kind": s.kind,
                "binding": s.binding,
                "input_keys": list(s.input_keys),
                "output_keys": list(s.output_keys),
                "outcomes": list(s.outcomes),
                "config": dict(s.config),
            }
            for s in behavior.states
        ],
        "transitions": _transitions_to_json(behavior.transitions),
    }


def behavior_from_json(doc: Mapping) -> BehaviorDef:
    version = doc.get("schema_version")
    if version != BEHAVIOR_SCHEMA_VERSION:
        raise ValueError(f"unsupported behavior schema_version: {version!r}")
    states = tuple(
        StateDef(
            name=s["name"],
            kind=s["kind"],
            binding=s["binding"],
            input_keys=tuple(s.get("input_keys", ())),
            output_keys=tuple(s.get("output_keys", ())),
            outcomes=tuple(s.get("outcomes", ("succeeded",))),
            config=s.get("config", {}),
        )
        for s in doc["states"]
    )
    transitions = {}
    for state, mapping in doc["transitions"].items():
        for outcome, target in mapping.items():
            transitions[(state, outcome)] = target
    return BehaviorDef(
        name=doc["name"],
        states=states,
        initial=doc["initial"],
        transitions=transitions,
        terminal_outcomes=frozenset(doc["terminal_outcomes"]),
        parameters=doc.get("parameters", {}),
    )


def load_behavior_file(path) -> dict:
    """Load one or more behaviors from a JSON file.

    The file holds either a single behavior document or
    ``{"schema_version": 1, "behaviors": [...]}``. Returns name -> BehaviorDef.
    """
    doc = json.loads(Path(path).read_text())
    if "behaviors" in doc:
        defs = [behavior_from_json(dict(b, schema_version=doc.get("schema_version", 1)))
                if "schema_version" not in b else behavior_from_json(b)
                for b in doc["behaviors"]]
    else:
        defs = [behavior_from_json(doc)]
    return {b.name: b for b in defs}


def _transitions_to_json(transitions: Mapping) -> dict:
    out = {}
    for (state, outcome), target in transitions.items():
        out.setdefault(state, {})[outcome] = target
    return out
