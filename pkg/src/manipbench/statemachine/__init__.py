"""Composable state machines: declarative definitions plus the executor."""

from .defs import (
    BEHAVIOR_SCHEMA_VERSION,
    RESERVED_OUTCOMES,
    STATE_KINDS,
    BehaviorDef,
    Finding,
    StateDef,
    Userdata,
    UserdataView,
    behavior_from_json,
    behavior_to_json,
    load_behavior_file,
    validate_behavior,
)
from .engine import (
    DEFAULT_MAX_STEPS,
    ExecutionEnv,
    ExecutionResult,
    ExecutionTrace,
    PreemptSignal,
    TraceEntry,
    execute,
    preempt,
)

__all__ = [
    "BEHAVIOR_SCHEMA_VERSION",
    "RESERVED_OUTCOMES",
    "STATE_KINDS",
    "BehaviorDef",
    "Finding",
    "StateDef",
    "Userdata",
    "UserdataView",
    "behavior_from_json",
    "behavior_to_json",
    "load_behavior_file",
    "validate_behavior",
    "DEFAULT_MAX_STEPS",
    "ExecutionEnv",
    "ExecutionResult",
    "ExecutionTrace",
    "PreemptSignal",
    "TraceEntry",
    "execute",
    "preempt",
]
