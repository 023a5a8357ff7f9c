"""Factorial benchmarking harness: plan, run, log, compare."""

from .protocol import (
    PROTOCOL_SCHEMA_VERSION,
    TARGET_KINDS,
    WORLD_FACTOR_FIELDS,
    FactorTarget,
    PlannedTrial,
    ProtocolDef,
    build_protocol,
    load_protocol,
    plan_trials,
    trial_seed,
)
from .runner import (
    OUTCOME_ABORTED,
    OUTCOME_FAILURE,
    OUTCOME_LABELS,
    OUTCOME_PREEMPTED,
    OUTCOME_SUCCESS,
    RECORD_SCHEMA_VERSION,
    RESET_FAILURE_REASON,
    TrialRecord,
    run_protocol,
)
from .report import (
    ComparisonReport,
    GroupStats,
    compare,
    read_records,
)

__all__ = [
    "PROTOCOL_SCHEMA_VERSION",
    "RECORD_SCHEMA_VERSION",
    "TARGET_KINDS",
    "WORLD_FACTOR_FIELDS",
    "OUTCOME_ABORTED",
    "OUTCOME_FAILURE",
    "OUTCOME_LABELS",
    "OUTCOME_PREEMPTED",
    "OUTCOME_SUCCESS",
    "RESET_FAILURE_REASON",
    "ComparisonReport",
    "FactorTarget",
    "GroupStats",
    "PlannedTrial",
    "ProtocolDef",
    "TrialRecord",
    "build_protocol",
    "compare",
    "load_protocol",
    "plan_trials",
    "read_records",
    "run_protocol",
    "trial_seed",
]
