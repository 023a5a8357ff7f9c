"""Outcome aggregation: exact counts over trial records, grouped.

Groups are keyed by condition factors; a grouping name that is not a
condition factor falls back to the record's components map, so runs
that differ by a component binding (say, two planners behind the same
slot) can be compared without recoding their conditions. Counts are
exact integers; a rate is the plain quotient of two of them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from ..errors import ConfigError, EmptyRecordsError
from .runner import OUTCOME_LABELS, RECORD_SCHEMA_VERSION


@dataclass(frozen=True)
class GroupStats:
    trials: int
    success: int
    failure: int
    aborted: int
    preempted: int

    @property
    def rate(self) -> float:
        return self.success / self.trials

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "success": self.success,
            "failure": self.failure,
            "aborted": self.aborted,
            "preempted": self.preempted,
            "rate": self.rate,
        }


@dataclass(frozen=True)
class ComparisonReport:
    """Per-group outcome counts plus grand totals.

    ``groups`` pairs each key tuple (values aligned with ``by``) with
    its stats, in first-appearance order, which for records straight
    from a run is plan order.
    """

    by: tuple
    groups: tuple
    totals: GroupStats

    def rates(self) -> dict:
        return {key: stats.rate for key, stats in self.groups}

    def group(self, key) -> GroupStats:
        key = tuple(key)
        for candidate, stats in self.groups:
            if candidate == key:
                return stats
        raise KeyError(f"no group {key!r} in this report")

    def to_json(self) -> dict:
        return {
            "by": list(self.by),
            "groups": [
                dict(stats.to_json(),
                     key={name: value
                          for name, value in zip(self.by, key)})
                for key, stats in self.groups
            ],
            "totals": self.totals.to_json(),
        }

    def render_text(self) -> str:
        header = list(self.by) if self.by else ["group"]
        rows = []
        for key, stats in self.groups:
            label = [str(v) for v in key] if self.by else ["all"]
            rows.append(label + _stat_cells(stats))
        rows.append(["total"] + [""] * (len(header) - 1)
                    + _stat_cells(self.totals))
        header = header + ["trials", "success", "failure", "aborted",
                           "preempted", "rate"]
        widths = [max(len(header[i]), *(len(r[i]) for r in rows))
                  for i in range(len(header))]
        keys = len(self.by) if self.by else 1
        lines = [_render_row(header, widths, keys)]
        for row in rows:
            lines.append(_render_row(row, widths, keys))
        return "\n".join(lines) + "\n"


def _stat_cells(stats: GroupStats) -> list:
    return [str(stats.trials), str(stats.success), str(stats.failure),
            str(stats.aborted), str(stats.preempted), f"{stats.rate:.4f}"]


def _render_row(cells, widths, key_columns) -> str:
    parts = []
    for i, cell in enumerate(cells):
        if i < key_columns:
            parts.append(cell.ljust(widths[i]))
        else:
            parts.append(cell.rjust(widths[i]))
    return "  ".join(parts).rstrip()


def _field(record, name):
    if isinstance(record, Mapping):
        return record.get(name)
    return getattr(record, name)


def _group_key(record, by) -> tuple:
    condition = _field(record, "condition") or {}
    components = _field(record, "components") or {}
    key = []
    for name in by:
        if name in condition:
            key.append(condition[name])
        elif name in components:
            key.append(components[name])
        else:
            raise ConfigError(
                f"record {_field(record, 'index')!r} has no condition "
                f"factor or component slot named {name!r}")
    return tuple(key)


def compare(records: Sequence, by: Optional[Sequence] = None) \
        -> ComparisonReport:
    """Aggregate outcome counts per group of ``by`` values.

    ``records`` may be TrialRecord objects or their JSON documents.
    ``by`` defaults to every condition factor of the first record, in
    its declaration order, giving one row per condition.
    """
    records = list(records)
    if not records:
        raise EmptyRecordsError("no records to compare")
    if by is None:
        by = tuple(_field(records[0], "condition") or {})
    else:
        by = tuple(by)

    counts = {}
    order = []
    totals = dict.fromkeys(OUTCOME_LABELS, 0)
    for record in records:
        outcome = _field(record, "outcome")
        if outcome not in OUTCOME_LABELS:
            raise ConfigError(
                f"record {_field(record, 'index')!r} carries unknown "
                f"outcome {outcome!r}")
        key = _group_key(record, by)
        if key not in counts:
            counts[key] = dict.fromkeys(OUTCOME_LABELS, 0)
            order.append(key)
        counts[key][outcome] += 1
        totals[outcome] += 1

    def _stats(tally) -> GroupStats:
        return GroupStats(trials=sum(tally.values()), **tally)

    groups = tuple((key, _stats(counts[key])) for key in order)
    return ComparisonReport(by=by, groups=groups, totals=_stats(totals))


def read_records(path) -> list:
    """Load a JSON Lines trial log back into record documents."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read trial log {path}: {exc}") from exc
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}:{lineno}: not valid JSON: {exc}") from exc
        version = doc.get("schema_version")
        if version != RECORD_SCHEMA_VERSION:
            raise ConfigError(
                f"{path}:{lineno}: unsupported record schema_version "
                f"{version!r}")
        records.append(doc)
    return records
