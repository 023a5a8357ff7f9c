"""Factorial protocols: factor grids expanded into seeded trial plans.

A protocol names a behavior and a grid of factors. Expansion walks the
Cartesian product of factor levels in declaration order (lexicographic,
repetitions innermost) and stamps each trial with a seed drawn from the
SplitMix64 stream of the master seed, so trial i always gets the same
seed regardless of which subset of the plan is re-run.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional

from ..errors import ConfigError, ProtocolDefError

PROTOCOL_SCHEMA_VERSION = 1

TARGET_KINDS = ("embodiment", "object", "world", "binding", "parameter",
                "userdata")
# Door and drawer are deliberately absent: the reset phase drives them
# to their closed nominal before every trial, so a factor setting them
# here could never survive to the manipulation. Behaviors operate them.
WORLD_FACTOR_FIELDS = ("workspace_elevation", "lighting_noise_scale",
                       "table_noise_scale")

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def trial_seed(master_seed: int, index: int) -> int:
    """The index-th output of the SplitMix64 stream seeded by master_seed."""
    z = (master_seed + (index + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class FactorTarget:
    """Where a factor level lands when a trial is configured.

    kind:
      embodiment - level names the robot preset for the trial
      object     - level names the one scenario object staged and grasped
      world      - level sets the world field named by ``field``
      binding    - level is the component id bound to slot ``field``
      parameter  - level becomes the run parameter named by ``field``
      userdata   - level seeds initial userdata under key ``field``
    """

    kind: str = "parameter"
    field: str = ""

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise ProtocolDefError(f"unknown factor target kind {self.kind!r}; "
                                   f"expected one of {TARGET_KINDS}")
        if self.kind == "world" and self.field not in WORLD_FACTOR_FIELDS:
            raise ProtocolDefError(
                f"world factors may set one of {WORLD_FACTOR_FIELDS}, "
                f"not {self.field!r}")
        if self.kind in ("binding", "parameter", "userdata") and not self.field:
            raise ProtocolDefError(f"{self.kind} target needs a field name")


@dataclass(frozen=True)
class ProtocolDef:
    """A factor grid over one behavior, plus how each factor applies."""

    behavior: str
    factors: Mapping = field(default_factory=dict)
    targets: Mapping = field(default_factory=dict)
    reps: int = 1
    counts: Optional[tuple] = None
    reset_behavior: Optional[str] = None
    scenario: Optional[str] = None
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if not self.behavior or not isinstance(self.behavior, str):
            raise ProtocolDefError("protocol needs a behavior name")
        factors = {}
        for fname, levels in dict(self.factors).items():
            if not fname or not isinstance(fname, str):
                raise ProtocolDefError(f"factor name {fname!r} is not a string")
            levels = tuple(levels)
            if not levels:
                raise ProtocolDefError(f"factor {fname!r} has no levels")
            factors[fname] = levels
        object.__setattr__(self, "factors", MappingProxyType(factors))

        targets = {}
        for fname, target in dict(self.targets).items():
            if fname not in factors:
                raise ProtocolDefError(
                    f"target for unknown factor {fname!r}")
            if not isinstance(target, FactorTarget):
                target = FactorTarget(**target)
            targets[fname] = target
        object.__setattr__(self, "targets", MappingProxyType(targets))

        if not isinstance(self.reps, int) or isinstance(self.reps, bool) \
                or self.reps < 1:
            raise ProtocolDefError(f"reps must be a positive integer, "
                                   f"got {self.reps!r}")
        if self.counts is not None:
            counts = tuple(self.counts)
            expected = self.combination_count()
            if len(counts) != expected:
                raise ProtocolDefError(
                    f"counts lists {len(counts)} combinations, the factor "
                    f"grid has {expected}")
            for c in counts:
                if not isinstance(c, int) or isinstance(c, bool) or c < 1:
                    raise ProtocolDefError(
                        f"per-combination counts must be positive integers, "
                        f"got {c!r}")
            object.__setattr__(self, "counts", counts)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ProtocolDefError(f"seed must be an integer, got {self.seed!r}")

    def combination_count(self) -> int:
        return math.prod(len(levels) for levels in self.factors.values())

    def total_trials(self) -> int:
        if self.counts is not None:
            return sum(self.counts)
        return self.reps * self.combination_count()

    def target_for(self, factor: str) -> FactorTarget:
        """The factor's declared target; defaults to a same-named parameter."""
        target = self.targets.get(factor)
        if target is None:
            target = FactorTarget(kind="parameter", field=factor)
        return target


@dataclass(frozen=True)
class PlannedTrial:
    index: int
    condition: Mapping
    rep: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "condition",
                           MappingProxyType(dict(self.condition)))


def plan_trials(protocol: ProtocolDef) -> list:
    """Expand the factor grid; see the module docstring for ordering."""
    names = list(protocol.factors)
    level_lists = [protocol.factors[n] for n in names]
    plan = []
    for combo_index, combo in enumerate(itertools.product(*level_lists)):
        repetitions = (protocol.counts[combo_index]
                       if protocol.counts is not None else protocol.reps)
        condition = dict(zip(names, combo))
        for rep in range(repetitions):
            index = len(plan)
            plan.append(PlannedTrial(index=index, condition=condition,
                                     rep=rep,
                                     seed=trial_seed(protocol.seed, index)))
    return plan


def build_protocol(doc: dict) -> ProtocolDef:
    version = doc.get("schema_version", PROTOCOL_SCHEMA_VERSION)
    if version != PROTOCOL_SCHEMA_VERSION:
        raise ProtocolDefError(
            f"unsupported protocol schema_version {version!r}")
    # "notes" is free text for humans: provenance caveats, scaling
    # remarks. Parsed and dropped.
    known = {"schema_version", "behavior", "factors", "targets", "reps",
             "counts", "reset_behavior", "scenario", "seed", "name", "notes"}
    unknown = set(doc) - known
    if unknown:
        raise ProtocolDefError(f"unknown protocol fields {sorted(unknown)}")
    kwargs = {k: v for k, v in doc.items()
              if k in known - {"schema_version", "notes"}}
    if "counts" in kwargs and kwargs["counts"] is not None:
        kwargs["counts"] = tuple(kwargs["counts"])
    return ProtocolDef(**kwargs)


def load_protocol(path) -> ProtocolDef:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read protocol {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"protocol {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"protocol {path} must be a JSON object")
    return build_protocol(doc)
