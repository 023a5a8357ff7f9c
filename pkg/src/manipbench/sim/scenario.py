"""World scenario files: JSON in, WorldState plus nominal poses out."""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import ConfigError
from ..geometry import ObjectModel, Pose6DoF
from .world import ObjectInstance, WorldState

SCENARIO_SCHEMA_VERSION = 1


def build_world(doc: dict):
    """Returns (WorldState, nominal poses by object name)."""
    version = doc.get("schema_version", SCENARIO_SCHEMA_VERSION)
    if version != SCENARIO_SCHEMA_VERSION:
        raise ConfigError(f"unsupported scenario schema_version {version!r}")
    objects = {}
    nominal = {}
    for entry in doc.get("objects", []):
        try:
            model = ObjectModel(
                name=entry["name"],
                footprint=tuple((float(x), float(y))
                                for x, y in entry["footprint"]),
                height=float(entry["height"]),
            )
            values = [float(v) for v in entry["pose"]]
            if len(values) != 6:
                raise ValueError(f"pose needs 6 numbers, got {len(values)}")
            pose = Pose6DoF(*values)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(
                f"bad object entry {entry.get('name', '?')!r}: {exc}") from exc
        if model.name in objects:
            raise ConfigError(f"duplicate object name {model.name!r}")
        objects[model.name] = ObjectInstance(model=model, pose=pose)
        nominal[model.name] = pose
    try:
        world = WorldState(
            objects=objects,
            door_angle=float(doc.get("door_angle", 0.0)),
            drawer_extension=float(doc.get("drawer_extension", 0.0)),
            workspace_elevation=float(doc.get("workspace_elevation", 0.0)),
            lighting_noise_scale=float(doc.get("lighting_noise_scale", 1.0)),
            table_noise_scale=float(doc.get("table_noise_scale", 1.0)),
            rng_seed=int(doc.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario fields: {exc}") from exc
    return world, nominal


def load_scenario(path):
    """Parse a scenario file; file problems surface as ConfigError."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"scenario {path} must be a JSON object")
    return build_world(doc)
