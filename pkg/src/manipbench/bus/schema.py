"""Wire schema documents and the validator that enforces them.

The shipped schema file (schemas/wire-v1.json) is the authority on what
may cross the bus; this module loads it and checks documents against it.
The dialect is a small JSON-Schema-like subset, documented in the schema
file itself.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from ..errors import ProtocolDefError, SchemaError

WIRE_SCHEMA_VERSION = 1


@lru_cache(maxsize=None)
def wire_schema() -> dict:
    """The parsed schema document shipped with the package."""
    text = resources.files("manipbench.schemas").joinpath("wire-v1.json").read_text()
    doc = json.loads(text)
    if doc.get("schema_version") != WIRE_SCHEMA_VERSION:
        raise ProtocolDefError(
            f"wire schema document has version {doc.get('schema_version')!r}, "
            f"expected {WIRE_SCHEMA_VERSION}")
    return doc


def interface_names() -> tuple:
    return tuple(wire_schema()["interfaces"].keys())


def ops_for(interface: str) -> tuple:
    meta = wire_schema()["interfaces"].get(interface)
    if meta is None:
        raise ProtocolDefError(f"unknown interface class {interface!r}")
    return tuple(meta["ops"].keys()) + tuple(wire_schema()["common_ops"].keys())


def op_schema(interface: str, op: str, direction: str) -> dict:
    """Schema object for one operation's request or response."""
    doc = wire_schema()
    if op in doc["common_ops"]:
        return doc["common_ops"][op][direction]
    meta = doc["interfaces"].get(interface)
    if meta is None:
        raise ProtocolDefError(f"unknown interface class {interface!r}")
    entry = meta["ops"].get(op)
    if entry is None:
        raise SchemaError(f"interface {interface!r} has no operation {op!r}",
                          field="op")
    return entry[direction]


def validate(value, schema: dict, field: str = "") -> None:
    """Raise SchemaError naming the offending field on the first violation."""
    _check(value, schema, field or "$", wire_schema())


def validate_op(interface: str, op: str, direction: str, payload) -> None:
    validate(payload, op_schema(interface, op, direction))


_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "number": (int, float),
    "integer": int,
    "boolean": bool,
    "null": type(None),
}


def _type_ok(value, name: str) -> bool:
    expected = _TYPES[name]
    if name in ("number", "integer") and isinstance(value, bool):
        return False
    return isinstance(value, expected)


def _check(value, schema: dict, path: str, root: dict) -> None:
    ref = schema.get("$ref")
    if ref is not None:
        schema = _resolve_ref(ref, root)

    declared = schema.get("type")
    if declared is not None:
        names = declared if isinstance(declared, list) else [declared]
        if not any(_type_ok(value, n) for n in names):
            raise SchemaError(
                f"{path}: expected {' or '.join(names)}, "
                f"got {type(value).__name__}", field=path)

    enum = schema.get("enum")
    if enum is not None and value not in enum:
        raise SchemaError(f"{path}: {value!r} not one of {enum}", field=path)

    minimum = schema.get("minimum")
    if minimum is not None and isinstance(value, (int, float)) \
            and not isinstance(value, bool) and value < minimum:
        raise SchemaError(f"{path}: {value} below minimum {minimum}", field=path)

    if isinstance(value, dict):
        exactly_one = schema.get("x-exactly-one-of")
        if exactly_one is not None:
            present = [k for k in exactly_one if k in value]
            if len(present) != 1:
                raise SchemaError(
                    f"{path}: exactly one of {exactly_one} required, "
                    f"got {present or 'none'}", field=path)
        for key in schema.get("required", ()):
            if key not in value:
                raise SchemaError(f"{path}: missing required field {key!r}",
                                  field=f"{path}.{key}")
        props = schema.get("properties", {})
        extra = schema.get("additionalProperties", True)
        for key, item in value.items():
            sub = props.get(key)
            if sub is not None:
                _check(item, sub, f"{path}.{key}", root)
            elif isinstance(extra, dict):
                _check(item, extra, f"{path}.{key}", root)
            elif extra is False:
                raise SchemaError(f"{path}: unknown field {key!r}",
                                  field=f"{path}.{key}")

    if isinstance(value, list):
        min_items = schema.get("minItems")
        if min_items is not None and len(value) < min_items:
            raise SchemaError(f"{path}: needs at least {min_items} items, "
                              f"has {len(value)}", field=path)
        max_items = schema.get("maxItems")
        if max_items is not None and len(value) > max_items:
            raise SchemaError(f"{path}: allows at most {max_items} items, "
                              f"has {len(value)}", field=path)
        item_schema = schema.get("items")
        if item_schema is not None:
            for i, item in enumerate(value):
                _check(item, item_schema, f"{path}[{i}]", root)


def _resolve_ref(ref: str, root: dict) -> dict:
    if not ref.startswith("#/"):
        raise ProtocolDefError(f"unsupported $ref {ref!r}")
    node = root
    for part in ref[2:].split("/"):
        node = node[part]
    return node
