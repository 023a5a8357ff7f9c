"""Typed component registry, framed wire protocol, and conformance suite."""

from .conformance import CheckResult, ConformanceReport, run_conformance
from .framing import (
    MAX_FRAME_BYTES,
    Envelope,
    FrameReader,
    canonical_json,
    decode_frame,
    decode_frame_prefix,
    encode_frame,
    read_frame_from,
)
from .registry import (
    SENSOR_FIELDS,
    ComponentBus,
    ComponentDescriptor,
    InterfaceClass,
    RegistrationHandle,
    interface_class,
)
from .schema import interface_names, ops_for, validate, validate_op, wire_schema
from .socket_transport import ComponentServer, SocketClient, parse_endpoint

__all__ = [
    "CheckResult",
    "ConformanceReport",
    "run_conformance",
    "MAX_FRAME_BYTES",
    "Envelope",
    "FrameReader",
    "canonical_json",
    "decode_frame",
    "decode_frame_prefix",
    "encode_frame",
    "read_frame_from",
    "SENSOR_FIELDS",
    "ComponentBus",
    "ComponentDescriptor",
    "InterfaceClass",
    "RegistrationHandle",
    "interface_class",
    "interface_names",
    "ops_for",
    "validate",
    "validate_op",
    "wire_schema",
    "ComponentServer",
    "SocketClient",
    "parse_endpoint",
]
