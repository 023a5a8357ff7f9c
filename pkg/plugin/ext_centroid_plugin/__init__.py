"""Out-of-tree grasp planner: one candidate at the cloud centroid.

A worked example of a component that lives outside the harness process
and outside its codebase, speaking only the framed socket protocol.
Python standard library only; the golden frames under golden/ pin byte
compatibility with the host implementation.
"""

from .planner import (
    ACCEPTED_INPUTS,
    COMPONENT_ID,
    INTERFACE,
    OUTPUT_KIND,
    RequestRejected,
    plan_grasp,
)
from .protocol import (
    MAX_FRAME_BYTES,
    Envelope,
    FrameTooLarge,
    MalformedFrame,
    StreamDecoder,
    canonical_json,
    decode_frame,
    encode_frame,
)
from .server import PlannerServer

__all__ = [
    "ACCEPTED_INPUTS",
    "COMPONENT_ID",
    "INTERFACE",
    "OUTPUT_KIND",
    "MAX_FRAME_BYTES",
    "Envelope",
    "FrameTooLarge",
    "MalformedFrame",
    "PlannerServer",
    "RequestRejected",
    "StreamDecoder",
    "canonical_json",
    "decode_frame",
    "encode_frame",
    "plan_grasp",
]
