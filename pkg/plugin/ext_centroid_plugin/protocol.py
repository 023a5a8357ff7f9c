"""Length-prefixed JSON framing, reimplemented from the protocol description.

A frame is a 4-byte big-endian unsigned length N followed by exactly N
bytes of UTF-8 JSON encoding one envelope: an object with exactly the
keys "id" (non-negative integer), "op" (non-empty string) and "payload"
(object). Encoding is canonical (sorted keys, no whitespace, raw UTF-8)
so equal envelopes produce equal bytes; decoding accepts any key order.
Frames over 64 MiB are refused in both directions.

This module deliberately shares no code with the host harness. Byte
compatibility is proven by the golden frames shipped under golden/.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

MAX_FRAME_BYTES = 64 * 1024 * 1024

_LENGTH = struct.Struct(">I")


class FrameTooLarge(Exception):
    """A frame declares or produces a body beyond the size cap."""


class MalformedFrame(Exception):
    """Body bytes do not decode to a well-formed envelope."""


@dataclass(frozen=True)
class Envelope:
    """One message in either direction; responses echo the request id."""

    id: int
    op: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 0:
            raise ValueError(f"envelope id must be a non-negative integer, got {self.id!r}")
        if not isinstance(self.op, str) or not self.op:
            raise ValueError(f"envelope op must be a non-empty string, got {self.op!r}")
        if not isinstance(self.payload, dict):
            raise ValueError("envelope payload must be a JSON object")


def canonical_json(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


def encode_frame(envelope: Envelope) -> bytes:
    body = canonical_json({"id": envelope.id, "op": envelope.op,
                           "payload": envelope.payload})
    if len(body) > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"frame body is {len(body)} bytes, "
                            f"limit is {MAX_FRAME_BYTES}")
    return _LENGTH.pack(len(body)) + body


def parse_body(body: bytes) -> Envelope:
    """Strict envelope parse; any deviation is a MalformedFrame."""
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFrame(f"frame body is not UTF-8 JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedFrame("envelope must be a JSON object")
    missing = {"id", "op", "payload"} - doc.keys()
    if missing:
        raise MalformedFrame(f"envelope missing fields: {sorted(missing)}")
    extra = doc.keys() - {"id", "op", "payload"}
    if extra:
        raise MalformedFrame(f"envelope has unknown fields: {sorted(extra)}")
    try:
        return Envelope(id=doc["id"], op=doc["op"], payload=doc["payload"])
    except ValueError as exc:
        raise MalformedFrame(str(exc)) from exc


def decode_frame(data: bytes) -> Envelope:
    """Decode exactly one whole frame; short or trailing bytes are errors."""
    if len(data) < _LENGTH.size:
        raise MalformedFrame(f"need {_LENGTH.size} length bytes, have {len(data)}")
    (n,) = _LENGTH.unpack_from(data)
    if n > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"declared frame of {n} bytes exceeds {MAX_FRAME_BYTES}")
    if len(data) != _LENGTH.size + n:
        raise MalformedFrame(f"frame declares {n} body bytes, "
                             f"{len(data) - _LENGTH.size} present")
    return parse_body(data[_LENGTH.size:])


class StreamDecoder:
    """Incremental frame extraction from a stream arriving in arbitrary chunks.

    feed() only buffers; next_frame() pulls one envelope at a time so a
    bad frame never swallows its well-formed neighbors. An oversized
    declared length raises FrameTooLarge as soon as the prefix is
    visible, before the body arrives, so callers can drop the connection
    without reading 64 MiB first. A malformed body raises MalformedFrame
    but consumes the frame, keeping the stream aligned for the next one.
    """

    def __init__(self):
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> None:
        self._buf.extend(chunk)

    def next_frame(self):
        """One Envelope, or None until enough bytes have been fed."""
        if len(self._buf) < _LENGTH.size:
            return None
        (n,) = _LENGTH.unpack_from(bytes(self._buf[:_LENGTH.size]))
        if n > MAX_FRAME_BYTES:
            raise FrameTooLarge(f"declared frame of {n} bytes exceeds "
                                f"{MAX_FRAME_BYTES}")
        end = _LENGTH.size + n
        if len(self._buf) < end:
            return None
        body = bytes(self._buf[_LENGTH.size:end])
        del self._buf[:end]
        return parse_body(body)

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)
