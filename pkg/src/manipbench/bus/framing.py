"""Length-prefixed JSON framing.

A frame is a 4-byte big-endian unsigned length N followed by exactly N
bytes of UTF-8 JSON encoding one envelope. Encoding is canonical (sorted
keys, no whitespace) so identical envelopes produce identical bytes;
decoding accepts any key order. Frames larger than 64 MiB are rejected
in both directions.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

from ..errors import (
    FrameTooLargeError,
    IncompleteFrameError,
    MalformedFrameError,
)

MAX_FRAME_BYTES = 64 * 1024 * 1024

_LENGTH = struct.Struct(">I")


@dataclass(frozen=True)
class Envelope:
    """One message: request or response.

    ``id`` is assigned by the requester and must increase monotonically
    per connection; a response carries the id of the request it answers.
    """

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
    """UTF-8 bytes of the canonical JSON text (sorted keys, no whitespace)."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


def encode_frame(envelope: Envelope) -> bytes:
    body = canonical_json({"id": envelope.id, "op": envelope.op,
                           "payload": envelope.payload})
    if len(body) > MAX_FRAME_BYTES:
        raise FrameTooLargeError(
            f"frame body is {len(body)} bytes, limit is {MAX_FRAME_BYTES}")
    return _LENGTH.pack(len(body)) + body


def decode_frame(data: bytes) -> Envelope:
    """Decode exactly one frame; trailing bytes are an error."""
    envelope, consumed = decode_frame_prefix(data)
    if consumed != len(data):
        raise MalformedFrameError(
            f"{len(data) - consumed} trailing bytes after frame")
    return envelope


def decode_frame_prefix(data: bytes):
    """Decode one frame from the head of ``data``; returns (envelope, consumed)."""
    if len(data) < _LENGTH.size:
        raise IncompleteFrameError(
            f"need {_LENGTH.size} length bytes, have {len(data)}")
    (n,) = _LENGTH.unpack_from(data)
    if n > MAX_FRAME_BYTES:
        raise FrameTooLargeError(f"declared frame of {n} bytes exceeds "
                                 f"{MAX_FRAME_BYTES}")
    end = _LENGTH.size + n
    if len(data) < end:
        raise IncompleteFrameError(
            f"frame declares {n} body bytes, only {len(data) - _LENGTH.size} present")
    return _parse_body(data[_LENGTH.size:end]), end


def _parse_body(body: bytes) -> Envelope:
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFrameError(f"frame body is not UTF-8 JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedFrameError("envelope must be a JSON object")
    missing = {"id", "op", "payload"} - doc.keys()
    if missing:
        raise MalformedFrameError(f"envelope missing fields: {sorted(missing)}")
    extra = doc.keys() - {"id", "op", "payload"}
    if extra:
        raise MalformedFrameError(f"envelope has unknown fields: {sorted(extra)}")
    try:
        return Envelope(id=doc["id"], op=doc["op"], payload=doc["payload"])
    except ValueError as exc:
        raise MalformedFrameError(str(exc)) from exc


class FrameReader:
    """Incremental decoder for a byte stream arriving in arbitrary chunks."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> list:
        """Absorb a chunk; returns every envelope completed by it."""
        self._buf.extend(chunk)
        out = []
        while True:
            try:
                envelope, consumed = decode_frame_prefix(bytes(self._buf))
            except IncompleteFrameError:
                return out
            del self._buf[:consumed]
            out.append(envelope)

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)


def read_frame_from(recv) -> Envelope:
    """Read one frame using ``recv(max_bytes) -> bytes`` (empty = EOF).

    Raises EOFError on a clean close between frames and
    IncompleteFrameError if the stream ends mid-frame.
    """
    header = _read_exact(recv, _LENGTH.size, clean_eof_ok=True)
    if header is None:
        raise EOFError("stream closed between frames")
    (n,) = _LENGTH.unpack(header)
    if n > MAX_FRAME_BYTES:
        raise FrameTooLargeError(f"declared frame of {n} bytes exceeds "
                                 f"{MAX_FRAME_BYTES}")
    return _parse_body(_read_exact(recv, n))


def _read_exact(recv, n: int, clean_eof_ok: bool = False):
    parts = []
    remaining = n
    while remaining:
        chunk = recv(remaining)
        if not chunk:
            if clean_eof_ok and not parts:
                return None
            raise IncompleteFrameError(
                f"stream closed with {remaining} of {n} bytes outstanding")
        parts.append(chunk)
        remaining -= len(chunk)
    return b"".join(parts)
