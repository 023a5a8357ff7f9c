"""Socket server half: one connection at a time, strict request order.

Connection rules, mirrored from the protocol description:

  * request ids must rise strictly within a connection; a stale or
    repeated id draws an error with code "protocol" and the connection
    is closed, because the peer is confused and replies could pair with
    the wrong request.
  * a frame that declares more than the size cap closes the connection
    without a reply; there is no trustworthy id to answer to and no
    point reading the body.
  * a malformed body draws an error envelope with id 0 and code
    "malformed-frame", and the connection stays open: framing is intact,
    only that one message was garbage.
  * ping and describe are answered for any component; plan_grasp is
    validated and planned; any other op is a schema error.
"""

from __future__ import annotations

import socket
import threading

from . import planner
from .protocol import Envelope, FrameTooLarge, MalformedFrame, StreamDecoder, encode_frame

POLL_SECONDS = 0.2


def _error(request_id: int, code: str, message: str, field=None) -> Envelope:
    return Envelope(request_id, "error",
                    {"code": code, "message": message, "field": field})


class PlannerServer:
    """Owns the listening socket; serve_forever() blocks until stop()."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._listener = socket.create_server((host, port))
        self._listener.settimeout(POLL_SECONDS)
        self.host = host
        self.port = self._listener.getsockname()[1]
        self._stop = threading.Event()

    @property
    def endpoint(self) -> str:
        return f"{self.host}:{self.port}"

    def describe(self) -> dict:
        return {
            "id": planner.COMPONENT_ID,
            "interface": planner.INTERFACE,
            "accepted_inputs": list(planner.ACCEPTED_INPUTS),
            "output_kind": planner.OUTPUT_KIND,
            "transport": "socket",
            "endpoint": self.endpoint,
        }

    def stop(self) -> None:
        self._stop.set()

    def serve_forever(self) -> None:
        try:
            while not self._stop.is_set():
                try:
                    conn, _ = self._listener.accept()
                except socket.timeout:
                    continue
                except OSError:
                    return
                with conn:
                    self._serve_connection(conn)
        finally:
            self._listener.close()

    def _serve_connection(self, conn) -> None:
        conn.settimeout(POLL_SECONDS)
        decoder = StreamDecoder()
        last_id = 0
        while not self._stop.is_set():
            try:
                request = decoder.next_frame()
            except FrameTooLarge:
                return
            except MalformedFrame as exc:
                # no trustworthy id to echo, so 0 by convention
                if not self._send(conn, _error(0, "malformed-frame", str(exc))):
                    return
                continue
            if request is None:
                try:
                    chunk = conn.recv(65536)
                except socket.timeout:
                    continue
                except OSError:
                    return
                if not chunk:
                    return  # peer closed; partial bytes have no one to answer
                decoder.feed(chunk)
                continue
            if request.id <= last_id:
                self._send(conn, _error(request.id, "protocol",
                                        f"request id {request.id} not greater "
                                        f"than {last_id}"))
                return
            last_id = request.id
            if not self._send(conn, self._answer(request)):
                return

    def _answer(self, request: Envelope) -> Envelope:
        if request.op == "ping":
            return Envelope(request.id, "ping", {})
        if request.op == "describe":
            return Envelope(request.id, "describe", self.describe())
        if request.op != "plan_grasp":
            return _error(request.id, "schema",
                          f"this component has no operation {request.op!r}",
                          field="op")
        try:
            response = planner.plan_grasp(request.payload)
        except planner.RequestRejected as exc:
            return _error(request.id, "schema", str(exc), field=exc.field)
        except Exception as exc:  # keep serving; report the fault to the caller
            return _error(request.id, "internal", str(exc))
        return Envelope(request.id, "plan_grasp", response)

    def _send(self, conn, envelope: Envelope) -> bool:
        try:
            conn.sendall(encode_frame(envelope))
            return True
        except OSError:
            return False
