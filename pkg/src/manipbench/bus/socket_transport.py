"""Socket client and server for the framed protocol.

One connection serves one caller at a time under strict request/response
alternation. The client poisons its connection on any protocol breach
(id mismatch, timeout mid-exchange, transport fault); a poisoned client
fails every later call immediately rather than risking desynchronized
frames.
"""

from __future__ import annotations

import logging
import socket
import threading

from ..errors import (
    CallTimeoutError,
    FrameTooLargeError,
    MalformedFrameError,
    ProtocolError,
    SchemaError,
    ServiceFailure,
    TransportError,
)
from . import schema as wire_schema
from .framing import Envelope, encode_frame, read_frame_from

log = logging.getLogger("manipbench.bus")


def parse_endpoint(endpoint: str) -> tuple:
    host, sep, port = endpoint.rpartition(":")
    if not sep or not host:
        raise TransportError(f"endpoint {endpoint!r} is not host:port")
    try:
        return host, int(port)
    except ValueError as exc:
        raise TransportError(f"endpoint {endpoint!r} has a non-numeric port") from exc


class SocketClient:
    """One logical connection to a component endpoint."""

    def __init__(self, endpoint: str):
        self.endpoint = endpoint
        self._addr = parse_endpoint(endpoint)
        self._sock = None
        self._next_id = 1
        self._poisoned = None  # diagnostic string once dead

    def call(self, op: str, payload: dict, timeout: float = 30.0) -> dict:
        if self._poisoned is not None:
            raise TransportError(
                f"connection to {self.endpoint} is poisoned: {self._poisoned}")
        if self._sock is None:
            self._connect(timeout)
        request = Envelope(id=self._next_id, op=op, payload=payload)
        self._next_id += 1
        try:
            self._sock.settimeout(timeout)
            self._sock.sendall(encode_frame(request))
            response = read_frame_from(self._sock.recv)
        except socket.timeout as exc:
            self._poison(f"no response to id {request.id} within {timeout}s")
            raise CallTimeoutError(
                f"{self.endpoint}: op {op!r} timed out after {timeout}s") from exc
        except (OSError, EOFError, MalformedFrameError, FrameTooLargeError) as exc:
            self._poison(str(exc))
            raise TransportError(f"{self.endpoint}: {exc}") from exc

        if response.id != request.id:
            self._poison(f"response id {response.id} for request id {request.id}")
            raise ProtocolError(
                f"{self.endpoint}: response id {response.id} does not match "
                f"request id {request.id}")
        if response.op == "error":
            raise _error_from_payload(response.payload, self.endpoint)
        return response.payload

    def _connect(self, timeout: float) -> None:
        try:
            self._sock = socket.create_connection(self._addr, timeout=timeout)
        except OSError as exc:
            self._sock = None
            raise TransportError(
                f"cannot connect to {self.endpoint}: {exc}") from exc

    def _poison(self, why: str) -> None:
        self._poisoned = why
        self.close()
        log.warning("poisoned connection to %s: %s", self.endpoint, why)

    @property
    def poisoned(self) -> bool:
        return self._poisoned is not None

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None


def _error_from_payload(payload: dict, endpoint: str):
    code = payload.get("code", "internal")
    message = payload.get("message", "unspecified error")
    if code == "schema":
        return SchemaError(message, field=payload.get("field"))
    if code == "service-failure":
        return ServiceFailure(message)
    return ProtocolError(f"{endpoint}: {code}: {message}")


class ComponentServer:
    """Serves one component over a listening socket, one connection at a time."""

    def __init__(self, component, host: str = "127.0.0.1", port: int = 0):
        self.component = component
        self._listener = socket.create_server((host, port))
        self._listener.settimeout(0.2)
        self._host = host
        self._port = self._listener.getsockname()[1]
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._serve,
                                        name=f"serve-{component.descriptor.id}",
                                        daemon=True)

    @property
    def endpoint(self) -> str:
        return f"{self._host}:{self._port}"

    def start(self) -> "ComponentServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5)
        self._listener.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc_info):
        self.stop()

    def _serve(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            with conn:
                self._serve_connection(conn)

    def _serve_connection(self, conn) -> None:
        conn.settimeout(0.2)
        last_id = 0
        while not self._stop.is_set():
            try:
                request = read_frame_from(conn.recv)
            except socket.timeout:
                continue
            except EOFError:
                return
            except FrameTooLargeError:
                return  # oversized frames end the connection
            except MalformedFrameError as exc:
                # nothing trustworthy to echo, so the id is 0 by convention
                self._send_error(conn, 0, "malformed-frame", str(exc))
                continue
            except OSError:
                return

            if request.id <= last_id:
                self._send_error(conn, request.id, "protocol",
                                 f"request id {request.id} not greater than "
                                 f"{last_id}")
                return
            last_id = request.id
            self._answer(conn, request)

    def _answer(self, conn, request: Envelope) -> None:
        interface = self.component.descriptor.interface.name
        if request.op == "ping":
            self._send(conn, Envelope(request.id, "ping", {}))
            return
        if request.op == "describe":
            self._send(conn, Envelope(request.id, "describe",
                                      self.component.descriptor.to_json()))
            return
        try:
            wire_schema.validate_op(interface, request.op, "request",
                                    request.payload)
            response = self.component.handle(request.op, dict(request.payload))
            wire_schema.validate_op(interface, request.op, "response", response)
        except SchemaError as exc:
            self._send_error(conn, request.id, "schema", exc.raw_message, exc.field)
            return
        except ServiceFailure as exc:
            self._send_error(conn, request.id, "service-failure", str(exc))
            return
        except Exception as exc:  # noqa: BLE001 - keep serving other requests
            log.exception("component %s failed on op %s",
                          self.component.descriptor.id, request.op)
            self._send_error(conn, request.id, "internal", str(exc))
            return
        self._send(conn, Envelope(request.id, request.op, response))

    def _send_error(self, conn, request_id: int, code: str, message: str,
                    error_field=None) -> None:
        self._send(conn, Envelope(request_id, "error",
                                  {"code": code, "message": message,
                                   "field": error_field}))

    def _send(self, conn, envelope: Envelope) -> None:
        try:
            conn.sendall(encode_frame(envelope))
        except OSError:
            pass
