"""Component registry and the uniform call path.

A component is either an in-process object with a ``handle(op, request)``
method or a socket endpoint speaking the framed protocol. Callers see
neither difference: ``ComponentBus.call`` validates the request against
the interface schema, narrows multi-sensor grasp requests down to the
component's accepted inputs, dispatches, validates the response, and
normalizes rectangle outputs into pose candidates.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..errors import (
    NoDepthError,
    RegistrationError,
    SchemaError,
    ServiceFailure,
    TransportError,
    UnknownComponentError,
)
from ..geometry import rect_to_pose
from . import schema as wire_schema
from . import wire
from .socket_transport import SocketClient

SENSOR_FIELDS = ("depth_image", "point_cloud", "object_model")
OUTPUT_KINDS = ("rectangle", "pose", "pose_with_quality")


@dataclass(frozen=True)
class InterfaceClass:
    """One component category and the schema names its messages honor."""

    name: str
    request_schema: str
    response_schema: str


def interface_class(name: str) -> InterfaceClass:
    meta = wire_schema.wire_schema()["interfaces"].get(name)
    if meta is None:
        raise RegistrationError(f"unknown interface class {name!r}")
    return InterfaceClass(name=name,
                          request_schema=meta["request_schema"],
                          response_schema=meta["response_schema"])


@dataclass(frozen=True)
class ComponentDescriptor:
    """Machine-readable registration record for one component."""

    id: str
    interface: InterfaceClass
    accepted_inputs: tuple = ()
    output_kind: str = "pose"
    transport: str = "in_process"
    endpoint: str = ""

    def __post_init__(self):
        object.__setattr__(self, "accepted_inputs", tuple(self.accepted_inputs))
        if not self.id:
            raise RegistrationError("component id must be non-empty")
        for kind in self.accepted_inputs:
            if kind not in SENSOR_FIELDS:
                raise RegistrationError(
                    f"component {self.id!r}: unknown input kind {kind!r}")
        if self.interface.name == "grasp_planner":
            if not self.accepted_inputs:
                raise RegistrationError(
                    f"grasp planner {self.id!r} must accept at least one input kind")
            if self.output_kind not in OUTPUT_KINDS:
                raise RegistrationError(
                    f"component {self.id!r}: unknown output kind {self.output_kind!r}")
        if self.transport not in ("in_process", "socket"):
            raise RegistrationError(
                f"component {self.id!r}: unknown transport {self.transport!r}")
        if self.transport == "socket" and not self.endpoint:
            raise RegistrationError(
                f"component {self.id!r}: socket transport needs an endpoint")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "interface": self.interface.name,
            "accepted_inputs": list(self.accepted_inputs),
            "output_kind": self.output_kind,
            "transport": self.transport,
            "endpoint": self.endpoint,
        }


@dataclass
class RegistrationHandle:
    descriptor: ComponentDescriptor
    _bus: "ComponentBus" = field(repr=False)

    @property
    def id(self) -> str:
        return self.descriptor.id

    def unregister(self) -> None:
        self._bus.unregister(self.descriptor.id)


class _Entry:
    def __init__(self, descriptor, implementation, reentrant):
        self.descriptor = descriptor
        self.implementation = implementation
        self.client = None  # lazily opened for socket transports
        # non-reentrant handlers and socket connections take one caller at a time
        self.lock = None if (reentrant and descriptor.transport == "in_process") \
            else threading.Lock()


class ComponentBus:
    """Registry plus dispatcher; see module docstring for the call path."""

    def __init__(self):
        self._entries = {}
        self._registry_lock = threading.Lock()

    # -- registration ---------------------------------------------------------

    def register(self, descriptor: ComponentDescriptor, implementation=None,
                 reentrant: bool = True) -> RegistrationHandle:
        """Add a component. Socket components connect lazily at first call."""
        if descriptor.transport == "in_process":
            if implementation is None or not hasattr(implementation, "handle"):
                raise RegistrationError(
                    f"component {descriptor.id!r}: in-process registration needs "
                    f"an implementation with a handle(op, request) method")
        elif implementation is not None:
            raise RegistrationError(
                f"component {descriptor.id!r}: socket registration takes an "
                f"endpoint, not an implementation")
        with self._registry_lock:
            if descriptor.id in self._entries:
                raise RegistrationError(
                    f"component id {descriptor.id!r} is already registered")
            self._entries[descriptor.id] = _Entry(descriptor, implementation,
                                                  reentrant)
        return RegistrationHandle(descriptor, self)

    def unregister(self, component_id: str) -> None:
        with self._registry_lock:
            entry = self._entries.pop(component_id, None)
        if entry is not None and entry.client is not None:
            entry.client.close()

    def resolve(self, component_id: str) -> ComponentDescriptor:
        entry = self._entries.get(component_id)
        if entry is None:
            raise UnknownComponentError(f"no component registered as "
                                        f"{component_id!r}")
        return entry.descriptor

    def descriptors(self) -> list:
        return sorted((e.descriptor for e in self._entries.values()),
                      key=lambda d: d.id)

    # -- calling --------------------------------------------------------------

    def call(self, component_id: str, request: dict, timeout: float = 30.0) -> dict:
        """Invoke a component; request carries the operation under "op"."""
        return self._call(component_id, request, timeout, normalize=True)

    def call_raw(self, component_id: str, request: dict,
                 timeout: float = 30.0) -> dict:
        """As call(), but without input narrowing or output normalization.

        Conformance tooling uses this to observe a component's own
        behavior rather than the bus's adaptation of it.
        """
        return self._call(component_id, request, timeout, normalize=False,
                          narrow=False)

    def _call(self, component_id, request, timeout, normalize, narrow=True):
        entry = self._entries.get(component_id)
        if entry is None:
            raise UnknownComponentError(f"no component registered as "
                                        f"{component_id!r}")
        descriptor = entry.descriptor
        request = dict(request)
        op = request.pop("op", None)
        if not op:
            raise SchemaError("request is missing the operation name", field="op")
        if narrow and descriptor.interface.name == "grasp_planner" \
                and op == "plan_grasp":
            request = self._narrow_inputs(descriptor, request)
        wire_schema.validate_op(descriptor.interface.name, op, "request", request)

        if entry.lock is not None:
            with entry.lock:
                response = self._dispatch(entry, op, request, timeout)
        else:
            response = self._dispatch(entry, op, request, timeout)

        wire_schema.validate_op(descriptor.interface.name, op, "response", response)
        if normalize and descriptor.interface.name == "grasp_planner" \
                and op == "plan_grasp":
            response = self._normalize_output(descriptor, request, response)
        return response

    def _dispatch(self, entry, op, request, timeout):
        if entry.descriptor.transport == "in_process":
            if op == "ping":
                return {}
            if op == "describe":
                return entry.descriptor.to_json()
            try:
                response = entry.implementation.handle(op, request)
            except (SchemaError, ServiceFailure):
                raise
            except Exception as exc:  # noqa: BLE001 - component fault
                raise ServiceFailure(
                    f"component {entry.descriptor.id!r} failed: {exc}") from exc
            if not isinstance(response, dict):
                raise SchemaError(
                    f"component {entry.descriptor.id!r} returned "
                    f"{type(response).__name__}, expected an object")
            return response
        if entry.client is None:
            entry.client = SocketClient(entry.descriptor.endpoint)
        return entry.client.call(op, request, timeout=timeout)

    # -- grasp planner specifics ----------------------------------------------

    def _narrow_inputs(self, descriptor, request):
        """Keep one sensor field the component accepts; drop the others.

        Behaviors send every sensor product they have; this projection is
        what lets planners with different input needs share one binding
        slot. Preference follows the component's accepted_inputs order.
        """
        present = [f for f in SENSOR_FIELDS if f in request]
        if not present:
            return request  # schema validation reports the absence
        usable = [f for f in descriptor.accepted_inputs if f in request]
        if not usable:
            raise SchemaError(
                f"component {descriptor.id!r} accepts "
                f"{list(descriptor.accepted_inputs)}, request carries {present}",
                field="accepted_inputs")
        keep = usable[0]
        narrowed = {k: v for k, v in request.items()
                    if k not in SENSOR_FIELDS or k == keep}
        return narrowed

    def _normalize_output(self, descriptor, request, response):
        """Rewrite rectangle responses as pose candidates.

        Deprojection needs the request's depth image and intrinsics; the
        camera pose defaults to identity (camera frame) when absent.
        """
        if "rectangles" not in response:
            return response
        if "depth_image" not in request or "intrinsics" not in request:
            raise SchemaError(
                f"component {descriptor.id!r} returned rectangles but the "
                f"request had no depth_image/intrinsics to deproject with",
                field="rectangles")
        depth = wire.decode_depth_image(request["depth_image"])
        k = wire.decode_intrinsics(request["intrinsics"])
        camera_pose = wire.decode_pose(request.get("camera_pose",
                                                   [0, 0, 0, 0, 0, 0]))
        candidates = []
        for doc in response["rectangles"]:
            rect = wire.decode_rect(doc)
            try:
                pose = rect_to_pose(rect, depth, k, camera_pose)
            except NoDepthError:
                continue  # rect centered on a depth hole is unexecutable
            candidates.append({
                "pose": wire.encode_pose(pose),
                **({"quality": rect.quality,
                    "quality_kind": "success_probability"}
                   if rect.quality is not None else {}),
            })
        out = {k: v for k, v in response.items() if k != "rectangles"}
        out["candidates"] = candidates
        return out


def call_as_failure(exc: Exception) -> dict:
    """Render an exception as an error payload for the wire."""
    if isinstance(exc, SchemaError):
        return {"code": "schema", "message": str(exc), "field": exc.field}
    if isinstance(exc, ServiceFailure):
        return {"code": "service-failure", "message": str(exc), "field": None}
    if isinstance(exc, TransportError):
        return {"code": "transport", "message": str(exc), "field": None}
    return {"code": "internal", "message": str(exc), "field": None}
