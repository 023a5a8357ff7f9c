"""Exception hierarchy shared across the package.

Errors that cross module boundaries (the bus surfaces geometry errors,
the engine surfaces bus errors) live here so callers can catch one
family without import cycles.
"""


class ManipBenchError(Exception):
    """Base class for every error raised by this package."""


# --- geometry -------------------------------------------------------------

class InvalidPoseError(ManipBenchError):
    """Pose fields are non-finite or otherwise unusable."""


class BoundsError(ManipBenchError):
    """A pixel coordinate fell outside its image."""


class NoDepthError(ManipBenchError):
    """Depth lookup hit the invalid-depth sentinel."""


# --- state machine --------------------------------------------------------

class BehaviorValidationError(ManipBenchError):
    """A behavior failed validation; carries the findings."""

    def __init__(self, findings):
        self.findings = list(findings)
        super().__init__("; ".join(f.message for f in self.findings))


class KeyDisciplineError(ManipBenchError):
    """A state touched a userdata key outside its declared key lists."""


class BindingError(ManipBenchError):
    """A state's binding could not be resolved."""


# --- component bus --------------------------------------------------------

class RegistrationError(ManipBenchError):
    """Component registration rejected (duplicate id, bad descriptor)."""


class UnknownComponentError(ManipBenchError):
    """No component registered under the requested id."""


class SchemaError(ManipBenchError):
    """A request or response violated its interface schema.

    ``field`` names the offending field when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        self.raw_message = message
        super().__init__(message if field is None else f"{message} (field: {field})")


class TransportError(ManipBenchError):
    """Socket-level failure: connect refused, connection dropped."""


class CallTimeoutError(ManipBenchError):
    """No response within the call timeout."""


class ProtocolError(ManipBenchError):
    """Framing/envelope contract violated (id mismatch, poisoned link)."""


class FramingError(ManipBenchError):
    """Base for frame encode/decode failures."""


class FrameTooLargeError(FramingError):
    """Frame length prefix exceeds the 64 MiB cap."""


class IncompleteFrameError(FramingError):
    """Byte stream ended before the announced frame length."""


class MalformedFrameError(FramingError):
    """Frame bytes are not valid UTF-8 JSON, or carry trailing garbage."""


class ServiceFailure(ManipBenchError):
    """The component reported a failure; message is the component's."""


# --- simulation -----------------------------------------------------------

class SimError(ManipBenchError):
    """Base for simulated-world errors."""


class UnknownObjectError(SimError):
    pass


class ObjectHeldError(SimError):
    pass


class ApparatusRangeError(SimError):
    pass


class MissingNominalPoseError(SimError):
    pass


# --- reference components / harness ---------------------------------------

class NoCandidateError(ManipBenchError):
    """Selection was asked to pick from an empty candidate list."""


class ProtocolDefError(ManipBenchError):
    """Benchmark protocol definition is invalid."""


class EmptyRecordsError(ManipBenchError):
    """Comparison requested over zero trial records."""


class ConfigError(ManipBenchError):
    """Run configuration file missing, unparsable, or inconsistent."""
