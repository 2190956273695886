"""Fixed HASNetO class hierarchy, schema IRIs and the typed instance records."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from decimal import Decimal, InvalidOperation
from typing import Optional, Union

HASNETO = "http://hadatac.org/ont/hasneto#"
VSTOI = "http://hadatac.org/ont/vstoi#"
OBOE = "http://ecoinformatics.org/oboe/oboe.1.2/oboe-core.owl#"
PROV = "http://www.w3.org/ns/prov#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
XSD = "http://www.w3.org/2001/XMLSchema#"


class ModelError(ValueError):
    """A record or value violates a core-model invariant."""


# Scheme, colon, then no whitespace, controls, or characters that cannot
# appear inside an angle-bracketed IRI in the line format.
_IRI_RE = re.compile(r'[A-Za-z][A-Za-z0-9+.\-]*:[^\x00-\x20\x7f<>"{}|^`\\]*')


def is_iri(value: object) -> bool:
    return isinstance(value, str) and _IRI_RE.fullmatch(value) is not None


def check_iri(value: object, what: str = "iri") -> str:
    if not is_iri(value):
        raise ModelError(f"{what}: not an absolute IRI: {value!r}")
    return value  # type: ignore[return-value]


class ClassId(str, enum.Enum):
    PLATFORM = "Platform"
    INSTRUMENT = "Instrument"
    DETECTOR = "Detector"
    DEPLOYMENT = "Deployment"
    ENTITY_OF_INTEREST = "EntityOfInterest"
    CHARACTERISTIC = "Characteristic"
    MEASUREMENT = "Measurement"
    UNIT = "Unit"
    DATA_COLLECTION = "DataCollection"
    OBSERVATION = "Observation"
    ACTIVITY = "Activity"
    AGENT = "Agent"
    PROV_ENTITY = "ProvEntity"
    INTERVENTION_EVENT = "InterventionEvent"

    def __str__(self) -> str:
        return self.value


_SCHEMA_IRIS: dict[ClassId, str] = {
    ClassId.PLATFORM: VSTOI + "Platform",
    ClassId.INSTRUMENT: VSTOI + "Instrument",
    ClassId.DETECTOR: VSTOI + "Detector",
    ClassId.DEPLOYMENT: VSTOI + "Deployment",
    ClassId.ENTITY_OF_INTEREST: OBOE + "Entity",
    ClassId.CHARACTERISTIC: OBOE + "Characteristic",
    ClassId.MEASUREMENT: OBOE + "Measurement",
    ClassId.UNIT: OBOE + "Standard",
    ClassId.DATA_COLLECTION: HASNETO + "DataCollection",
    ClassId.OBSERVATION: OBOE + "Observation",
    ClassId.ACTIVITY: PROV + "Activity",
    ClassId.AGENT: PROV + "Agent",
    ClassId.PROV_ENTITY: PROV + "Entity",
    ClassId.INTERVENTION_EVENT: HASNETO + "InterventionEvent",
}
_CLASS_BY_IRI = {iri: cls for cls, iri in _SCHEMA_IRIS.items()}

# Non-reflexive edges only; the relation is already transitively closed.
_SUBCLASS_EDGES = frozenset({
    (ClassId.DEPLOYMENT, ClassId.ACTIVITY),
    (ClassId.DATA_COLLECTION, ClassId.ACTIVITY),
    (ClassId.INTERVENTION_EVENT, ClassId.ACTIVITY),
})

DEVICE_CLASSES = frozenset({ClassId.PLATFORM, ClassId.INSTRUMENT, ClassId.DETECTOR})


def is_subclass_of(a: ClassId, b: ClassId) -> bool:
    return a == b or (ClassId(a), ClassId(b)) in _SUBCLASS_EDGES


def schema_iri(cls: ClassId) -> str:
    return _SCHEMA_IRIS[ClassId(cls)]


def classify_iri(iri: str) -> Optional[ClassId]:
    return _CLASS_BY_IRI.get(iri)


# -- scalar helpers ---------------------------------------------------------

_RFC3339_RE = re.compile(
    r"(\d{4})-(\d{2})-(\d{2})[Tt](\d{2}):(\d{2}):(\d{2})(?:\.(\d+))?([Zz]|[+-]\d{2}:\d{2})"
)


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp (offset required) into an aware UTC datetime."""
    m = _RFC3339_RE.fullmatch(text.strip()) if isinstance(text, str) else None
    if m is None:
        raise ModelError(f"not an RFC 3339 timestamp: {text!r}")
    year, month, day, hour, minute, second, frac, offset = m.groups()
    micro = int((frac or "0")[:6].ljust(6, "0"))
    if offset in ("Z", "z"):
        tz = timezone.utc
    else:
        sign = 1 if offset[0] == "+" else -1
        tz = timezone(sign * timedelta(hours=int(offset[1:3]), minutes=int(offset[4:6])))
    try:
        value = datetime(int(year), int(month), int(day), int(hour), int(minute),
                         int(second), micro, tzinfo=tz)
    except ValueError as exc:
        raise ModelError(f"not an RFC 3339 timestamp: {text!r} ({exc})") from None
    return value.astimezone(timezone.utc)


def format_timestamp(value: datetime) -> str:
    """Canonical UTC rendering: seconds precision unless a fraction is present."""
    if value.tzinfo is None:
        raise ModelError("timestamps must be timezone-aware")
    value = value.astimezone(timezone.utc)
    text = value.strftime("%Y-%m-%dT%H:%M:%S")
    if value.microsecond:
        text += "." + f"{value.microsecond:06d}".rstrip("0")
    return text + "Z"


def to_timestamp(value: Union[str, datetime]) -> datetime:
    if isinstance(value, datetime):
        if value.tzinfo is None:
            raise ModelError("timestamps must be timezone-aware")
        return value.astimezone(timezone.utc)
    return parse_timestamp(value)


_DECIMAL_RE = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")


def to_decimal(value: Union[str, int, float, Decimal]) -> Decimal:
    """Coerce to a finite Decimal; floats go through their shortest repr."""
    if isinstance(value, bool):
        raise ModelError(f"not a decimal: {value!r}")
    if isinstance(value, Decimal):
        d = value
    elif isinstance(value, int):
        d = Decimal(value)
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ModelError(f"not a finite decimal: {value!r}")
        d = Decimal(repr(value))
    elif isinstance(value, str) and _DECIMAL_RE.fullmatch(value.strip()):
        try:
            d = Decimal(value.strip())
        except InvalidOperation:
            raise ModelError(f"not a decimal: {value!r}") from None
    else:
        raise ModelError(f"not a decimal: {value!r}")
    if not d.is_finite():
        raise ModelError(f"not a finite decimal: {value!r}")
    return d


def format_decimal(value: Decimal) -> str:
    """No exponent, minimal digits, negative zero collapsed to "0"."""
    if not value.is_finite():
        raise ModelError(f"not a finite decimal: {value!r}")
    if value == 0:
        return "0"
    text = format(value.normalize(), "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


# -- records ----------------------------------------------------------------

class Mobility(str, enum.Enum):
    STATIONARY = "stationary"
    MOBILE = "mobile"


class Role(str, enum.Enum):
    SCIENTIST = "Scientist"
    TECHNICIAN = "Technician"
    DATA_MANAGER = "DataManager"
    SOFTWARE = "Software"


class AgentKind(str, enum.Enum):
    PERSON = "person"
    SOFTWARE = "software"
    ORGANIZATION = "organization"


class InterventionKind(str, enum.Enum):
    CALIBRATION = "calibration"
    MAINTENANCE = "maintenance"
    CONFIGURATION = "configuration"


def _pairs(values, what: str) -> tuple[tuple[str, str], ...]:
    out = []
    for key, value in values:
        if not isinstance(key, str) or not key or "=" in key:
            raise ModelError(f"{what}: key must be a nonempty string without '=': {key!r}")
        if not isinstance(value, str):
            raise ModelError(f"{what}: value must be a string: {value!r}")
        out.append((key, value))
    return tuple(sorted(set(out)))


def _nonempty(text: str, what: str) -> None:
    if not isinstance(text, str) or not text:
        raise ModelError(f"{what} must be a nonempty string")


@dataclass(frozen=True)
class Platform:
    iri: str
    label: str
    mobility: Mobility
    location: Optional[tuple[Decimal, Decimal]] = None
    host_label: Optional[str] = None

    CLASS = ClassId.PLATFORM

    def __post_init__(self):
        check_iri(self.iri)
        object.__setattr__(self, "mobility", Mobility(self.mobility))
        if self.location is not None:
            lat, lon = (to_decimal(v) for v in self.location)
            if not -90 <= lat <= 90:
                raise ModelError(f"latitude out of range: {lat}")
            if not -180 <= lon <= 180:
                raise ModelError(f"longitude out of range: {lon}")
            object.__setattr__(self, "location", (lat, lon))


@dataclass(frozen=True)
class Instrument:
    iri: str
    label: str
    model: Optional[str] = None
    serial: Optional[str] = None
    detectors: tuple[str, ...] = ()

    CLASS = ClassId.INSTRUMENT

    def __post_init__(self):
        check_iri(self.iri)
        dets = [check_iri(d, "detector") for d in self.detectors]
        if len(set(dets)) != len(dets):
            raise ModelError(f"instrument {self.iri} lists a detector twice")
        object.__setattr__(self, "detectors", tuple(sorted(dets)))


@dataclass(frozen=True)
class Accuracy:
    value: Decimal
    unit: str

    def __post_init__(self):
        object.__setattr__(self, "value", to_decimal(self.value))
        check_iri(self.unit, "accuracy unit")


@dataclass(frozen=True)
class Range:
    min: Decimal
    max: Decimal
    unit: str

    def __post_init__(self):
        lo, hi = to_decimal(self.min), to_decimal(self.max)
        if not lo < hi:
            raise ModelError(f"range requires min < max, got [{lo}, {hi}]")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)
        check_iri(self.unit, "range unit")


@dataclass(frozen=True)
class Detector:
    iri: str
    label: str
    characteristic: str
    accuracy: Optional[Accuracy] = None
    range: Optional[Range] = None

    CLASS = ClassId.DETECTOR

    def __post_init__(self):
        check_iri(self.iri)
        check_iri(self.characteristic, "characteristic")


@dataclass(frozen=True)
class Deployment:
    iri: str
    instrument: str
    platform: str
    start: datetime
    deployed_by: str
    end: Optional[datetime] = None
    settings: tuple[tuple[str, str], ...] = ()

    CLASS = ClassId.DEPLOYMENT

    def __post_init__(self):
        check_iri(self.iri)
        check_iri(self.instrument, "instrument")
        check_iri(self.platform, "platform")
        check_iri(self.deployed_by, "deployedBy")
        object.__setattr__(self, "start", to_timestamp(self.start))
        if self.end is not None:
            object.__setattr__(self, "end", to_timestamp(self.end))
            if not self.start < self.end:
                raise ModelError(f"deployment {self.iri}: start must precede end")
        object.__setattr__(self, "settings", _pairs(self.settings, "setting"))

    def covers(self, when: datetime) -> bool:
        return self.start <= when and (self.end is None or when <= self.end)


@dataclass(frozen=True)
class EntityOfInterest:
    iri: str
    label: str
    context: Optional[str] = None

    CLASS = ClassId.ENTITY_OF_INTEREST

    def __post_init__(self):
        check_iri(self.iri)
        _nonempty(self.label, "entity label")


_TOKEN_RE = re.compile(r"[a-z][a-z0-9_\-]*")


@dataclass(frozen=True)
class Characteristic:
    iri: str
    label: str
    quantity_kind: str

    CLASS = ClassId.CHARACTERISTIC

    def __post_init__(self):
        check_iri(self.iri)
        if not isinstance(self.quantity_kind, str) or not _TOKEN_RE.fullmatch(self.quantity_kind):
            raise ModelError(f"quantityKind must be a lowercase token: {self.quantity_kind!r}")


@dataclass(frozen=True)
class Unit:
    """A unit with an affine map into its quantity kind's base unit.

    ``x_base = scale * x + offset``.
    """

    iri: str
    label: str
    quantity_kind: str
    scale: Decimal
    offset: Decimal = Decimal(0)

    CLASS = ClassId.UNIT

    def __post_init__(self):
        check_iri(self.iri)
        if not isinstance(self.quantity_kind, str) or not _TOKEN_RE.fullmatch(self.quantity_kind):
            raise ModelError(f"quantityKind must be a lowercase token: {self.quantity_kind!r}")
        scale = to_decimal(self.scale)
        if scale == 0:
            raise ModelError(f"unit {self.iri}: scale must be nonzero")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "offset", to_decimal(self.offset))


@dataclass(frozen=True)
class Measurement:
    iri: str
    value: Decimal
    unit: str
    characteristic: str
    timestamp: datetime
    observation: str
    data_collection: str
    precision: Optional[Decimal] = None

    CLASS = ClassId.MEASUREMENT

    def __post_init__(self):
        check_iri(self.iri)
        object.__setattr__(self, "value", to_decimal(self.value))
        for name in ("unit", "characteristic", "observation", "data_collection"):
            check_iri(getattr(self, name), name)
        object.__setattr__(self, "timestamp", to_timestamp(self.timestamp))
        if self.precision is not None:
            p = to_decimal(self.precision)
            if p < 0:
                raise ModelError(f"precision must be >= 0, got {p}")
            object.__setattr__(self, "precision", p)


@dataclass(frozen=True)
class Observation:
    iri: str
    entity: str
    measurements: tuple[str, ...] = ()

    CLASS = ClassId.OBSERVATION

    def __post_init__(self):
        check_iri(self.iri)
        check_iri(self.entity, "entity")
        ms = [check_iri(m, "measurement") for m in self.measurements]
        object.__setattr__(self, "measurements", tuple(sorted(set(ms))))


@dataclass(frozen=True)
class DataCollection:
    iri: str
    deployment: str
    start: datetime
    end: Optional[datetime] = None
    associations: tuple[tuple[str, Role], ...] = ()

    CLASS = ClassId.DATA_COLLECTION

    def __post_init__(self):
        check_iri(self.iri)
        check_iri(self.deployment, "deployment")
        object.__setattr__(self, "start", to_timestamp(self.start))
        if self.end is not None:
            object.__setattr__(self, "end", to_timestamp(self.end))
            if not self.start < self.end:
                raise ModelError(f"data collection {self.iri}: start must precede end")
        assoc = {(check_iri(a, "agent"), Role(r)) for a, r in self.associations}
        object.__setattr__(self, "associations",
                           tuple(sorted(assoc, key=lambda p: (p[0], p[1].value))))

    def active_at(self, when: datetime) -> bool:
        return self.start < when and (self.end is None or when < self.end)


@dataclass(frozen=True)
class Agent:
    iri: str
    name: str
    kind: AgentKind

    CLASS = ClassId.AGENT

    def __post_init__(self):
        check_iri(self.iri)
        _nonempty(self.name, "agent name")
        object.__setattr__(self, "kind", AgentKind(self.kind))


@dataclass(frozen=True)
class InterventionEvent:
    iri: str
    kind: InterventionKind
    target: str
    at: datetime
    agent: str
    parameters: tuple[tuple[str, str], ...] = ()

    CLASS = ClassId.INTERVENTION_EVENT

    def __post_init__(self):
        check_iri(self.iri)
        object.__setattr__(self, "kind", InterventionKind(self.kind))
        check_iri(self.target, "target")
        check_iri(self.agent, "agent")
        object.__setattr__(self, "at", to_timestamp(self.at))
        object.__setattr__(self, "parameters", _pairs(self.parameters, "parameter"))


Instance = Union[
    Platform, Instrument, Detector, Deployment, EntityOfInterest, Characteristic,
    Unit, Measurement, Observation, DataCollection, Agent, InterventionEvent,
]

RECORD_TYPES: dict[ClassId, type] = {
    t.CLASS: t
    for t in (Platform, Instrument, Detector, Deployment, EntityOfInterest, Characteristic,
              Unit, Measurement, Observation, DataCollection, Agent, InterventionEvent)
}
