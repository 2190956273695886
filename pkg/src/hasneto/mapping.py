"""Bidirectional mapping between typed instance records and triples."""

from __future__ import annotations

from typing import Optional

from .model import (
    Accuracy, Agent, Characteristic, ClassId, DataCollection, Deployment, Detector,
    EntityOfInterest, Instance, Instrument, InterventionEvent, Measurement,
    Observation, Platform, Range, RECORD_TYPES, Unit, classify_iri, schema_iri,
)
from .store import (
    INFRASTRUCTURE_GRAPH, LABEL, P, RDF_TYPE, ROLE_BY_PREDICATE, ROLE_PREDICATES,
    GraphStore, Literal, StoreError, Triple,
)


class MaterializeError(StoreError):
    def __init__(self, iri: str, message: str):
        super().__init__(f"{iri}: {message}")
        self.iri = iri


def decompose(inst: Instance) -> set[Triple]:
    """Deterministic triple set for ``inst``; absent optionals emit nothing."""
    s = inst.iri
    out = {Triple(s, RDF_TYPE, schema_iri(inst.CLASS))}

    def lit(pred, value):
        if value is not None:
            out.add(Triple(s, P[pred], Literal.of(value)))

    def ref(pred, iri):
        if iri is not None:
            out.add(Triple(s, P[pred], iri))

    label = getattr(inst, "label", None)
    if label is not None:
        out.add(Triple(s, LABEL, Literal.of(label)))

    if isinstance(inst, Platform):
        lit("mobility", inst.mobility.value)
        if inst.location is not None:
            lit("latitude", inst.location[0])
            lit("longitude", inst.location[1])
        lit("host_label", inst.host_label)
    elif isinstance(inst, Instrument):
        lit("model", inst.model)
        lit("serial", inst.serial)
        for d in inst.detectors:
            ref("detector", d)
    elif isinstance(inst, Detector):
        ref("characteristic", inst.characteristic)
        if inst.accuracy is not None:
            lit("accuracy_value", inst.accuracy.value)
            ref("accuracy_unit", inst.accuracy.unit)
        if inst.range is not None:
            lit("range_min", inst.range.min)
            lit("range_max", inst.range.max)
            ref("range_unit", inst.range.unit)
    elif isinstance(inst, Deployment):
        ref("instrument", inst.instrument)
        ref("platform", inst.platform)
        lit("start", inst.start)
        lit("end", inst.end)
        ref("deployed_by", inst.deployed_by)
        for k, v in inst.settings:
            lit("setting", f"{k}={v}")
    elif isinstance(inst, EntityOfInterest):
        lit("context", inst.context)
    elif isinstance(inst, Characteristic):
        lit("quantity_kind", inst.quantity_kind)
    elif isinstance(inst, Unit):
        lit("quantity_kind", inst.quantity_kind)
        lit("scale", inst.scale)
        lit("offset", inst.offset)
    elif isinstance(inst, Measurement):
        lit("value", inst.value)
        ref("unit", inst.unit)
        ref("characteristic", inst.characteristic)
        lit("timestamp", inst.timestamp)
        lit("precision", inst.precision)
        ref("observation", inst.observation)
        ref("data_collection", inst.data_collection)
    elif isinstance(inst, Observation):
        ref("entity", inst.entity)
        for m in inst.measurements:
            ref("measurement", m)
    elif isinstance(inst, DataCollection):
        ref("deployment", inst.deployment)
        lit("start", inst.start)
        lit("end", inst.end)
        for agent, role in inst.associations:
            out.add(Triple(s, ROLE_PREDICATES[role.value], agent))
    elif isinstance(inst, Agent):
        lit("name", inst.name)
        lit("agent_kind", inst.kind.value)
    elif isinstance(inst, InterventionEvent):
        lit("intervention_kind", inst.kind.value)
        ref("target", inst.target)
        lit("at", inst.at)
        ref("agent", inst.agent)
        for k, v in inst.parameters:
            lit("parameter", f"{k}={v}")
    else:
        raise TypeError(f"not a typed instance: {inst!r}")
    return out


def types_of(store: GraphStore, iri: str) -> set[ClassId]:
    out = set()
    for o in store.objects(iri, RDF_TYPE):
        cls = classify_iri(o) if isinstance(o, str) else None
        if cls is not None:
            out.add(cls)
    return out


def type_of(store: GraphStore, iri: str) -> Optional[ClassId]:
    """The single record class asserted for ``iri`` (None if untyped or ambiguous)."""
    kinds = {c for c in types_of(store, iri) if c in RECORD_TYPES}
    return kinds.pop() if len(kinds) == 1 else None


def has_type(store: GraphStore, iri: Optional[str], cls: ClassId) -> bool:
    return iri is not None and cls in types_of(store, iri)


class _Fields:
    """Per-subject predicate → objects view used during materialization."""

    def __init__(self, iri: str, triples):
        self.iri = iri
        self.by_pred: dict[str, set] = {}
        for t in triples:
            self.by_pred.setdefault(t.predicate, set()).add(t.object)

    def _all(self, pred: str) -> set:
        return self.by_pred.get(P.get(pred, pred), set())

    def one(self, pred: str, required: bool = True, kind: str = "literal"):
        values = self._all(pred)
        if len(values) > 1:
            raise MaterializeError(self.iri, f"{pred}: expected one value, found {len(values)}")
        if not values:
            if required:
                raise MaterializeError(self.iri, f"{pred}: required value missing")
            return None
        (value,) = values
        if kind == "iri":
            if isinstance(value, Literal):
                raise MaterializeError(self.iri, f"{pred}: expected an IRI, found a literal")
            return value
        if not isinstance(value, Literal):
            raise MaterializeError(self.iri, f"{pred}: expected a literal, found an IRI")
        return value.to_python()

    def ref(self, pred: str, required: bool = True):
        return self.one(pred, required, kind="iri")

    def refs(self, pred: str) -> list[str]:
        values = self._all(pred)
        if any(isinstance(v, Literal) for v in values):
            raise MaterializeError(self.iri, f"{pred}: expected IRIs")
        return sorted(values)

    def pairs(self, pred: str) -> list[tuple[str, str]]:
        out = []
        for v in self._all(pred):
            if not isinstance(v, Literal) or "=" not in v.lexical:
                raise MaterializeError(self.iri, f"{pred}: expected 'key=value' literal")
            k, _, val = v.lexical.partition("=")
            out.append((k, val))
        return out


def materialize(store: GraphStore, iri: str):
    """Rebuild the typed record for ``iri`` from its triples."""
    triples = store.about(iri)
    kinds = {classify_iri(t.object) for t in triples
             if t.predicate == RDF_TYPE and isinstance(t.object, str)}
    kinds = {k for k in kinds if k in RECORD_TYPES}
    if not kinds:
        raise MaterializeError(iri, "untyped subject")
    if len(kinds) > 1:
        names = ", ".join(sorted(k.value for k in kinds))
        raise MaterializeError(iri, f"subject carries several types: {names}")
    (cls,) = kinds
    f = _Fields(iri, triples)
    try:
        return _BUILDERS[cls](iri, f)
    except ValueError as exc:  # ModelError and bad enum tokens
        raise MaterializeError(iri, str(exc)) from None


def _platform(iri, f):
    lat, lon = f.one("latitude", False), f.one("longitude", False)
    if (lat is None) != (lon is None):
        raise MaterializeError(iri, "location needs both latitude and longitude")
    return Platform(iri, f.one(LABEL), f.one("mobility"),
                    None if lat is None else (lat, lon), f.one("host_label", False))


def _detector(iri, f):
    acc = None
    if f.one("accuracy_value", False) is not None or f.ref("accuracy_unit", False) is not None:
        acc = Accuracy(f.one("accuracy_value"), f.ref("accuracy_unit"))
    rng = None
    if any(f._all(p) for p in ("range_min", "range_max", "range_unit")):
        rng = Range(f.one("range_min"), f.one("range_max"), f.ref("range_unit"))
    return Detector(iri, f.one(LABEL), f.ref("characteristic"), acc, rng)


def _data_collection(iri, f):
    assoc = []
    for pred, role in ROLE_BY_PREDICATE.items():
        assoc.extend((a, role) for a in f.refs(pred))
    return DataCollection(iri, f.ref("deployment"), f.one("start"), f.one("end", False), tuple(assoc))


_BUILDERS = {
    ClassId.PLATFORM: _platform,
    ClassId.INSTRUMENT: lambda iri, f: Instrument(
        iri, f.one(LABEL), f.one("model", False), f.one("serial", False),
        tuple(f.refs("detector"))),
    ClassId.DETECTOR: _detector,
    ClassId.DEPLOYMENT: lambda iri, f: Deployment(
        iri, f.ref("instrument"), f.ref("platform"), f.one("start"), f.ref("deployed_by"),
        f.one("end", False), tuple(f.pairs("setting"))),
    ClassId.ENTITY_OF_INTEREST: lambda iri, f: EntityOfInterest(
        iri, f.one(LABEL), f.one("context", False)),
    ClassId.CHARACTERISTIC: lambda iri, f: Characteristic(iri, f.one(LABEL), f.one("quantity_kind")),
    ClassId.UNIT: lambda iri, f: Unit(
        iri, f.one(LABEL), f.one("quantity_kind"), f.one("scale"), f.one("offset")),
    ClassId.MEASUREMENT: lambda iri, f: Measurement(
        iri, f.one("value"), f.ref("unit"), f.ref("characteristic"), f.one("timestamp"),
        f.ref("observation"), f.ref("data_collection"), f.one("precision", False)),
    ClassId.OBSERVATION: lambda iri, f: Observation(
        iri, f.ref("entity"), tuple(f.refs("measurement"))),
    ClassId.DATA_COLLECTION: _data_collection,
    ClassId.AGENT: lambda iri, f: Agent(iri, f.one("name"), f.one("agent_kind")),
    ClassId.INTERVENTION_EVENT: lambda iri, f: InterventionEvent(
        iri, f.one("intervention_kind"), f.ref("target"), f.one("at"), f.ref("agent"),
        tuple(f.pairs("parameter"))),
}


def graph_for(store: GraphStore, inst: Instance) -> str:
    """Named graph an instance belongs in: its collection's graph or infrastructure."""
    if isinstance(inst, DataCollection):
        return inst.iri
    if isinstance(inst, Measurement):
        return inst.data_collection
    if isinstance(inst, Observation):
        for m in inst.measurements:
            for o in store.objects(m, P["data_collection"]):
                if isinstance(o, str):
                    return o
        existing = store.graphs_of(inst.iri)
        if existing:
            return min(existing)
    return INFRASTRUCTURE_GRAPH


def put(store: GraphStore, inst: Instance, graph: Optional[str] = None) -> int:
    """Insert the decomposition of ``inst``; returns the number of new triples."""
    return store.insert_many(graph or graph_for(store, inst), decompose(inst))


def instances(store: GraphStore, cls: ClassId) -> list[str]:
    """IRIs of every subject typed with ``cls`` (sorted)."""
    return sorted(store.subjects(RDF_TYPE, schema_iri(cls)))


class Resolver:
    """Memoizing read-side view over a store snapshot.

    ``get`` returns the materialized record when ``iri`` is typed with the
    requested class and its triples are well formed, else None.
    """

    def __init__(self, store: GraphStore):
        self.store = store
        self._records: dict[str, object] = {}
        self._types: dict[str, set[ClassId]] = {}

    def types(self, iri: Optional[str]) -> set[ClassId]:
        if iri is None:
            return set()
        kinds = self._types.get(iri)
        if kinds is None:
            kinds = self._types[iri] = types_of(self.store, iri)
        return kinds

    def is_a(self, iri: Optional[str], cls: ClassId) -> bool:
        return cls in self.types(iri)

    def record(self, iri: Optional[str]):
        if iri is None:
            return None
        if iri in self._records:
            return self._records[iri]
        try:
            rec = materialize(self.store, iri)
        except MaterializeError:
            rec = None
        self._records[iri] = rec
        return rec

    def get(self, iri: Optional[str], cls: ClassId):
        rec = self.record(iri) if self.is_a(iri, cls) else None
        return rec if rec is not None and rec.CLASS == cls else None

    def props(self, iri: str) -> dict[str, list]:
        out: dict[str, list] = {}
        for t in self.store.about(iri):
            out.setdefault(t.predicate, []).append(t.object)
        return out
