"""Indexed in-memory triple store with named graphs.

IRIs are plain ``str``; literal objects are :class:`Literal` tuples, so the
object position of a :class:`Triple` is either a ``str`` (an IRI) or a
``Literal``.
"""

from __future__ import annotations

import gc
import os
import tempfile
import threading
from contextlib import contextmanager
from datetime import datetime, timezone
from decimal import Decimal
from typing import Iterable, Iterator, NamedTuple, Optional, Union

from .model import (
    HASNETO, XSD, ModelError, format_decimal, format_timestamp, is_iri,
    parse_timestamp, to_decimal,
)

INFRASTRUCTURE_GRAPH = "http://hadatac.org/kb/graph/infrastructure"

DATATYPES = {
    "string": XSD + "string",
    "decimal": XSD + "decimal",
    "dateTime": XSD + "dateTime",
    "boolean": XSD + "boolean",
}
DATATYPE_BY_IRI = {iri: name for name, iri in DATATYPES.items()}


class StoreError(Exception):
    """Store-level failure (I/O, corrupt file, unknown subject)."""


class MalformedTripleError(StoreError):
    def __init__(self, position: str, message: str):
        super().__init__(f"{position}: {message}")
        self.position = position


class Literal(NamedTuple):
    lexical: str
    datatype: str = "string"

    @classmethod
    def of(cls, value: Union[str, bool, int, float, Decimal, datetime]) -> "Literal":
        """Build a canonical literal from a Python value."""
        if isinstance(value, bool):
            return cls("true" if value else "false", "boolean")
        if isinstance(value, str):
            return cls(value, "string")
        if isinstance(value, datetime):
            return cls(format_timestamp(value), "dateTime")
        return cls(format_decimal(to_decimal(value)), "decimal")

    @classmethod
    def parse(cls, lexical: str, datatype: str) -> "Literal":
        """Canonicalize a lexical form of the given datatype name."""
        if datatype == "decimal":
            return cls(format_decimal(to_decimal(lexical)), datatype)
        if datatype == "dateTime":
            return cls(format_timestamp(parse_timestamp(lexical)), datatype)
        if datatype == "boolean":
            if lexical not in ("true", "false", "1", "0"):
                raise ModelError(f"not a boolean: {lexical!r}")
            return cls("true" if lexical in ("true", "1") else "false", datatype)
        if datatype == "string":
            return cls(lexical, datatype)
        raise ModelError(f"unsupported datatype: {datatype!r}")

    def to_python(self):
        if self.datatype == "decimal":
            return Decimal(self.lexical)
        if self.datatype == "dateTime":
            lex = self.lexical
            if len(lex) == 20 and lex[19] == "Z":  # canonical, whole seconds
                return datetime.fromisoformat(lex[:19]).replace(tzinfo=timezone.utc)
            return parse_timestamp(lex)
        if self.datatype == "boolean":
            return self.lexical == "true"
        return self.lexical


Term = Union[str, Literal]


class Triple(NamedTuple):
    subject: str
    predicate: str
    object: Term


def check_triple(t: Triple) -> None:
    """Raise :class:`MalformedTripleError` naming the first bad position."""
    if not is_iri(t.subject):
        raise MalformedTripleError("subject", f"not an IRI: {t.subject!r}")
    if not is_iri(t.predicate):
        raise MalformedTripleError("predicate", f"not an IRI: {t.predicate!r}")
    o = t.object
    if isinstance(o, Literal):
        if not isinstance(o.lexical, str):
            raise MalformedTripleError("object", f"literal lexical must be text: {o.lexical!r}")
        try:
            canonical = Literal.parse(o.lexical, o.datatype)
        except ModelError as exc:
            raise MalformedTripleError("object", str(exc)) from None
        if canonical != o:
            raise MalformedTripleError(
                "object", f"non-canonical {o.datatype} literal {o.lexical!r} "
                          f"(expected {canonical.lexical!r})")
    elif not is_iri(o):
        raise MalformedTripleError("object", f"not an IRI or literal: {o!r}")


class _Graph:
    __slots__ = ("triples", "by_s", "by_p", "by_o")

    def __init__(self):
        self.triples: set[Triple] = set()
        self.by_s: dict[str, set[Triple]] = {}
        self.by_p: dict[str, set[Triple]] = {}
        self.by_o: dict[Term, set[Triple]] = {}

    def add(self, t: Triple) -> bool:
        if t in self.triples:
            return False
        self.triples.add(t)
        for index, key in ((self.by_s, t[0]), (self.by_p, t[1]), (self.by_o, t[2])):
            bucket = index.get(key)
            if bucket is None:
                index[key] = {t}
            else:
                bucket.add(t)
        return True

    def discard(self, t: Triple) -> bool:
        if t not in self.triples:
            return False
        self.triples.discard(t)
        for index, key in ((self.by_s, t[0]), (self.by_p, t[1]), (self.by_o, t[2])):
            bucket = index[key]
            bucket.discard(t)
            if not bucket:
                del index[key]
        return True

    def match(self, s, p, o) -> Iterable[Triple]:
        # Probe the smallest bound index, then filter the rest.
        candidates = None
        for index, key in ((self.by_s, s), (self.by_p, p), (self.by_o, o)):
            if key is None:
                continue
            bucket = index.get(key)
            if bucket is None:
                return ()
            if candidates is None or len(bucket) < len(candidates):
                candidates = bucket
        if candidates is None:
            return self.triples
        return (t for t in candidates
                if (s is None or t[0] == s) and (p is None or t[1] == p)
                and (o is None or t[2] == o))


class RWLock:
    """Many readers or one writer; writers may opt out instead of waiting."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False

    @contextmanager
    def read(self):
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                self._cond.notify_all()

    @contextmanager
    def write(self, blocking: bool = True):
        with self._cond:
            if self._writer and not blocking:
                raise WriteConflict("another write is in progress")
            while self._writer:
                self._cond.wait()
            self._writer = True
            while self._readers:
                self._cond.wait()
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


class WriteConflict(StoreError):
    pass


@contextmanager
def bulk():
    """Suspend the cyclic GC; bulk passes allocate millions of acyclic tuples."""
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


class GraphStore:
    """Named graphs of triples with subject/predicate/object indexes."""

    def __init__(self, quads: Iterable[tuple[str, Triple]] = ()):
        self._graphs: dict[str, _Graph] = {}
        self.lock = RWLock()
        for g, t in quads:
            self.insert(g, t)

    # -- mutation ----------------------------------------------------------

    def insert(self, graph: str, t: Triple, check: bool = True) -> bool:
        """Add ``t`` to ``graph``; returns False when it was already present."""
        if check:
            if not is_iri(graph):
                raise MalformedTripleError("graph", f"not an IRI: {graph!r}")
            if not isinstance(t, Triple):
                t = Triple(*t)
            check_triple(t)
        g = self._graphs.get(graph)
        if g is None:
            g = self._graphs[graph] = _Graph()
        return g.add(t)

    def insert_many(self, graph: str, triples: Iterable[Triple], check: bool = True) -> int:
        return sum(self.insert(graph, t, check) for t in triples)

    def remove(self, graph: str, t: Triple) -> bool:
        g = self._graphs.get(graph)
        if g is None or not g.discard(t):
            return False
        if not g.triples:
            del self._graphs[graph]
        return True

    def clear(self) -> None:
        self._graphs.clear()

    # -- lookup ------------------------------------------------------------

    def match(self, graph: Optional[str] = None, s: Optional[str] = None,
              p: Optional[str] = None, o: Optional[Term] = None) -> set[Triple]:
        if graph is not None:
            g = self._graphs.get(graph)
            return set(g.match(s, p, o)) if g else set()
        out: set[Triple] = set()
        for g in self._graphs.values():
            out.update(g.match(s, p, o))
        return out

    def match_scan(self, graph=None, s=None, p=None, o=None) -> set[Triple]:
        """Unindexed reference implementation of :meth:`match`."""
        return {t for gname, t in self.quads()
                if (graph is None or gname == graph) and (s is None or t.subject == s)
                and (p is None or t.predicate == p) and (o is None or t.object == o)}

    def objects(self, s: str, p: str) -> list[Term]:
        out = []
        for g in self._graphs.values():
            bucket = g.by_s.get(s)
            if bucket:
                out.extend(t[2] for t in bucket if t[1] == p)
        return out

    def subjects(self, p: str, o: Term) -> set[str]:
        out = set()
        for g in self._graphs.values():
            bucket = g.by_o.get(o)
            if bucket:
                out.update(t[0] for t in bucket if t[1] == p)
        return out

    def about(self, s: str) -> list[Triple]:
        """All triples with subject ``s`` across graphs (possibly repeated)."""
        out: list[Triple] = []
        for g in self._graphs.values():
            bucket = g.by_s.get(s)
            if bucket:
                out.extend(bucket)
        return out

    def graphs_of(self, s: str) -> set[str]:
        return {name for name, g in self._graphs.items() if s in g.by_s}

    def graph_names(self) -> list[str]:
        return sorted(self._graphs)

    def graph_subjects(self) -> Iterator[tuple[str, dict[str, set[Triple]]]]:
        """(graph, subject index) pairs; read-only views for bulk export."""
        for name, g in self._graphs.items():
            yield name, g.by_s

    def quads(self) -> Iterator[tuple[str, Triple]]:
        for name, g in self._graphs.items():
            for t in g.triples:
                yield name, t

    def __len__(self) -> int:
        return sum(len(g.triples) for g in self._graphs.values())

    def __contains__(self, quad) -> bool:
        graph, t = quad
        g = self._graphs.get(graph)
        return g is not None and t in g.triples

    def as_dict(self) -> dict[str, frozenset[Triple]]:
        return {name: frozenset(g.triples) for name, g in self._graphs.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphStore):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    __hash__ = None  # type: ignore[assignment]

    def copy(self) -> "GraphStore":
        return GraphStore(self.quads())

    # -- persistence -------------------------------------------------------

    def save(self, path: Union[str, os.PathLike]) -> None:
        """Write the canonical document atomically (temp file + rename)."""
        from .serialization import export_canonical

        path = os.fspath(path)
        text = export_canonical(self)
        directory = os.path.dirname(os.path.abspath(path))
        try:
            fd, tmp = tempfile.mkstemp(prefix=".hasneto-", dir=directory)
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except OSError as exc:
            raise StoreError(f"cannot write store {path}: {exc}") from exc

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "GraphStore":
        from .serialization import import_canonical

        try:
            with open(path, encoding="utf-8", newline="") as fh:
                text = fh.read()
        except (OSError, UnicodeDecodeError) as exc:
            raise StoreError(f"cannot read store {os.fspath(path)}: {exc}") from exc
        return import_canonical(text)


def save(store: GraphStore, path) -> None:
    store.save(path)


def load(path) -> GraphStore:
    return GraphStore.load(path)


# Predicate table: one predicate per typed field.
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
LABEL = "http://www.w3.org/2000/01/rdf-schema#label"


def _p(name: str) -> str:
    return HASNETO + name


P = {
    "mobility": _p("hasMobility"),
    "latitude": _p("hasLatitude"),
    "longitude": _p("hasLongitude"),
    "host_label": _p("hasHostLabel"),
    "model": _p("hasModel"),
    "serial": _p("hasSerialNumber"),
    "detector": _p("hasDetector"),
    "characteristic": _p("ofCharacteristic"),
    "accuracy_value": _p("hasAccuracyValue"),
    "accuracy_unit": _p("hasAccuracyUnit"),
    "range_min": _p("hasRangeMin"),
    "range_max": _p("hasRangeMax"),
    "range_unit": _p("hasRangeUnit"),
    "instrument": _p("deploysInstrument"),
    "platform": _p("onPlatform"),
    "start": "http://www.w3.org/ns/prov#startedAtTime",
    "end": "http://www.w3.org/ns/prov#endedAtTime",
    "deployed_by": _p("deployedBy"),
    "setting": _p("hasSetting"),
    "context": _p("hasContext"),
    "quantity_kind": _p("hasQuantityKind"),
    "scale": _p("toBaseScale"),
    "offset": _p("toBaseOffset"),
    "value": _p("hasValue"),
    "unit": _p("inUnit"),
    "timestamp": _p("atTime"),
    "precision": _p("hasPrecision"),
    "observation": _p("ofObservation"),
    "data_collection": _p("inDataCollection"),
    "entity": _p("ofEntity"),
    "measurement": _p("hasMeasurement"),
    "deployment": _p("usedDeployment"),
    "name": "http://xmlns.com/foaf/0.1/name",
    "agent_kind": _p("hasAgentKind"),
    "intervention_kind": _p("hasInterventionKind"),
    "target": _p("hasTarget"),
    "at": "http://www.w3.org/ns/prov#atTime",
    "agent": "http://www.w3.org/ns/prov#wasAssociatedWith",
    "parameter": _p("hasParameter"),
}
# DataCollection associations: one predicate per role keeps agent/role pairs
# recoverable without blank nodes.
ROLE_PREDICATES = {
    "Scientist": _p("associatedScientist"),
    "Technician": _p("associatedTechnician"),
    "DataManager": _p("associatedDataManager"),
    "Software": _p("associatedSoftware"),
}
ROLE_BY_PREDICATE = {p: r for r, p in ROLE_PREDICATES.items()}
