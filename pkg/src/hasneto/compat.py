"""Measurement retrieval and the leveled semantic-compatibility predicate.

Levels are cumulative:

* ``L0`` characteristics share a quantity kind
* ``L1`` ... and the observed entity and its context are identical
* ``L2`` ... and the units convert into each other
* ``L3`` ... and both values sit inside their calibrated detector ranges
  and both provenance traces are complete

``Incompatible`` when the L0 check fails.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Optional, Sequence

from .mapping import Resolver, instances
from .model import ClassId, Measurement, format_decimal, to_timestamp
from .provenance import NotFound, TraceError, trace
from .store import GraphStore, P
from .units import ConversionError, convert, factor
from .validation import range_violation

LEVELS = ("Incompatible", "L0", "L1", "L2", "L3")


def level_rank(level: str) -> int:
    return LEVELS.index(level)


@dataclass(frozen=True)
class MeasurementFilter:
    entity: Optional[str] = None
    characteristic: Optional[str] = None
    data_collection: Optional[str] = None
    start: Optional[datetime] = None
    end: Optional[datetime] = None
    unit: Optional[str] = None

    def __post_init__(self):
        if self.start is not None:
            object.__setattr__(self, "start", to_timestamp(self.start))
        if self.end is not None:
            object.__setattr__(self, "end", to_timestamp(self.end))
        if self.start is not None and self.end is not None and self.start > self.end:
            raise ValueError("time range: from must not be after to")


@dataclass(frozen=True)
class CompatibilityVerdict:
    a: str
    b: str
    level: str
    reasons: tuple[tuple[str, bool, str], ...]


@dataclass(frozen=True)
class CompatSummary:
    pairs: int
    counts: tuple[tuple[str, int], ...]
    min_level: Optional[str]
    matrix: tuple[tuple[str, ...], ...] = ()


def _entity_of(r: Resolver, m: Measurement) -> Optional[str]:
    ents = r.store.objects(m.observation, P["entity"])
    return ents[0] if len(ents) == 1 and r.is_a(m.observation, ClassId.OBSERVATION) else None


def find_measurements(store: GraphStore, f: MeasurementFilter,
                      limit: Optional[int] = None) -> list[Measurement]:
    """Measurements matching every bound filter, sorted by (timestamp, IRI)."""
    r = Resolver(store)
    for iri, cls in ((f.entity, ClassId.ENTITY_OF_INTEREST),
                     (f.characteristic, ClassId.CHARACTERISTIC),
                     (f.data_collection, ClassId.DATA_COLLECTION),
                     (f.unit, ClassId.UNIT)):
        if iri is not None and not r.is_a(iri, cls):
            raise NotFound(iri, cls.value)
    target = r.get(f.unit, ClassId.UNIT) if f.unit else None
    if f.unit and target is None:
        raise NotFound(f.unit, "unit")

    if f.data_collection is not None:
        candidates = store.subjects(P["data_collection"], f.data_collection)
    elif f.characteristic is not None:
        candidates = store.subjects(P["characteristic"], f.characteristic)
    elif f.entity is not None:
        candidates = set()
        for obs in store.subjects(P["entity"], f.entity):
            candidates.update(store.subjects(P["observation"], obs))
    else:
        candidates = instances(store, ClassId.MEASUREMENT)

    out = []
    for iri in candidates:
        m = r.get(iri, ClassId.MEASUREMENT)
        if m is None:
            continue
        if f.characteristic is not None and m.characteristic != f.characteristic:
            continue
        if f.data_collection is not None and m.data_collection != f.data_collection:
            continue
        if f.start is not None and m.timestamp < f.start:
            continue
        if f.end is not None and m.timestamp > f.end:
            continue
        if f.entity is not None and _entity_of(r, m) != f.entity:
            continue
        out.append(m)
    out.sort(key=lambda m: (m.timestamp, m.iri))
    if limit is not None:
        out = out[:limit]
    if target is not None:
        converted = []
        for m in out:
            src = r.get(m.unit, ClassId.UNIT)
            if src is None:
                raise NotFound(m.unit, "unit")
            converted.append(dataclasses.replace(
                m, value=convert(m.value, src, target), unit=target.iri))
        out = converted
    return out


class _PairEngine:
    """Per-measurement facts cached across many pairwise evaluations."""

    def __init__(self, store: GraphStore):
        self.store = store
        self.r = Resolver(store)
        self._trace: dict[str, Optional[str]] = {}
        self._range: dict[str, Optional[str]] = {}

    def measurement(self, iri: str) -> Measurement:
        m = self.r.get(iri, ClassId.MEASUREMENT)
        if m is None:
            raise NotFound(iri, "measurement")
        return m

    def trace_problem(self, iri: str) -> Optional[str]:
        if iri not in self._trace:
            try:
                trace(self.store, iri, self.r)
                self._trace[iri] = None
            except TraceError as exc:
                self._trace[iri] = str(exc)
        return self._trace[iri]

    def range_problem(self, iri: str) -> Optional[str]:
        if iri not in self._range:
            self._range[iri] = range_violation(self.store, iri, self.r)
        return self._range[iri]

    def instrument_of(self, m: Measurement) -> Optional[str]:
        deps = self.store.objects(m.data_collection, P["deployment"])
        if len(deps) != 1:
            return None
        insts = self.store.objects(deps[0], P["instrument"])
        return insts[0] if len(insts) == 1 else None

    def verdict(self, a: str, b: str) -> CompatibilityVerdict:
        ma, mb = self.measurement(a), self.measurement(b)
        r = self.r
        reasons: list[tuple[str, bool, str]] = []

        ca = r.get(ma.characteristic, ClassId.CHARACTERISTIC)
        cb = r.get(mb.characteristic, ClassId.CHARACTERISTIC)
        if ca is None or cb is None:
            missing = ma.characteristic if ca is None else mb.characteristic
            reasons.append(("L0.quantityKind", False, f"characteristic does not resolve: {missing}"))
        else:
            same = ca.quantity_kind == cb.quantity_kind
            reasons.append(("L0.quantityKind", same,
                            f"{ca.quantity_kind} vs {cb.quantity_kind}"))

        ea, eb = _entity_of(r, ma), _entity_of(r, mb)
        ent_a = r.get(ea, ClassId.ENTITY_OF_INTEREST)
        ent_b = r.get(eb, ClassId.ENTITY_OF_INTEREST)
        same_entity = ent_a is not None and ent_b is not None and ea == eb
        reasons.append(("L1.entity", same_entity, f"{ea} vs {eb}"))
        ctx_a = ent_a.context if ent_a else None
        ctx_b = ent_b.context if ent_b else None
        reasons.append(("L1.context", ent_a is not None and ent_b is not None and ctx_a == ctx_b,
                        f"{ctx_a!r} vs {ctx_b!r}"))

        ua, ub = r.get(ma.unit, ClassId.UNIT), r.get(mb.unit, ClassId.UNIT)
        if ua is None or ub is None:
            missing = ma.unit if ua is None else mb.unit
            reasons.append(("L2.unitConversion", False, f"unit does not resolve: {missing}"))
        else:
            try:
                mul, add = factor(ua, ub)
                convert(ma.value, ua, ub)
                reasons.append(("L2.unitConversion", True,
                                f"{ua.label} -> {ub.label}: x*{format_decimal(mul)}"
                                f" + {format_decimal(add)}"))
            except ConversionError as exc:
                reasons.append(("L2.unitConversion", False, str(exc)))

        for tag, iri in (("a", a), ("b", b)):
            problem = self.range_problem(iri)
            reasons.append((f"L3.calibratedRange.{tag}", problem is None,
                            problem or "within calibrated range (or no range declared)"))
        for tag, iri in (("a", a), ("b", b)):
            problem = self.trace_problem(iri)
            reasons.append((f"L3.trace.{tag}", problem is None, problem or "complete"))

        ia, ib = self.instrument_of(ma), self.instrument_of(mb)
        reasons.append(("info.instrument", ia == ib, f"{ia} vs {ib}"))

        level = "Incompatible"
        for k in range(4):
            prefix = f"L{k}."
            if all(ok for check, ok, _ in reasons if check.startswith(prefix)):
                level = f"L{k}"
            else:
                break
        return CompatibilityVerdict(a, b, level, tuple(reasons))


def compatibility(store: GraphStore, a: str, b: str) -> CompatibilityVerdict:
    return _PairEngine(store).verdict(a, b)


def compat_report(store: GraphStore, set_a: Sequence[str], set_b: Sequence[str]) -> CompatSummary:
    """Level counts over the |A| x |B| pair matrix and the minimum level."""
    engine = _PairEngine(store)
    matrix = tuple(tuple(engine.verdict(a, b).level for b in set_b) for a in set_a)
    counts = {lvl: 0 for lvl in LEVELS}
    for row in matrix:
        for lvl in row:
            counts[lvl] += 1
    flat = [lvl for row in matrix for lvl in row]
    lowest = min(flat, key=level_rank) if flat else None
    return CompatSummary(len(flat), tuple(counts.items()), lowest, matrix)


def verdicts(store: GraphStore, pairs: Iterable[tuple[str, str]]) -> list[CompatibilityVerdict]:
    engine = _PairEngine(store)
    return [engine.verdict(a, b) for a, b in pairs]
