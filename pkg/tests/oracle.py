"""Brute-force compatibility levels computed straight from raw quads.

Shares nothing with the engine except vocabulary IRIs: lookups walk a plain
(subject, predicate) -> objects dict and unit arithmetic uses exact fractions.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

from hasneto.model import ClassId, schema_iri
from hasneto.store import P, RDF_TYPE, ROLE_PREDICATES

TOLERANCE = Fraction(1, 10**12)


class RawView:
    def __init__(self, store):
        self.po = defaultdict(list)
        self.by_p = defaultdict(list)
        for _, t in store.quads():
            self.po[(t.subject, t.predicate)].append(t.object)
            self.by_p[t.predicate].append(t)

    def all(self, s, p):
        return self.po.get((s, p), [])

    def one(self, s, p):
        vals = self.all(s, p)
        return vals[0] if len(vals) == 1 else None

    def lex(self, s, p):
        v = self.one(s, p)
        return None if v is None else v.lexical

    def typed(self, s, cls):
        return s is not None and schema_iri(cls) in self.all(s, RDF_TYPE)


def _to_base(view, unit, x):
    return Fraction(view.lex(unit, P["scale"])) * x + Fraction(view.lex(unit, P["offset"]) or "0")


def _from_base(view, unit, y):
    return (y - Fraction(view.lex(unit, P["offset"]) or "0")) / Fraction(view.lex(unit, P["scale"]))


def unit_kind(view, unit):
    return view.lex(unit, P["quantity_kind"]) if view.typed(unit, ClassId.UNIT) else None


def in_range(view, m) -> bool:
    ch = view.one(m, P["characteristic"])
    unit = view.one(m, P["unit"])
    x = Fraction(view.lex(m, P["value"]))
    dc = view.one(m, P["data_collection"])
    dep = view.one(dc, P["deployment"])
    inst = view.one(dep, P["instrument"]) if dep else None
    for det in view.all(inst, P["detector"]) if inst else []:
        if view.one(det, P["characteristic"]) != ch:
            continue
        r_unit = view.one(det, P["range_unit"])
        if r_unit is None or unit_kind(view, r_unit) != unit_kind(view, unit):
            continue
        v = _from_base(view, r_unit, _to_base(view, unit, x))
        lo = Fraction(view.lex(det, P["range_min"]))
        hi = Fraction(view.lex(det, P["range_max"]))
        if v < lo - TOLERANCE * max(1, abs(lo)) or v > hi + TOLERANCE * max(1, abs(hi)):
            return False
    return True


def trace_complete(view, m) -> bool:
    dc = view.one(m, P["data_collection"])
    if not view.typed(dc, ClassId.DATA_COLLECTION):
        return False
    dep = view.one(dc, P["deployment"])
    if not view.typed(dep, ClassId.DEPLOYMENT):
        return False
    inst = view.one(dep, P["instrument"])
    if not view.typed(inst, ClassId.INSTRUMENT):
        return False
    if not view.typed(view.one(dep, P["platform"]), ClassId.PLATFORM):
        return False
    if not view.typed(view.one(dep, P["deployed_by"]), ClassId.AGENT):
        return False
    detectors = view.all(inst, P["detector"])
    if not all(view.typed(d, ClassId.DETECTOR) for d in detectors):
        return False
    for pred in ROLE_PREDICATES.values():
        if not all(view.typed(a, ClassId.AGENT) for a in view.all(dc, pred)):
            return False
    return True


def level(view, a, b) -> str:
    def qk(m):
        ch = view.one(m, P["characteristic"])
        return view.lex(ch, P["quantity_kind"]) if view.typed(ch, ClassId.CHARACTERISTIC) else None

    def entity(m):
        e = view.one(view.one(m, P["observation"]), P["entity"])
        return e if view.typed(e, ClassId.ENTITY_OF_INTEREST) else None

    if qk(a) is None or qk(a) != qk(b):
        return "Incompatible"
    ea, eb = entity(a), entity(b)
    if ea is None or ea != eb or view.lex(ea, P["context"]) != view.lex(eb, P["context"]):
        return "L0"
    ka, kb = unit_kind(view, view.one(a, P["unit"])), unit_kind(view, view.one(b, P["unit"]))
    if ka is None or ka != kb:
        return "L1"
    if not (in_range(view, a) and in_range(view, b)
            and trace_complete(view, a) and trace_complete(view, b)):
        return "L2"
    return "L3"
