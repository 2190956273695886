"""Canonical quad-per-line text for stores and stable JSON for records and reports.

Line grammar (one statement per line, LF terminated, lines sorted)::

    <subject> <predicate> object <graph> .

where ``object`` is ``<iri>`` or ``"lexical"^^<datatype-iri>``.  Inside a
lexical, ``"`` ``\\`` LF CR TAB are backslash-escaped and every other control
character is written as ``\\uXXXX``.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Any

from . import model as m
from .model import (
    ClassId, ModelError, RECORD_TYPES, format_decimal, format_timestamp, is_iri,
)
from .store import DATATYPE_BY_IRI, DATATYPES, GraphStore, Literal, StoreError, Triple, bulk


class ParseError(StoreError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# -- literal escaping -------------------------------------------------------

_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_NEEDS_ESCAPE = re.compile(r'["\\\x00-\x1f\x7f-\x9f\u2028\u2029]')
_UNESCAPES = {'"': '"', "\\": "\\", "n": "\n", "r": "\r", "t": "\t"}
_ESCAPE_SEQ = re.compile(r"\\(u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8}|.)", re.S)


def _escape_char(match: re.Match) -> str:
    ch = match.group(0)
    return _ESCAPES.get(ch) or f"\\u{ord(ch):04X}"


def escape(text: str) -> str:
    if _NEEDS_ESCAPE.search(text) is None:
        return text
    return _NEEDS_ESCAPE.sub(_escape_char, text)


def _unescape_seq(match: re.Match) -> str:
    seq = match.group(1)
    if seq[0] in "uU" and len(seq) > 1:
        return chr(int(seq[1:], 16))
    try:
        return _UNESCAPES[seq]
    except KeyError:
        raise ValueError(f"invalid escape \\{seq}") from None


def unescape(text: str) -> str:
    if "\\" not in text:
        return text
    return _ESCAPE_SEQ.sub(_unescape_seq, text)


# -- canonical store text ---------------------------------------------------

def render_term(term) -> str:
    if isinstance(term, Literal):
        return f'"{escape(term.lexical)}"^^<{DATATYPES[term.datatype]}>'
    return f"<{term}>"


def render_line(graph: str, t: Triple) -> str:
    return f"<{t[0]}> <{t[1]}> {render_term(t[2])} <{graph}> ."


def export_lines(store: GraphStore) -> list[str]:
    out: list[str] = []
    append = out.append
    rendered: dict = {}
    for graph, by_subject in store.graph_subjects():
        tail = f" <{graph}> ."
        for subject, triples in by_subject.items():
            head = f"<{subject}> <"
            for _, p, o in triples:
                obj = rendered.get(o)
                if obj is None:
                    obj = rendered[o] = render_term(o)
                append(f"{head}{p}> {obj}{tail}")
    out.sort()
    return out


def export_canonical(store: GraphStore) -> str:
    lines = export_lines(store)
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def fingerprint(store: GraphStore) -> str:
    """SHA-256 over the canonical document."""
    return "sha256:" + hashlib.sha256(export_canonical(store).encode("utf-8")).hexdigest()


_LINE_RE = re.compile(
    r'<([^<>\s]*)> <([^<>\s]*)> (?:<([^<>\s]*)>|"((?:[^"\\]|\\.)*)"\^\^<([^<>\s]*)>) <([^<>\s]*)> \.'
)


def _locate_error(text: str) -> tuple[int, str]:
    """Best-effort column (1-based) and reason for a line that failed the grammar."""
    pos = 0
    parts = ("subject", "predicate", "object", "graph")
    for i, part in enumerate(parts):
        if pos >= len(text):
            return pos + 1, f"unexpected end of line, expected {part}"
        if part == "object" and text[pos] == '"':
            mt = re.compile(r'"((?:[^"\\]|\\.)*)"\^\^<[^<>\s]*>').match(text, pos)
        else:
            mt = re.compile(r"<[^<>\s]*>").match(text, pos)
        if mt is None:
            return pos + 1, f"malformed {part}"
        pos = mt.end()
        if pos >= len(text) or text[pos] != " ":
            return pos + 1, f"expected a space after {part}"
        pos += 1
    if text[pos:] != ".":
        return pos + 1, 'statement must end with "."'
    return 1, "malformed statement"


def import_canonical(text: str) -> GraphStore:
    """Parse a canonical document; line order and duplicates do not matter."""
    store = GraphStore()
    if not text:
        return store
    with bulk():
        quads = _parse_lines(text)
        for g, t in quads:
            store.insert(g, t, check=False)
    return store


def _parse_lines(text: str) -> list:
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    elif lines:
        n = len(lines)
        raise ParseError(n, len(lines[-1]) + 1, "missing line terminator (truncated file?)")
    quads = []
    for lineno, line in enumerate(lines, 1):
        mt = _LINE_RE.fullmatch(line)
        if mt is None:
            col, why = _locate_error(line)
            raise ParseError(lineno, col, why)
        s, p, o_iri, lex, dt, g = mt.groups()
        for value, col in ((s, mt.start(1)), (p, mt.start(2)), (g, mt.start(6))):
            if not is_iri(value):
                raise ParseError(lineno, col + 1, f"not an IRI: {value!r}")
        if o_iri is not None:
            if not is_iri(o_iri):
                raise ParseError(lineno, mt.start(3) + 1, f"not an IRI: {o_iri!r}")
            obj = o_iri
        else:
            if dt not in DATATYPE_BY_IRI:
                raise ParseError(lineno, mt.start(5) + 1, f"unsupported datatype <{dt}>")
            try:
                obj = Literal.parse(unescape(lex), DATATYPE_BY_IRI[dt])
            except (ValueError, ModelError) as exc:
                raise ParseError(lineno, mt.start(4) + 1, str(exc)) from None
        quads.append((g, Triple(s, p, obj)))
    return quads


# -- JSON -------------------------------------------------------------------

def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


# (json key, attribute, codec); key order here is the rendered order.
_RECORD_FIELDS: dict[ClassId, list[tuple[str, str, str]]] = {
    ClassId.PLATFORM: [("iri", "iri", "str"), ("label", "label", "str"),
                       ("mobility", "mobility", "enum"), ("location", "location", "location"),
                       ("hostLabel", "host_label", "str")],
    ClassId.INSTRUMENT: [("iri", "iri", "str"), ("label", "label", "str"),
                         ("model", "model", "str"), ("serial", "serial", "str"),
                         ("detectors", "detectors", "list")],
    ClassId.DETECTOR: [("iri", "iri", "str"), ("label", "label", "str"),
                       ("characteristic", "characteristic", "str"),
                       ("accuracy", "accuracy", "accuracy"), ("range", "range", "range")],
    ClassId.DEPLOYMENT: [("iri", "iri", "str"), ("instrument", "instrument", "str"),
                         ("platform", "platform", "str"), ("start", "start", "ts"),
                         ("end", "end", "ts"), ("deployedBy", "deployed_by", "str"),
                         ("settings", "settings", "pairs")],
    ClassId.ENTITY_OF_INTEREST: [("iri", "iri", "str"), ("label", "label", "str"),
                                 ("context", "context", "str")],
    ClassId.CHARACTERISTIC: [("iri", "iri", "str"), ("label", "label", "str"),
                             ("quantityKind", "quantity_kind", "str")],
    ClassId.UNIT: [("iri", "iri", "str"), ("label", "label", "str"),
                   ("quantityKind", "quantity_kind", "str"), ("scale", "scale", "dec"),
                   ("offset", "offset", "dec")],
    ClassId.MEASUREMENT: [("iri", "iri", "str"), ("value", "value", "dec"),
                          ("unit", "unit", "str"), ("characteristic", "characteristic", "str"),
                          ("timestamp", "timestamp", "ts"), ("precision", "precision", "dec"),
                          ("observation", "observation", "str"),
                          ("dataCollection", "data_collection", "str")],
    ClassId.OBSERVATION: [("iri", "iri", "str"), ("entity", "entity", "str"),
                          ("measurements", "measurements", "list")],
    ClassId.DATA_COLLECTION: [("iri", "iri", "str"), ("deployment", "deployment", "str"),
                              ("start", "start", "ts"), ("end", "end", "ts"),
                              ("associations", "associations", "assoc")],
    ClassId.AGENT: [("iri", "iri", "str"), ("name", "name", "str"), ("kind", "kind", "enum")],
    ClassId.INTERVENTION_EVENT: [("iri", "iri", "str"), ("kind", "kind", "enum"),
                                 ("target", "target", "str"), ("at", "at", "ts"),
                                 ("agent", "agent", "str"), ("parameters", "parameters", "pairs")],
}


def _encode(codec: str, v):
    if v is None:
        return [] if codec in ("list", "pairs", "assoc") else None
    if codec == "str":
        return v
    if codec == "enum":
        return v.value
    if codec == "dec":
        return format_decimal(v)
    if codec == "ts":
        return format_timestamp(v)
    if codec == "list":
        return list(v)
    if codec == "pairs":
        return [{"key": k, "value": val} for k, val in v]
    if codec == "assoc":
        return [{"agent": a, "role": r.value} for a, r in v]
    if codec == "location":
        return {"latitude": format_decimal(v[0]), "longitude": format_decimal(v[1])}
    if codec == "accuracy":
        return {"value": format_decimal(v.value), "unit": v.unit}
    if codec == "range":
        return {"min": format_decimal(v.min), "max": format_decimal(v.max), "unit": v.unit}
    raise AssertionError(codec)


def _decode(codec: str, v, where: str):
    if v is None:
        return () if codec in ("list", "pairs", "assoc") else None
    try:
        if codec in ("str", "enum", "dec", "ts"):
            return v
        if codec == "list":
            if not isinstance(v, list):
                raise TypeError("expected a list")
            return tuple(v)
        if codec == "pairs":
            return tuple((d["key"], d["value"]) for d in v)
        if codec == "assoc":
            return tuple((d["agent"], d["role"]) for d in v)
        if codec == "location":
            return (v["latitude"], v["longitude"])
        if codec == "accuracy":
            return m.Accuracy(v["value"], v["unit"])
        if codec == "range":
            return m.Range(v["min"], v["max"], v["unit"])
    except (TypeError, KeyError) as exc:
        raise ModelError(f"{where}: malformed value ({exc})") from None
    raise AssertionError(codec)


def record_to_json(inst) -> dict:
    out = {"type": inst.CLASS.value}
    for key, attr, codec in _RECORD_FIELDS[inst.CLASS]:
        out[key] = _encode(codec, getattr(inst, attr))
    return out


def record_from_json(doc: dict):
    """Build a typed record from its JSON object; unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise ModelError("record must be a JSON object")
    try:
        cls = ClassId(doc.get("type"))
        rtype = RECORD_TYPES[cls]
    except (ValueError, KeyError):
        raise ModelError(f"unknown record type: {doc.get('type')!r}") from None
    fields = _RECORD_FIELDS[cls]
    known = {k for k, _, _ in fields} | {"type"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ModelError(f"{cls.value}: unknown key(s): {', '.join(unknown)}")
    kwargs = {}
    for key, attr, codec in fields:
        if key in doc:
            kwargs[attr] = _decode(codec, doc[key], f"{cls.value}.{key}")
    try:
        return rtype(**kwargs)
    except TypeError as exc:
        raise ModelError(f"{cls.value}: {exc}") from None


def to_jsonable(obj) -> Any:
    """Plain JSON structure for a report, trace, verdict or record."""
    from .compat import CompatibilityVerdict, CompatSummary
    from .ingest import IngestReport
    from .provenance import ProvenanceTrace
    from .validation import ValidationReport

    if isinstance(obj, ValidationReport):
        return {
            "violations": [
                {"ruleId": v.rule_id, "subject": v.subject, "severity": v.severity,
                 "message": v.message}
                for v in obj.violations
            ],
            "counts": {"error": obj.errors, "warning": obj.warnings},
            "storeFingerprint": obj.store_fingerprint,
        }
    if isinstance(obj, ProvenanceTrace):
        return {
            "measurement": obj.measurement,
            "dataCollection": record_to_json(obj.data_collection),
            "deployment": record_to_json(obj.deployment),
            "instrument": record_to_json(obj.instrument),
            "detectors": [record_to_json(d) for d in obj.detectors],
            "platform": record_to_json(obj.platform),
            "agents": [{"agent": record_to_json(a), "role": r} for a, r in obj.agents],
            "interventions": [record_to_json(i) for i in obj.interventions],
            "notes": list(obj.notes),
        }
    if isinstance(obj, CompatibilityVerdict):
        return {
            "a": obj.a,
            "b": obj.b,
            "level": obj.level,
            "reasons": [{"check": c, "passed": p, "detail": d} for c, p, d in obj.reasons],
        }
    if isinstance(obj, CompatSummary):
        return {
            "pairs": obj.pairs,
            "counts": dict(obj.counts),
            "minLevel": obj.min_level,
            "matrix": [list(row) for row in obj.matrix],
        }
    if isinstance(obj, IngestReport):
        return {
            "rowsRead": obj.rows_read,
            "measurementsCreated": obj.measurements_created,
            "observationsCreated": obj.observations_created,
            "rowErrors": [{"row": r, "message": msg} for r, msg in obj.row_errors],
        }
    if isinstance(obj, list):
        return [to_jsonable(x) for x in obj]
    if hasattr(obj, "CLASS"):
        return record_to_json(obj)
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if obj is None or isinstance(obj, (str, int, bool)):
        return obj
    raise TypeError(f"cannot render {type(obj).__name__} as JSON")


def render_json(obj) -> str:
    return dumps(to_jsonable(obj))


def parse_validation_report(text: str):
    from .validation import ValidationReport, Violation

    d = json.loads(text)
    return ValidationReport(
        tuple(Violation(v["ruleId"], v["subject"], v["severity"], v["message"])
              for v in d["violations"]),
        d["storeFingerprint"],
    )


def parse_trace(text: str):
    from .provenance import ProvenanceTrace

    d = json.loads(text)
    return ProvenanceTrace(
        measurement=d["measurement"],
        data_collection=record_from_json(d["dataCollection"]),
        deployment=record_from_json(d["deployment"]),
        instrument=record_from_json(d["instrument"]),
        detectors=tuple(record_from_json(x) for x in d["detectors"]),
        platform=record_from_json(d["platform"]),
        agents=tuple((record_from_json(x["agent"]), x["role"]) for x in d["agents"]),
        interventions=tuple(record_from_json(x) for x in d["interventions"]),
        notes=tuple(d["notes"]),
    )


def parse_verdict(text: str):
    from .compat import CompatibilityVerdict

    d = json.loads(text)
    return CompatibilityVerdict(
        d["a"], d["b"], d["level"],
        tuple((r["check"], r["passed"], r["detail"]) for r in d["reasons"]),
    )


def parse_compat_summary(text: str):
    from .compat import CompatSummary

    d = json.loads(text)
    return CompatSummary(d["pairs"], tuple(d["counts"].items()), d["minLevel"],
                         tuple(tuple(row) for row in d["matrix"]))


def parse_ingest_report(text: str):
    from .ingest import IngestReport

    d = json.loads(text)
    return IngestReport(d["rowsRead"], d["measurementsCreated"], d["observationsCreated"],
                        tuple((e["row"], e["message"]) for e in d["rowErrors"]))
