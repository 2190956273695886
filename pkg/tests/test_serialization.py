from __future__ import annotations

import json
import random
import re

import pytest
from hypothesis import given, settings, strategies as st

from hasneto.compat import compat_report, compatibility
from hasneto.ingest import IngestReport
from hasneto.mapping import materialize
from hasneto.model import ClassId
from hasneto.provenance import trace
from hasneto.serialization import (
    ParseError, escape, export_canonical, fingerprint, import_canonical, parse_compat_summary,
    parse_ingest_report, parse_trace, parse_validation_report, parse_verdict, record_from_json,
    record_to_json, render_json, unescape,
)
from hasneto.store import GraphStore, Literal, Triple
from hasneto.validation import ValidationReport, Violation, validate
from scenarios import EX, calibration_store, clean_store, mixed_store, single_violation_fixtures
from strategies import instances, stores, texts

LINE = re.compile(r'^<[^>]+> <[^>]+> (<[^>]+>|"(?:[^"\\]|\\.)*"\^\^<[^>]+>) <[^>]+> \.$')


def test_empty_store_is_empty_text():
    assert export_canonical(GraphStore()) == ""
    assert import_canonical("") == GraphStore()


def test_single_statement_line():
    store = GraphStore([(EX + "g", Triple(EX + "s", EX + "p", Literal.of('say "hi"\n')))])
    doc = export_canonical(store)
    assert doc.endswith(" .\n") and doc.count("\n") == 1
    assert LINE.match(doc.rstrip("\n"))
    assert '\\"hi\\"\\n' in doc


@given(texts)
def test_escape_is_involutive(text):
    assert unescape(escape(text)) == text
    assert "\n" not in escape(text) and "\r" not in escape(text)


@pytest.mark.parametrize("raw,escaped", [
    ('"', '\\"'), ("\\", "\\\\"), ("\n", "\\n"), ("\t", "\\t"), ("\x00", "\\u0000"),
    ("\u2028", "\\u2028"), ("é", "é"),
])
def test_escape_table(raw, escaped):
    assert escape(raw) == escaped


def test_five_hundred_statements_deterministic():
    rnd = random.Random(3)
    quads = [(EX + f"g{rnd.randrange(3)}",
              Triple(EX + f"s{rnd.randrange(90)}", EX + f"p{rnd.randrange(7)}",
                     Literal.of(rnd.random()) if rnd.random() < 0.5 else EX + f"o{i}"))
             for i in range(500)]
    a, b = GraphStore(quads), GraphStore(list(reversed(quads)))
    assert len(a) == 500
    assert export_canonical(a) == export_canonical(b)
    assert fingerprint(a) == fingerprint(b)


@settings(max_examples=150)
@given(stores())
def test_round_trip_and_grammar(store):
    doc = export_canonical(store)
    assert all(LINE.match(line) for line in doc.splitlines())
    back = import_canonical(doc)
    assert back == store
    assert export_canonical(back) == doc


@pytest.mark.parametrize("build", [clean_store, mixed_store, lambda: calibration_store()[0]])
def test_fixture_round_trip(build):
    store = build()
    assert import_canonical(export_canonical(store)) == store


def test_shuffled_lines_give_same_store():
    doc = export_canonical(mixed_store())
    lines = doc.splitlines()
    random.Random(1).shuffle(lines)
    assert import_canonical("\n".join(lines) + "\n") == import_canonical(doc)


def test_missing_dot_reports_line():
    lines = export_canonical(clean_store()).splitlines()
    lines[4] = lines[4][:-2]
    with pytest.raises(ParseError) as exc:
        import_canonical("\n".join(lines) + "\n")
    assert exc.value.line == 5


def test_truncated_document():
    doc = export_canonical(clean_store())
    with pytest.raises(ParseError):
        import_canonical(doc[: len(doc) // 2])


def test_non_canonical_literal_is_canonicalized_on_import():
    doc = ('<http://a.example/s> <http://a.example/p> '
           '"1.50"^^<http://www.w3.org/2001/XMLSchema#decimal> <http://a.example/g> .\n')
    store = import_canonical(doc)
    assert export_canonical(store) == doc.replace('"1.50"', '"1.5"')


def test_load_of_truncated_file_is_an_error(tmp_path):
    path = tmp_path / "s.nq"
    clean_store().save(path)
    path.write_text(path.read_text()[:-40])
    with pytest.raises(ParseError):
        GraphStore.load(path)


def test_empty_report_json():
    report = ValidationReport((), fingerprint(GraphStore()))
    doc = json.loads(render_json(report))
    assert doc["violations"] == [] and doc["counts"] == {"error": 0, "warning": 0}


@given(st.lists(st.builds(Violation, st.sampled_from(["DC1-1", "DC2-1", "DC3-2"]),
                          st.just(EX + "x"), st.sampled_from(["error", "warning"]), texts),
                unique=True))
def test_report_render_parse_render(violations):
    report = ValidationReport(tuple(sorted(violations)), "sha256:" + "0" * 64)
    text = render_json(report)
    assert render_json(parse_validation_report(text)) == text
    assert render_json(report) == text


def test_other_reports_render_parse_render():
    store, a, b, _ = calibration_store()
    for obj, parse in [
        (validate(store), parse_validation_report),
        (trace(store, a[0]), parse_trace),
        (compatibility(store, a[0], b[0]), parse_verdict),
        (compat_report(store, a[:2], b[:3]), parse_compat_summary),
        (IngestReport(3, 4, 2, ((2, "bad cell"),)), parse_ingest_report),
    ]:
        text = render_json(obj)
        assert render_json(parse(text)) == text


@given(instances)
def test_record_json_round_trip(inst):
    doc = record_to_json(inst)
    assert record_from_json(json.loads(json.dumps(doc))) == inst


def test_record_json_rejects_unknown_keys():
    doc = record_to_json(materialize(clean_store(), EX + "tower1"))
    doc["colour"] = "red"
    with pytest.raises(ValueError):
        record_from_json(doc)


def test_validation_fixture_round_trip():
    for store in single_violation_fixtures().values():
        assert import_canonical(export_canonical(store)) == store


def test_json_key_order_is_stable():
    store = clean_store()
    m = record_to_json(materialize(store, EX + "m/clean0"))
    assert list(m)[:3] == ["type", "iri", "value"]
    assert m["type"] == ClassId.MEASUREMENT.value
