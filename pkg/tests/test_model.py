from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from hasneto.model import (
    ClassId, DataCollection, Deployment, Detector, Instrument, Measurement, ModelError,
    Platform, Range, Unit, classify_iri, format_decimal, format_timestamp, is_iri,
    is_subclass_of, parse_timestamp, schema_iri, to_decimal,
)
from strategies import decimals, timestamps

UTC = timezone.utc


def test_schema_table_is_injective_and_invertible():
    iris = [schema_iri(c) for c in ClassId]
    assert len(set(iris)) == len(iris) == 14
    for cls in ClassId:
        assert classify_iri(schema_iri(cls)) is cls
    assert schema_iri(ClassId.DATA_COLLECTION) == "http://hadatac.org/ont/hasneto#DataCollection"
    assert classify_iri("http://example.org/Thing") is None


def test_activity_subclasses():
    for cls in (ClassId.DEPLOYMENT, ClassId.DATA_COLLECTION, ClassId.INTERVENTION_EVENT):
        assert is_subclass_of(cls, ClassId.ACTIVITY)
        assert not is_subclass_of(ClassId.ACTIVITY, cls)
    assert is_subclass_of(ClassId.PLATFORM, ClassId.PLATFORM)
    assert not is_subclass_of(ClassId.PLATFORM, ClassId.ACTIVITY)


@pytest.mark.parametrize("value,ok", [
    ("http://example.org/a", True),
    ("urn:uuid:1234", True),
    ("example.org/a", False),
    ("http://example.org/a b", False),
    ("", False),
    (None, False),
])
def test_iri_syntax(value, ok):
    assert is_iri(value) is ok


@pytest.mark.parametrize("text,canonical", [
    ("2015-06-01T12:00:00Z", "2015-06-01T12:00:00Z"),
    ("2015-06-01T14:00:00+02:00", "2015-06-01T12:00:00Z"),
    ("2015-06-01t12:00:00.500z", "2015-06-01T12:00:00.5Z"),
    ("2015-06-01T12:00:00.120000Z", "2015-06-01T12:00:00.12Z"),
])
def test_timestamps_normalize_to_utc(text, canonical):
    assert format_timestamp(parse_timestamp(text)) == canonical


@pytest.mark.parametrize("text", ["2015-06-01T12:00:00", "2015-06-01", "yesterday", ""])
def test_timestamps_need_an_offset(text):
    with pytest.raises(ModelError):
        parse_timestamp(text)


@pytest.mark.parametrize("text,canonical", [
    ("1.500", "1.5"), ("-0", "0"), ("+3", "3"), ("1e3", "1000"), ("0.000120", "0.00012"),
    (".5", "0.5"), ("10", "10"),
])
def test_decimal_canonical_form(text, canonical):
    assert format_decimal(to_decimal(text)) == canonical


@pytest.mark.parametrize("text", ["NaN", "inf", "1,5", "", "abc"])
def test_decimal_rejects_non_finite(text):
    with pytest.raises(ModelError):
        to_decimal(text)


@given(decimals)
def test_decimal_format_parse_round_trip(d):
    assert to_decimal(format_decimal(d)) == d


@given(timestamps)
def test_timestamp_format_parse_round_trip(t):
    assert parse_timestamp(format_timestamp(t)) == t


def test_range_needs_min_below_max():
    Range(0, 20, "http://example.org/u")
    with pytest.raises(ModelError):
        Range(20, 20, "http://example.org/u")


def test_unit_scale_nonzero():
    with pytest.raises(ModelError):
        Unit("http://example.org/u", "u", "length", 0)


def test_platform_location_bounds():
    Platform("http://example.org/p", "p", "mobile", ("-90", "180"))
    with pytest.raises(ModelError):
        Platform("http://example.org/p", "p", "mobile", ("91", "0"))
    with pytest.raises(ValueError):
        Platform("http://example.org/p", "p", "floating")


def test_instrument_detectors_sorted_and_unique():
    inst = Instrument("http://example.org/i", "i", detectors=("http://x.org/b", "http://x.org/a"))
    assert inst.detectors == ("http://x.org/a", "http://x.org/b")
    with pytest.raises(ModelError):
        Instrument("http://example.org/i", "i", detectors=("http://x.org/a",) * 2)


def test_deployment_interval_is_inclusive():
    t0 = datetime(2015, 6, 1, tzinfo=UTC)
    dep = Deployment("http://x.org/d", "http://x.org/i", "http://x.org/p", t0,
                     "http://x.org/bob", t0 + timedelta(days=1))
    assert dep.covers(t0) and dep.covers(t0 + timedelta(days=1))
    assert not dep.covers(t0 - timedelta(seconds=1))
    with pytest.raises(ModelError):
        Deployment("http://x.org/d", "http://x.org/i", "http://x.org/p", t0,
                   "http://x.org/bob", t0)


def test_deployment_settings_keys():
    t0 = datetime(2015, 6, 1, tzinfo=UTC)
    with pytest.raises(ModelError):
        Deployment("http://x.org/d", "http://x.org/i", "http://x.org/p", t0,
                   "http://x.org/bob", settings=(("a=b", "c"),))


def test_data_collection_activity_is_strict():
    t0 = datetime(2015, 6, 1, tzinfo=UTC)
    dc = DataCollection("http://x.org/dc", "http://x.org/d", t0, t0 + timedelta(hours=1),
                        (("http://x.org/a", "Scientist"),))
    assert dc.active_at(t0 + timedelta(minutes=1))
    assert not dc.active_at(t0)
    assert not dc.active_at(t0 + timedelta(hours=1))
    with pytest.raises(ValueError):
        DataCollection("http://x.org/dc", "http://x.org/d", t0,
                       associations=(("http://x.org/a", "Janitor"),))


def test_measurement_precision_non_negative():
    args = ("http://x.org/m", "1", "http://x.org/u", "http://x.org/c",
            "2015-06-01T00:00:00Z", "http://x.org/o", "http://x.org/dc")
    assert Measurement(*args).timestamp == datetime(2015, 6, 1, tzinfo=UTC)
    with pytest.raises(ModelError):
        Measurement(*args, precision="-0.1")


@given(st.text(max_size=5))
def test_detector_rejects_non_iri_characteristic(text):
    if is_iri(text):
        return
    with pytest.raises(ModelError):
        Detector("http://x.org/d", "d", text)
