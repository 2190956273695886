"""Metadata descriptor parsing and CSV measurement ingestion."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional, Union
from urllib.parse import quote

from .model import (
    ClassId, ModelError, format_decimal, format_timestamp, is_iri, parse_timestamp,
    schema_iri, to_decimal,
)
from .mapping import has_type
from .store import P, RDF_TYPE, GraphStore, Literal, StoreError, Triple, bulk


class DescriptorError(ValueError):
    """Schema problems in a descriptor; ``errors`` lists every one found."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


class IngestError(StoreError):
    """Ingest refused before any mutation (dangling references, missing columns)."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class ValueColumn:
    column: str
    characteristic: str
    unit: str


@dataclass(frozen=True)
class MetadataDescriptor:
    data_collection: str
    timestamp_column: str
    entity: str
    value_columns: tuple[ValueColumn, ...]
    iri_prefix: str
    timestamp_format: str = "rfc3339"


@dataclass(frozen=True)
class IngestReport:
    rows_read: int
    measurements_created: int
    observations_created: int
    row_errors: tuple[tuple[int, str], ...] = ()


_TOP_KEYS = {"dataCollection", "timestampColumn", "entity", "valueColumns", "iriPrefix"}
_COLUMN_KEYS = {"column", "characteristic", "unit"}


def parse_descriptor(text: Union[str, bytes, dict]) -> MetadataDescriptor:
    """Strictly parse a JSON descriptor, collecting every schema error.

    ``timestampColumn`` is either a column name or
    ``{"name": ..., "format": "rfc3339"}``.
    """
    if isinstance(text, dict):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except ValueError as exc:
            raise DescriptorError([f"not valid JSON: {exc}"]) from None
    if not isinstance(doc, dict):
        raise DescriptorError(["descriptor must be a JSON object"])
    errors = []
    for key in sorted(set(doc) - _TOP_KEYS):
        errors.append(f"unknown key: {key}")
    for key in sorted(_TOP_KEYS - set(doc)):
        errors.append(f"missing required key: {key}")

    def iri_field(key: str, where: dict, label: str) -> Optional[str]:
        value = where.get(key)
        if key in where and not is_iri(value):
            errors.append(f"{label}: not an absolute IRI: {value!r}")
            return None
        return value

    dc = iri_field("dataCollection", doc, "dataCollection")
    entity = iri_field("entity", doc, "entity")

    prefix = doc.get("iriPrefix")
    if "iriPrefix" in doc and not is_iri(prefix):
        errors.append(f"iriPrefix: must be an absolute IRI prefix: {prefix!r}")

    ts_col, ts_fmt = None, "rfc3339"
    raw_ts = doc.get("timestampColumn")
    if isinstance(raw_ts, str) and raw_ts:
        ts_col = raw_ts
    elif isinstance(raw_ts, dict):
        for key in sorted(set(raw_ts) - {"name", "format"}):
            errors.append(f"timestampColumn: unknown key: {key}")
        ts_col = raw_ts.get("name")
        if not isinstance(ts_col, str) or not ts_col:
            errors.append("timestampColumn.name: must be a nonempty string")
            ts_col = None
        ts_fmt = str(raw_ts.get("format", "rfc3339")).lower().replace(" ", "")
        if ts_fmt != "rfc3339":
            errors.append(f"timestampColumn.format: only RFC 3339 is supported, got {raw_ts.get('format')!r}")
    elif "timestampColumn" in doc:
        errors.append("timestampColumn: must be a column name or {name, format} object")

    columns: list[ValueColumn] = []
    raw_cols = doc.get("valueColumns")
    if "valueColumns" in doc:
        if not isinstance(raw_cols, list) or not raw_cols:
            errors.append("valueColumns: must be a nonempty list")
            raw_cols = []
        seen: set[str] = set()
        for i, col in enumerate(raw_cols):
            where = f"valueColumns[{i}]"
            if not isinstance(col, dict):
                errors.append(f"{where}: must be an object")
                continue
            for key in sorted(set(col) - _COLUMN_KEYS):
                errors.append(f"{where}: unknown key: {key}")
            for key in sorted(_COLUMN_KEYS - set(col)):
                errors.append(f"{where}: missing required key: {key}")
            name = col.get("column")
            if "column" in col and (not isinstance(name, str) or not name):
                errors.append(f"{where}.column: must be a nonempty string")
                name = None
            if name is not None:
                if name in seen:
                    errors.append(f"duplicate column: {name}")
                seen.add(name)
                if name == ts_col:
                    errors.append(f"column {name} is both the timestamp and a value column")
            ch = iri_field("characteristic", col, f"{where}.characteristic")
            unit = iri_field("unit", col, f"{where}.unit")
            if name and ch and unit:
                columns.append(ValueColumn(name, ch, unit))
    if errors:
        raise DescriptorError(errors)
    return MetadataDescriptor(dc, ts_col, entity, tuple(columns), prefix, ts_fmt)


def check_references(store: GraphStore, d: MetadataDescriptor) -> list[str]:
    problems = []
    if not has_type(store, d.data_collection, ClassId.DATA_COLLECTION):
        problems.append(f"dataCollection does not resolve: {d.data_collection}")
    if not has_type(store, d.entity, ClassId.ENTITY_OF_INTEREST):
        problems.append(f"entity does not resolve: {d.entity}")
    for vc in d.value_columns:
        if not has_type(store, vc.characteristic, ClassId.CHARACTERISTIC):
            problems.append(f"characteristic does not resolve: {vc.characteristic}")
        if not has_type(store, vc.unit, ClassId.UNIT):
            problems.append(f"unit does not resolve: {vc.unit}")
    return sorted(set(problems))


def measurement_iri(d: MetadataDescriptor, row: int, column: str) -> str:
    return f"{d.iri_prefix}{row}-{quote(column, safe='')}"


def observation_iri(d: MetadataDescriptor, row: int) -> str:
    return f"{d.iri_prefix}obs-{row}"


def ingest_csv(store: GraphStore, csv_text: str, d: MetadataDescriptor) -> IngestReport:
    """Add one Observation per data row and one Measurement per value cell.

    Rows are numbered from 1 (first line after the header).  A row with any
    bad cell contributes nothing and is reported in ``row_errors``.
    """
    problems = check_references(store, d)
    reader = csv.reader(io.StringIO(csv_text, newline=""), strict=True)
    try:
        header = next(reader, None)
    except csv.Error as exc:
        raise IngestError([f"CSV header: {exc}"]) from None
    if header is None:
        raise IngestError(problems + ["CSV has no header row"])
    index = {name: i for i, name in enumerate(header)}
    if len(index) != len(header):
        problems.append("CSV header repeats a column name")
    for name in [d.timestamp_column] + [vc.column for vc in d.value_columns]:
        if name not in index:
            problems.append(f"CSV header lacks column: {name}")
    if problems:
        raise IngestError(problems)
    width = len(header)
    with bulk():
        return _ingest_rows(store, reader, d, index, width)


def _ingest_rows(store, reader, d, index, width) -> IngestReport:
    graph = d.data_collection
    t_type_m = schema_iri(ClassId.MEASUREMENT)
    t_type_o = schema_iri(ClassId.OBSERVATION)
    p = P
    ts_i = index[d.timestamp_column]
    cols = [(index[vc.column], vc) for vc in d.value_columns]
    rows_read = n_meas = n_obs = 0
    row_errors: list[tuple[int, str]] = []
    insert = store.insert
    rowno = 0
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            rowno += 1
            rows_read += 1
            row_errors.append((rowno, f"malformed CSV: {exc}"))
            continue
        rowno += 1
        if not row:
            continue  # blank line
        rows_read += 1
        if len(row) != width:
            row_errors.append((rowno, f"expected {width} fields, found {len(row)}"))
            continue
        try:
            when = format_timestamp(parse_timestamp(row[ts_i]))
        except ModelError as exc:
            row_errors.append((rowno, f"{d.timestamp_column}: {exc}"))
            continue
        values = []
        bad = None
        for i, vc in cols:
            cell = row[i]
            try:
                values.append((vc, format_decimal(to_decimal(cell))))
            except ModelError:
                bad = f"{vc.column}: not a finite decimal: {cell!r}"
                break
        if bad:
            row_errors.append((rowno, bad))
            continue

        obs = observation_iri(d, rowno)
        ts_lit = Literal(when, "dateTime")
        triples = [Triple(obs, RDF_TYPE, t_type_o), Triple(obs, p["entity"], d.entity)]
        for vc, lex in values:
            m = measurement_iri(d, rowno, vc.column)
            triples += (
                Triple(obs, p["measurement"], m),
                Triple(m, RDF_TYPE, t_type_m),
                Triple(m, p["value"], Literal(lex, "decimal")),
                Triple(m, p["unit"], vc.unit),
                Triple(m, p["characteristic"], vc.characteristic),
                Triple(m, p["timestamp"], ts_lit),
                Triple(m, p["observation"], obs),
                Triple(m, p["data_collection"], graph),
            )
        # Literals are canonical by construction; only minted IRIs need a check.
        if not is_iri(obs) or not all(is_iri(measurement_iri(d, rowno, vc.column)) for vc, _ in values):
            row_errors.append((rowno, "minted IRI is not valid"))
            continue
        for t in triples:
            insert(graph, t, False)
        n_obs += 1
        n_meas += len(values)
    return IngestReport(rows_read, n_meas, n_obs, tuple(row_errors))
