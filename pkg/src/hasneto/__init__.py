"""Metadata-aware catalog for sensor measurements using the HASNetO schema."""

from .compat import (
    CompatibilityVerdict, MeasurementFilter, compat_report, compatibility, find_measurements,
)
from .ingest import IngestReport, MetadataDescriptor, ingest_csv, parse_descriptor
from .mapping import decompose, materialize, put
from .model import ClassId, classify_iri, is_subclass_of, schema_iri
from .provenance import ProvenanceTrace, activities_of, trace
from .serialization import export_canonical, import_canonical, render_json
from .store import GraphStore, Literal, Triple
from .units import convert
from .validation import ValidationReport, validate

__version__ = "0.1.0"

__all__ = [
    "ClassId", "CompatibilityVerdict", "GraphStore", "IngestReport", "Literal",
    "MeasurementFilter", "MetadataDescriptor", "ProvenanceTrace", "Triple",
    "ValidationReport", "activities_of", "classify_iri", "compat_report", "compatibility",
    "convert", "decompose", "export_canonical", "find_measurements", "import_canonical",
    "ingest_csv", "is_subclass_of", "materialize", "parse_descriptor", "put",
    "render_json", "schema_iri", "trace", "validate",
]
