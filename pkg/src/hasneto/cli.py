"""Command-line front end.

Exit codes: 0 ok, 1 the answer is "no" (violations found, pair incompatible),
2 bad usage or input, 3 store or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

from .compat import MeasurementFilter, compat_report, compatibility, find_measurements
from .ingest import DescriptorError, IngestError, ingest_csv, parse_descriptor
from .mapping import put
from .model import ModelError, format_decimal, format_timestamp
from .provenance import NotFound, TraceError, activities_of, trace
from .serialization import (
    ParseError, dumps, export_canonical, record_from_json, render_json, to_jsonable,
)
from .store import GraphStore, StoreError
from .units import BUILTIN_UNITS, ConversionError
from .validation import dc2_1_violations, validate

OK, NO, USAGE, FAILURE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = USAGE):
        super().__init__(message)
        self.code = code


# -- store handling ------------------------------------------------------------

def _store_path(args) -> str:
    path = args.store or os.environ.get("HASNETO_STORE")
    if not path:
        raise CliError("no store given (use --store or set HASNETO_STORE)")
    return path


def _open(args) -> GraphStore:
    path = _store_path(args)
    if not os.path.exists(path):
        raise CliError(f"store not found: {path} (run 'hasneto init' first)", FAILURE)
    return GraphStore.load(path)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _read_iri_list(path: str) -> list[str]:
    """A JSON array of IRIs, or one IRI per line."""
    text = _read_text(path)
    if text.lstrip().startswith("["):
        items = json.loads(text)
        if not all(isinstance(x, str) for x in items):
            raise CliError(f"{path}: expected a JSON array of IRIs")
        return items
    return [line.strip() for line in text.splitlines() if line.strip()]


# -- table output --------------------------------------------------------------

def _tsv(rows) -> str:
    return "".join("\t".join("" if c is None else str(c) for c in row) + "\n" for row in rows)


def _table(kind: str, obj) -> str:
    doc = to_jsonable(obj)
    if kind == "validate":
        return _tsv([("ruleId", "severity", "subject", "message")]
                    + [(v["ruleId"], v["severity"], v["subject"], v["message"])
                       for v in doc["violations"]])
    if kind == "query":
        return _tsv([("iri", "timestamp", "value", "unit", "characteristic", "dataCollection")]
                    + [(m.iri, format_timestamp(m.timestamp), format_decimal(m.value), m.unit,
                        m.characteristic, m.data_collection) for m in obj])
    if kind == "compat":
        return _tsv([("a", "b", "level", "check", "passed", "detail")]
                    + [(doc["a"], doc["b"], doc["level"], r["check"], str(r["passed"]).lower(),
                        r["detail"]) for r in doc["reasons"]])
    if kind == "compat-set":
        return _tsv([("level", "count")] + [(k, v) for k, v in doc["counts"].items()]
                    + [("minLevel", doc["minLevel"])])
    if kind == "ingest":
        return _tsv([("rowsRead", doc["rowsRead"]),
                     ("measurementsCreated", doc["measurementsCreated"]),
                     ("observationsCreated", doc["observationsCreated"])]
                    + [("rowError", e["row"], e["message"]) for e in doc["rowErrors"]])
    if kind == "activities":
        return _tsv([("activity", "type", "role")]
                    + [(a["activity"], a["type"], a["role"]) for a in doc])
    # trace and anything else: flatten top-level keys
    return _tsv((k, v if isinstance(v, str) else dumps(v)) for k, v in doc.items())


def _emit(args, kind: str, obj) -> None:
    if args.format == "table":
        sys.stdout.write(_table(kind, obj))
    else:
        sys.stdout.write(render_json(obj) + "\n")


# -- commands ------------------------------------------------------------------

def cmd_init(args) -> int:
    path = _store_path(args)
    if os.path.exists(path) and not args.force:
        raise CliError(f"store already exists: {path} (use --force to overwrite)", FAILURE)
    store = GraphStore()
    if not args.bare:
        for u in BUILTIN_UNITS:
            put(store, u)
    store.save(path)
    sys.stdout.write(dumps({"store": path, "triples": len(store)}) + "\n")
    return OK


def cmd_add(args) -> int:
    store = _open(args)
    doc = json.loads(_read_text(args.file))
    docs = doc if isinstance(doc, list) else [doc]
    records = [record_from_json(d) for d in docs]
    added = sum(put(store, r) for r in records)
    store.save(_store_path(args))
    sys.stdout.write(dumps({"records": len(records), "triplesAdded": added}) + "\n")
    return OK


def cmd_ingest(args) -> int:
    store = _open(args)
    d = parse_descriptor(_read_text(args.descriptor))
    report = ingest_csv(store, _read_text(args.csv), d)
    store.save(_store_path(args))
    _emit(args, "ingest", report)
    for row, msg in report.row_errors:
        print(f"warning: row {row}: {msg}", file=sys.stderr)
    return OK


def cmd_validate(args) -> int:
    store = _open(args)
    report = validate(store)
    _emit(args, "validate", report)
    if args.plot_dir:
        from . import plotting

        plotting.write_validation(report, args.plot_dir)
        flagged = dc2_1_violations(report)
        if flagged:
            everything = find_measurements(store, MeasurementFilter())
            dcs = {m.data_collection for m in everything if m.iri in flagged}
            ms = [m for m in everything if m.data_collection in dcs]
            plotting.write_measurements(ms, args.plot_dir, "range-violations", flagged)
    failing = report.errors if args.errors_only else len(report.violations)
    return NO if failing else OK


def _filter(args) -> MeasurementFilter:
    return MeasurementFilter(
        entity=args.entity, characteristic=args.characteristic,
        data_collection=args.collection, start=args.start, end=args.end, unit=args.unit,
    )


def cmd_query(args) -> int:
    store = _open(args)
    found = find_measurements(store, _filter(args), args.limit)
    _emit(args, "query", found)
    if args.plot_dir:
        from . import plotting

        plotting.write_measurements(found, args.plot_dir)
    return OK


def cmd_trace(args) -> int:
    store = _open(args)
    _emit(args, "trace", trace(store, args.measurement))
    return OK


def cmd_activities(args) -> int:
    store = _open(args)
    rows = [{"activity": iri, "type": cls.value, "role": role}
            for iri, cls, role in activities_of(store, args.agent)]
    _emit(args, "activities", rows)
    return OK


def cmd_compat(args) -> int:
    store = _open(args)
    if args.a or args.b:
        if not (args.a and args.b) or args.set_a or args.set_b:
            raise CliError("give either --a and --b, or --set-a and --set-b")
        verdict = compatibility(store, args.a, args.b)
        _emit(args, "compat", verdict)
        return NO if verdict.level == "Incompatible" else OK
    if not (args.set_a and args.set_b):
        raise CliError("give either --a and --b, or --set-a and --set-b")
    set_a, set_b = _read_iri_list(args.set_a), _read_iri_list(args.set_b)
    summary = compat_report(store, set_a, set_b)
    _emit(args, "compat-set", summary)
    if args.plot_dir:
        from . import plotting

        plotting.write_compat_matrix(summary, set_a, set_b, args.plot_dir)
    return NO if summary.min_level == "Incompatible" else OK


def cmd_export(args) -> int:
    text = export_canonical(_open(args))
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_serve(args) -> int:
    from .service import serve

    path = _store_path(args)
    serve(_open(args), args.port, args.bind, store_path=path)
    return OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--store", default=argparse.SUPPRESS,
                        help="store file (default: $HASNETO_STORE)")
    common.add_argument("--format", choices=("json", "table"), default=argparse.SUPPRESS,
                        help="json (default) or tab-delimited table")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="hasneto", parents=[common],
        description="Catalog of instruments, deployments, data collections and measurements.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=fn)
        return p

    p = add("init", cmd_init, "create an empty store")
    p.add_argument("--bare", action="store_true", help="skip the built-in units")
    p.add_argument("--force", action="store_true", help="overwrite an existing store")

    p = add("add", cmd_add, "add JSON records (one object or an array)")
    p.add_argument("file", help="JSON file, or - for stdin")

    p = add("ingest", cmd_ingest, "ingest a CSV file using a metadata descriptor")
    p.add_argument("--csv", required=True)
    p.add_argument("--descriptor", required=True)

    p = add("validate", cmd_validate, "check the store against the consistency rules")
    p.add_argument("--errors-only", action="store_true",
                   help="exit 0 when only warnings are present")
    p.add_argument("--plot-dir", help="write figures and .tsv tables here")

    p = add("query", cmd_query, "find measurements")
    p.add_argument("--entity")
    p.add_argument("--characteristic")
    p.add_argument("--collection")
    p.add_argument("--from", dest="start", metavar="TIME")
    p.add_argument("--to", dest="end", metavar="TIME")
    p.add_argument("--unit", help="convert values to this unit")
    p.add_argument("--limit", type=int)
    p.add_argument("--plot-dir")

    p = add("trace", cmd_trace, "provenance chain of one measurement")
    p.add_argument("--measurement", required=True)

    p = add("activities", cmd_activities, "activities an agent took part in")
    p.add_argument("--agent", required=True)

    p = add("compat", cmd_compat, "compatibility of two measurements or two sets")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--set-a", help="file with IRIs (JSON array or one per line)")
    p.add_argument("--set-b")
    p.add_argument("--plot-dir")

    p = add("export", cmd_export, "write the canonical dump")
    p.add_argument("--out", help="output file (default stdout)")

    p = add("serve", cmd_serve, "run the HTTP API")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--bind", default="127.0.0.1")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    for name, default in (("store", None), ("format", "json"), ("verbose", 0)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DescriptorError as exc:
        for e in exc.errors:
            print(f"descriptor: {e}", file=sys.stderr)
        return USAGE
    except (NotFound, TraceError, IngestError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    except (ModelError, ConversionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (StoreError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
