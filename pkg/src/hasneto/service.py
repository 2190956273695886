"""JSON-over-HTTP facade.

:class:`CatalogService` maps (method, target, body) to (status, content type,
body bytes) without touching sockets; :func:`serve` puts it behind a
threading HTTP server.  Response bodies are the same bytes the CLI prints.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, unquote, urlsplit

from .compat import MeasurementFilter, compat_report, compatibility, find_measurements
from .ingest import DescriptorError, IngestError, ingest_csv, parse_descriptor
from .mapping import put
from .model import ModelError
from .provenance import NotFound, TraceError, trace
from .serialization import dumps, export_canonical, record_from_json, render_json
from .store import GraphStore, StoreError, WriteConflict
from .units import ConversionError
from .validation import validate

log = logging.getLogger(__name__)

DEFAULT_LIMIT = 1000
JSON = "application/json"
TEXT = "text/plain; charset=utf-8"

@dataclass
class ApiError(Exception):
    status: int
    code: str
    message: str

    def body(self) -> bytes:
        doc = {"error": {"status": self.status, "code": self.code, "message": self.message}}
        return (dumps(doc) + "\n").encode("utf-8")


def json_body(obj) -> bytes:
    return (render_json(obj) + "\n").encode("utf-8")


def _single(params: dict, name: str, required: bool = False) -> Optional[str]:
    values = params.get(name)
    if not values:
        if required:
            raise ApiError(400, "bad_request", f"missing query parameter: {name}")
        return None
    if len(values) > 1:
        raise ApiError(400, "bad_request", f"query parameter given twice: {name}")
    return values[0]


class CatalogService:
    """Request dispatch over one store, honoring its reader/writer lock."""

    def __init__(self, store: GraphStore, store_path: Optional[str] = None):
        self.store = store
        self.store_path = store_path

    def handle(self, method: str, target: str, body: bytes = b"") -> tuple[int, str, bytes]:
        try:
            return self._dispatch(method, target, body)
        except ApiError as exc:
            return exc.status, JSON, exc.body()
        except Exception as exc:  # pragma: no cover - last resort
            log.exception("unhandled error for %s %s", method, target)
            return 500, JSON, ApiError(500, "internal_error", str(exc)).body()

    def _dispatch(self, method: str, target: str, body: bytes) -> tuple[int, str, bytes]:
        parts = urlsplit(target)
        path = parts.path
        params = parse_qs(parts.query, keep_blank_values=False)
        route = (method, path)
        if route == ("GET", "/health"):
            return 200, JSON, (dumps({"status": "ok"}) + "\n").encode()
        if route == ("GET", "/measurements"):
            return self._read(self._measurements, params)
        m = re.fullmatch(r"/measurements/([^/]+)/trace", path)
        if m and method == "GET":
            return self._read(self._trace, unquote(m.group(1)))
        if route == ("GET", "/compat"):
            return self._read(self._compat, params)
        if route == ("POST", "/compat/report"):
            return self._read(self._compat_report, self._json(body))
        if route == ("GET", "/validate"):
            return self._read(lambda: (200, JSON, json_body(validate(self.store))))
        if route == ("POST", "/export"):
            return self._read(lambda: (200, TEXT, export_canonical(self.store).encode("utf-8")))
        if route == ("POST", "/ingest"):
            return self._write(self._ingest, self._json(body))
        if route == ("POST", "/add"):
            return self._write(self._add, self._json(body))
        known = {"/health", "/measurements", "/compat", "/compat/report", "/validate",
                 "/export", "/ingest", "/add"}
        if path in known or m:
            raise ApiError(400, "bad_request", f"method {method} not allowed on {path}")
        raise ApiError(404, "not_found", f"no such endpoint: {path}")

    # -- plumbing ------------------------------------------------------------

    @staticmethod
    def _json(body: bytes):
        try:
            return json.loads(body.decode("utf-8") or "null")
        except (UnicodeDecodeError, ValueError) as exc:
            raise ApiError(400, "bad_request", f"request body is not JSON: {exc}") from None

    def _read(self, fn, *args):
        with self.store.lock.read():
            try:
                return fn(*args)
            except NotFound as exc:
                raise ApiError(404, "not_found", str(exc)) from None
            except TraceError as exc:
                raise ApiError(422, "broken_provenance", str(exc)) from None
            except (ConversionError, ValueError) as exc:
                raise ApiError(422, "invalid_filter", str(exc)) from None

    def _write(self, fn, *args):
        try:
            with self.store.lock.write(blocking=False):
                result = fn(*args)
                if self.store_path:
                    self.store.save(self.store_path)
                return result
        except WriteConflict as exc:
            raise ApiError(409, "write_conflict", str(exc)) from None
        except StoreError as exc:
            raise ApiError(500, "internal_error", str(exc)) from None

    # -- handlers ------------------------------------------------------------

    def _measurements(self, params):
        try:
            limit = int(_single(params, "limit") or DEFAULT_LIMIT)
        except ValueError:
            raise ApiError(400, "bad_request", "limit must be an integer") from None
        if limit < 0:
            raise ApiError(400, "bad_request", "limit must be >= 0")
        try:
            f = MeasurementFilter(
                entity=_single(params, "entity"),
                characteristic=_single(params, "characteristic"),
                data_collection=_single(params, "dataCollection"),
                start=_single(params, "from"),
                end=_single(params, "to"),
                unit=_single(params, "unit"),
            )
        except ValueError as exc:
            raise ApiError(422, "invalid_filter", str(exc)) from None
        return 200, JSON, json_body(find_measurements(self.store, f, limit))

    def _trace(self, iri: str):
        return 200, JSON, json_body(trace(self.store, iri))

    def _compat(self, params):
        a, b = _single(params, "a", True), _single(params, "b", True)
        return 200, JSON, json_body(compatibility(self.store, a, b))

    def _compat_report(self, doc):
        if not isinstance(doc, dict) or set(doc) != {"setA", "setB"} \
                or not all(isinstance(doc[k], list) for k in doc):
            raise ApiError(422, "invalid_request", 'body must be {"setA": [...], "setB": [...]}')
        return 200, JSON, json_body(compat_report(self.store, doc["setA"], doc["setB"]))

    def _ingest(self, doc):
        if not isinstance(doc, dict) or set(doc) != {"descriptor", "csv"} \
                or not isinstance(doc["csv"], str):
            raise ApiError(422, "invalid_request", 'body must be {"descriptor": {...}, "csv": "..."}')
        try:
            d = parse_descriptor(doc["descriptor"] if isinstance(doc["descriptor"], (dict, str))
                                 else json.dumps(doc["descriptor"]))
            report = ingest_csv(self.store, doc["csv"], d)
        except (DescriptorError, IngestError) as exc:
            raise ApiError(422, "invalid_descriptor", str(exc)) from None
        return (202 if report.row_errors else 200), JSON, json_body(report)

    def _add(self, doc):
        docs = doc if isinstance(doc, list) else [doc]
        try:
            records = [record_from_json(d) for d in docs]
        except (ModelError, ValueError) as exc:
            raise ApiError(422, "invalid_record", str(exc)) from None
        added = sum(put(self.store, r) for r in records)
        return 200, JSON, (dumps({"records": len(records), "triplesAdded": added}) + "\n").encode()


class _Handler(BaseHTTPRequestHandler):
    service: CatalogService
    protocol_version = "HTTP/1.1"

    def _respond(self, method: str) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else b""
        status, ctype, payload = self.service.handle(method, self.path, body)
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self):  # noqa: N802
        self._respond("GET")

    def do_POST(self):  # noqa: N802
        self._respond("POST")

    def log_message(self, fmt, *args):
        log.info("%s - %s", self.address_string(), fmt % args)


def make_server(store: GraphStore, port: int, bind: str = "127.0.0.1",
                store_path: Optional[str] = None) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {"service": CatalogService(store, store_path)})
    server = ThreadingHTTPServer((bind, port), handler)
    server.daemon_threads = True
    return server


def serve(store: GraphStore, port: int, bind: str = "127.0.0.1",
          store_path: Optional[str] = None) -> None:
    server = make_server(store, port, bind, store_path)
    log.info("serving on http://%s:%d", *server.server_address[:2])
    try:
        server.serve_forever()
    finally:
        server.server_close()


def serve_in_thread(store: GraphStore, port: int = 0, bind: str = "127.0.0.1"):
    """Start a server on a daemon thread; returns (server, base_url)."""
    server = make_server(store, port, bind)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    return server, f"http://{host}:{port}"
