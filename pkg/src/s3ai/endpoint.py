"""HTTP SPARQL-protocol endpoint with linked-data dereferencing.

One endpoint serves one mapped database: GET/POST /sparql evaluates
queries through the virtual engine, /resource/... dereferences subject
IRIs to Turtle (or a minimal HTML property table), /all lists resources
page by page, and / is a landing page pointing at the three access modes.
Multiple endpoint instances on different ports are fully independent.
"""

from __future__ import annotations

import html
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlsplit

from .mapping import MappingDocument, load_mapping
from .relational import ConnectionSpec, StoreError, probe
from .results_json import write_results_json
from .sparql import SparqlSyntaxError, UnsupportedFeatureError, parse_query
from .terms import Graph, Iri, Literal, RDF_TYPE, Triple
from .turtle import abbreviate, serialize_turtle
from .virtual import (
    EvalOptions,
    ResourceNotFound,
    describe,
    evaluate,
    list_subjects,
)

RESULTS_JSON = "application/sparql-results+json"
TURTLE = "text/turtle"
HTML = "text/html"


class EndpointStartupError(RuntimeError):
    pass


@dataclass(frozen=True)
class EndpointConfig:
    base_iri: str
    port: int
    mapping_path: str
    connection: Optional[ConnectionSpec] = None  # overrides the mapping's DSN
    timeout_ms: int = 10_000
    enable_html: bool = True
    page_size: int = 100
    host: str = "0.0.0.0"

    def __post_init__(self) -> None:
        # 0 asks the OS for a free port (tests); real deployments use 1..65535
        if not 0 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port}")
        if not self.base_iri.endswith("/"):
            raise ValueError("base IRI must end with '/'")


@dataclass
class EndpointState:
    config: EndpointConfig
    doc: MappingDocument
    conn: ConnectionSpec
    options: EvalOptions
    draining: bool = field(default=False)


def _accepts(header: str, offered: str) -> bool:
    for part in header.split(","):
        media = part.split(";")[0].strip().lower()
        if media in (offered, "*/*") or (
            media.endswith("/*") and offered.startswith(media[:-1])
        ):
            return True
    return False


def _prefers_html(header: str) -> bool:
    # first listed acceptable type wins; browsers put text/html first
    for part in header.split(","):
        media = part.split(";")[0].strip().lower()
        if media == HTML:
            return True
        if media in (TURTLE, RESULTS_JSON, "*/*"):
            return False
    return False


class _Handler(BaseHTTPRequestHandler):
    state: EndpointState  # set on the subclass
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet; the CLI prints a startup line
        pass

    # --- plumbing -------------------------------------------------------

    def _send(self, status: int, content_type: str, body: str | bytes,
              extra_headers: dict[str, str] | None = None) -> None:
        data = body.encode("utf-8") if isinstance(body, str) else body
        self.send_response(status)
        self.send_header("Content-Type", content_type + "; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        for key, value in (extra_headers or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status: int, message: str) -> None:
        self._send(status, "text/plain", message + "\n")

    # --- routing ---------------------------------------------------------

    def do_GET(self) -> None:
        if self.state.draining:
            self._error(503, "endpoint is shutting down")
            return
        url = urlsplit(self.path)
        if url.path == "/sparql":
            params = parse_qs(url.query)
            query = params.get("query", [None])[0]
            if query is None:
                self._error(400, "missing 'query' parameter")
                return
            self._answer_query(query)
        elif url.path.startswith("/resource/"):
            self._dereference(url.path)
        elif url.path == "/all":
            params = parse_qs(url.query)
            try:
                page = max(1, int(params.get("page", ["1"])[0]))
            except ValueError:
                self._error(400, "page must be an integer")
                return
            self._all(page)
        elif url.path == "/":
            self._landing()
        else:
            self._error(404, f"no such path: {url.path}")

    def do_POST(self) -> None:
        if self.state.draining:
            self._error(503, "endpoint is shutting down")
            return
        url = urlsplit(self.path)
        if url.path != "/sparql":
            self._error(404, f"no such path: {url.path}")
            return
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length).decode("utf-8")
        content_type = (self.headers.get("Content-Type") or "").split(";")[0].strip()
        if content_type == "application/sparql-query":
            query = body
        elif content_type in ("application/x-www-form-urlencoded", ""):
            query = parse_qs(body).get("query", [None])[0]
        else:
            self._error(415, f"unsupported media type {content_type}")
            return
        if not query:
            self._error(400, "missing 'query' parameter")
            return
        self._answer_query(query)

    # --- operations --------------------------------------------------------

    def _answer_query(self, query: str) -> None:
        state = self.state
        try:
            ast = parse_query(query)
        except (SparqlSyntaxError, UnsupportedFeatureError) as exc:
            self._error(400, f"query rejected: {exc}")
            return
        try:
            seq = evaluate(ast, state.doc, state.conn, state.options)
        except UnsupportedFeatureError as exc:
            self._error(400, f"query rejected: {exc}")
            return
        except StoreError as exc:
            self._error(500, f"store failure: {exc}")
            return
        self._send(200, RESULTS_JSON, write_results_json(seq))

    def _dereference(self, raw_path: str) -> None:
        state = self.state
        accept = self.headers.get("Accept", "*/*")
        wants_html = state.config.enable_html and _prefers_html(accept)
        if not wants_html and not _accepts(accept, TURTLE):
            self._error(406, f"cannot satisfy Accept: {accept}")
            return
        iri = state.config.base_iri.rstrip("/") + raw_path
        try:
            graph = describe(Iri(iri), state.doc, state.conn, state.options)
        except ResourceNotFound:
            self._error(404, f"no resource pattern matches {iri}")
            return
        except StoreError as exc:
            self._error(500, f"store failure: {exc}")
            return
        if len(graph) == 0:
            self._error(404, f"no data about {iri}")
            return
        if wants_html:
            self._send(200, HTML, _resource_page(iri, graph))
        else:
            self._send(200, TURTLE, serialize_turtle(graph))

    def _all(self, page: int) -> None:
        state = self.state
        try:
            subjects = list_subjects(state.doc, state.conn, state.options)
        except StoreError as exc:
            self._error(500, f"store failure: {exc}")
            return
        size = state.config.page_size
        window = subjects[(page - 1) * size : page * size]
        triples = [Triple(s, Iri(RDF_TYPE), cls) for s, cls in window]
        body = serialize_turtle(Graph(triples, {"vocab": state.doc.vocab}))
        if page * size < len(subjects):
            body += f"# next: /all?page={page + 1}\n"
        self._send(200, TURTLE, body)

    def _landing(self) -> None:
        state = self.state
        base = state.config.base_iri
        if not state.config.enable_html:
            self._send(200, "text/plain", (
                f"SPARQL endpoint: {base}sparql\n"
                f"RDF entry point: {base}all\n"
            ))
            return
        page = f"""<!DOCTYPE html>
<html><head><title>Virtual RDF server</title></head>
<body>
<h1>Virtual RDF server</h1>
<p>This server publishes a relational database as a virtual, read-only RDF graph.</p>
<ol>
<li><b>HTML view:</b> browse <a href="/all">the resource index</a> and follow resource links.</li>
<li><b>RDF view:</b> open the entry point <a href="{base}all">{base}all</a> in a Semantic Web browser.</li>
<li><b>SPARQL endpoint:</b> query the database at <a href="{base}sparql">{base}sparql</a>.</li>
</ol>
</body></html>
"""
        self._send(200, HTML, page)


def _resource_page(iri: str, graph) -> str:
    prefixes = graph.prefixes
    rows = []
    pairs = sorted(
        ((t.predicate, t.object) for t in graph),
        key=lambda po: (po[0].value != RDF_TYPE, po[0].value, str(po[1])),
    )
    for predicate, obj in pairs:
        pred_text = abbreviate(predicate.value, prefixes) or predicate.value
        if isinstance(obj, Literal):
            if obj.datatype.endswith("#string"):
                value = html.escape(obj.lexical)
            else:
                short = abbreviate(obj.datatype, prefixes) or obj.datatype
                value = f"{html.escape(obj.lexical)} ({html.escape(short)})"
        elif isinstance(obj, Iri):
            value = f'<a href="{html.escape(obj.value)}">{html.escape(obj.value)}</a>'
        else:
            value = html.escape(str(obj))
        rows.append(
            f"<tr><td><code>{html.escape(pred_text)}</code></td><td>{value}</td></tr>"
        )
    return (
        "<!DOCTYPE html>\n<html><head><title>Description of "
        + html.escape(iri)
        + "</title></head>\n<body>\n<h1>Description of "
        + html.escape(iri)
        + "</h1>\n<table border=\"1\">\n<tr><th>Property</th><th>Value</th></tr>\n"
        + "\n".join(rows)
        + "\n</table>\n</body></html>\n"
    )


class EndpointHandle:
    def __init__(self, server: ThreadingHTTPServer, thread: threading.Thread,
                 state: EndpointState) -> None:
        self._server = server
        self._thread = thread
        self.state = state

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def stop(self) -> None:
        """Refuse new work, then drain in-flight requests before closing."""
        self.state.draining = True
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=10)


def serve(cfg: EndpointConfig) -> EndpointHandle:
    """Start an endpoint; raises EndpointStartupError with a diagnostic when
    the port is taken, the mapping is invalid, or the store is unreachable."""
    try:
        doc, conn = load_mapping(Path(cfg.mapping_path), base_iri=cfg.base_iri)
    except (OSError, ValueError) as exc:
        raise EndpointStartupError(f"cannot load mapping: {exc}") from exc
    if cfg.connection is not None:
        conn = cfg.connection
    try:
        probe(conn, cfg.timeout_ms)
    except StoreError as exc:
        raise EndpointStartupError(f"store unreachable: {exc}") from exc
    state = EndpointState(cfg, doc, conn, EvalOptions(timeout_ms=cfg.timeout_ms))
    handler = type("BoundHandler", (_Handler,), {"state": state})
    try:
        server = ThreadingHTTPServer((cfg.host, cfg.port), handler)
    except OSError as exc:
        raise EndpointStartupError(f"cannot bind port {cfg.port}: {exc}") from exc
    thread = threading.Thread(target=server.serve_forever, name=f"endpoint-{cfg.port}")
    thread.start()
    return EndpointHandle(server, thread, state)
