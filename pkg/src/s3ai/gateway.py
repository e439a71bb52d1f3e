"""Federation gateway: the single HTTP surface the query console talks to.

API: GET /api/endpoints lists the registered sites, GET /api/examples
serves the predefined query manifest, POST /api/query runs a query in
"site" (pass-through), "federated" (explicit SERVICE blocks) or
"mediated" (reference-ontology query fanned out to every active site)
mode. Optionally serves a static directory at / for the browser console.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .demo import NO_VIDEO_QUERY, NO_VIDEO_SOLUTIONS_QUERY
from .federate import (
    EndpointRegistry,
    FederationError,
    FederationOptions,
    MediationError,
    ServiceError,
    evaluate_federated,
    load_registry,
    mediate,
    query_site,
)
from .results_json import write_results_json
from .sparql import SparqlSyntaxError, UnsupportedFeatureError, parse_query

RESULTS_JSON = "application/sparql-results+json"

DEFAULT_PORT = 3030
PROVENANCE_VARIABLE = "site"

DEFAULT_EXAMPLES = (
    {
        "name": "No Video tickets (all sites)",
        "mode": "mediated",
        "query": NO_VIDEO_QUERY,
    },
    {
        "name": "Solutions for No Video tickets (all sites)",
        "mode": "mediated",
        "query": NO_VIDEO_SOLUTIONS_QUERY,
    },
    {
        "name": "All tickets of one site",
        "mode": "site",
        "query": (
            "PREFIX hdo: <http://www.samos.gr/ontologies/helpdeskOnto.owl#>\n"
            "SELECT ?t ?title WHERE { ?t a hdo:ItSupportTicket ; hdo:ticketTitle ?title }"
        ),
    },
)


class GatewayStartupError(RuntimeError):
    pass


@dataclass(frozen=True)
class GatewayConfig:
    registry_path: str
    port: int = DEFAULT_PORT
    host: str = "0.0.0.0"
    static_dir: Optional[str] = None
    examples_path: Optional[str] = None
    options: FederationOptions = field(default_factory=FederationOptions)


@dataclass
class GatewayState:
    config: GatewayConfig
    registry: EndpointRegistry
    examples: list[dict]
    draining: bool = False


class _GatewayHandler(BaseHTTPRequestHandler):
    state: GatewayState
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        pass

    def _send(self, status: int, content_type: str, body: str | bytes) -> None:
        data = body.encode("utf-8") if isinstance(body, str) else body
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _json(self, status: int, payload) -> None:
        self._send(status, "application/json", json.dumps(payload, indent=2))

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        if self.state.draining:
            self._json(503, {"error": "gateway is shutting down"})
            return
        if self.path == "/api/endpoints":
            self._json(200, [
                {
                    "siteName": e.site_name,
                    "serviceIri": e.service_iri,
                    "active": e.active,
                    "timeoutMs": e.timeout_ms,
                }
                for e in self.state.registry.entries
            ])
            return
        if self.path == "/api/examples":
            self._json(200, self.state.examples)
            return
        self._static(self.path)

    def _static(self, raw_path: str) -> None:
        root = self.state.config.static_dir
        if root is None:
            self._json(404, {"error": f"no such path: {raw_path}"})
            return
        rel = raw_path.split("?")[0].lstrip("/") or "index.html"
        target = (Path(root) / rel).resolve()
        if not str(target).startswith(str(Path(root).resolve())) or not target.is_file():
            self._json(404, {"error": f"no such file: {rel}"})
            return
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._send(200, content_type, target.read_bytes())

    def do_POST(self) -> None:
        if self.state.draining:
            self._json(503, {"error": "gateway is shutting down"})
            return
        if self.path != "/api/query":
            self._json(404, {"error": f"no such path: {self.path}"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        try:
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            self._json(400, {"error": f"invalid JSON body: {exc}"})
            return
        mode = payload.get("mode")
        query = payload.get("query", "")
        if mode not in ("site", "federated", "mediated"):
            self._json(400, {"error": "mode must be site, federated or mediated"})
            return
        if not isinstance(query, str) or not query.strip():
            self._json(400, {"error": "missing query text"})
            return
        try:
            self._run_query(mode, payload.get("site"), query)
        except (SparqlSyntaxError, UnsupportedFeatureError) as exc:
            self._json(400, {"error": f"query rejected: {exc}"})
        except (MediationError, KeyError) as exc:
            self._json(400, {"error": str(exc)})
        except (ServiceError, FederationError) as exc:
            self._json(502, {"error": str(exc)})

    def _run_query(self, mode: str, site: Optional[str], query: str) -> None:
        state = self.state
        opts = state.config.options
        if mode == "site":
            if not site:
                self._json(400, {"error": "site mode needs a 'site' name"})
                return
            body = query_site(state.registry, site, query, opts)
            self._send(200, RESULTS_JSON, body)
            return
        warnings: list[str] = []
        ast = parse_query(query)
        if mode == "mediated":
            mediated_opts = FederationOptions(
                max_parallel=opts.max_parallel,
                partial_results=True,
                per_service_timeout_ms=opts.per_service_timeout_ms,
                provenance_variable=PROVENANCE_VARIABLE,
            )
            ast = mediate(ast, state.registry, mediated_opts)
            seq = evaluate_federated(ast, state.registry, mediated_opts, warnings)
        else:
            seq = evaluate_federated(ast, state.registry, opts, warnings)
        doc = json.loads(write_results_json(seq))
        if warnings:
            doc["warnings"] = warnings
        self._send(200, RESULTS_JSON, json.dumps(doc, sort_keys=True))


class GatewayHandle:
    def __init__(self, server: ThreadingHTTPServer, thread: threading.Thread,
                 state: GatewayState) -> None:
        self._server = server
        self._thread = thread
        self.state = state

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def stop(self) -> None:
        self.state.draining = True
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=10)


def load_examples(path: Optional[str]) -> list[dict]:
    if path is None:
        return [dict(e) for e in DEFAULT_EXAMPLES]
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise GatewayStartupError("examples file must hold a JSON array")
    return data


def serve_gateway(cfg: GatewayConfig) -> GatewayHandle:
    try:
        registry = load_registry(cfg.registry_path)
        examples = load_examples(cfg.examples_path)
    except (OSError, ValueError) as exc:
        raise GatewayStartupError(f"cannot start gateway: {exc}") from exc
    state = GatewayState(cfg, registry, examples)
    handler = type("BoundGatewayHandler", (_GatewayHandler,), {"state": state})
    try:
        server = ThreadingHTTPServer((cfg.host, cfg.port), handler)
    except OSError as exc:
        raise GatewayStartupError(f"cannot bind port {cfg.port}: {exc}") from exc
    thread = threading.Thread(target=server.serve_forever, name=f"gateway-{cfg.port}")
    thread.start()
    return GatewayHandle(server, thread, state)
