"""Federation engine: executes SERVICE blocks against remote endpoints,
combines bindings locally, and mediates reference-ontology queries into a
union of per-site SERVICE branches.

Cross-site combination happens only here, never at the endpoints: remote
calls fetch full sub-results which are joined/unioned in process. Mediated
queries get one SERVICE branch per active registry site, optionally
extended with a provenance variable naming the originating site.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import requests

from .results_json import read_results_json
from .solutions import (
    bind_rows,
    distinct_rows,
    filter_rows,
    join_rows,
    project_rows,
    slice_rows,
)
from .sparql.algebra import (
    Algebra,
    Bgp,
    Bind,
    Distinct,
    Filter,
    Join,
    Project,
    Service,
    Slice,
    Union,
    Variable,
    contains_service,
    scope_variables,
)
from .sparql.render import render_query
from .terms import Iri, Literal, SolutionMapping, SolutionSequence, solution_key

RESULTS_JSON = "application/sparql-results+json"


class FederationError(RuntimeError):
    pass


class ServiceError(FederationError):
    pass


class MediationError(FederationError):
    pass


@dataclass(frozen=True)
class EndpointDescriptor:
    site_name: str
    service_iri: str
    active: bool = True
    timeout_ms: int = 10_000


@dataclass(frozen=True)
class EndpointRegistry:
    entries: tuple[EndpointDescriptor, ...] = ()

    def __post_init__(self) -> None:
        names = [e.site_name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("duplicate site names in registry")
        for e in self.entries:
            if "://" not in e.service_iri:
                raise ValueError(f"service IRI must be absolute: {e.service_iri}")

    def active_entries(self) -> list[EndpointDescriptor]:
        return [e for e in self.entries if e.active]

    def by_name(self, name: str) -> EndpointDescriptor:
        for e in self.entries:
            if e.site_name == name:
                return e
        raise KeyError(f"no site named {name!r}")

    def by_iri(self, iri: str) -> Optional[EndpointDescriptor]:
        for e in self.entries:
            if e.service_iri == iri:
                return e
        return None


def load_registry(path: str | Path) -> EndpointRegistry:
    """Line-oriented registry: site <TAB> serviceIri <TAB> active <TAB> timeoutMs."""
    entries = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"registry line {lineno}: expected at least site and IRI")
        site, iri = parts[0], parts[1]
        active = parts[2].lower() == "true" if len(parts) > 2 else True
        timeout = int(parts[3]) if len(parts) > 3 else 10_000
        entries.append(EndpointDescriptor(site, iri, active, timeout))
    return EndpointRegistry(tuple(entries))


def save_registry(registry: EndpointRegistry, path: str | Path) -> None:
    lines = ["# site\tservice IRI\tactive\ttimeout ms"]
    for e in registry.entries:
        lines.append(f"{e.site_name}\t{e.service_iri}\t{str(e.active).lower()}\t{e.timeout_ms}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class FederationOptions:
    max_parallel: int = 4
    partial_results: bool = False
    per_service_timeout_ms: int = 10_000
    provenance_variable: Optional[str] = None

    def __post_init__(self) -> None:
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be at least 1")


def _default_post_query(endpoint: str, query: str, timeout_ms: int) -> str:
    response = requests.post(
        endpoint,
        data={"query": query},
        headers={"Accept": RESULTS_JSON},
        timeout=timeout_ms / 1000.0,
    )
    if response.status_code != 200:
        raise ServiceError(
            f"{endpoint} answered {response.status_code}: {response.text[:200].strip()}"
        )
    return response.text

# test seam: monkeypatched to observe concurrency or fake remote endpoints
_post_query = _default_post_query


def service_query_text(body: Algebra) -> str:
    """The sub-query transmitted for a SERVICE body (SELECT * keeps all vars)."""
    return render_query(Project((), body))


def evaluate_service(
    node: Service,
    registry: EndpointRegistry,
    opts: FederationOptions = FederationOptions(),
    warnings: Optional[list[str]] = None,
) -> SolutionSequence:
    """POST the rendered body to the endpoint and read back the bindings.

    Failures raise unless the SERVICE is SILENT or partial results are on,
    in which case the empty sequence is returned and a warning recorded.
    """
    if isinstance(node.endpoint, Variable):
        raise FederationError("variable SERVICE endpoints are not supported")
    entry = registry.by_iri(node.endpoint.value)
    timeout = entry.timeout_ms if entry else opts.per_service_timeout_ms
    query = service_query_text(node.child)
    try:
        payload = _post_query(node.endpoint.value, query, timeout)
        seq = read_results_json(payload)
    except (requests.RequestException, ValueError, ServiceError) as exc:
        if node.silent or opts.partial_results:
            site = entry.site_name if entry else node.endpoint.value
            if warnings is not None:
                warnings.append(f"{site}: {exc}")
            return SolutionSequence(scope_variables(node.child), [])
        raise ServiceError(f"SERVICE {node.endpoint.value} failed: {exc}") from exc
    return seq


class _BoundedGate:
    """Counts concurrent entries so tests can observe the parallelism bound."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.current = 0
        self.peak = 0

    def __enter__(self):
        with self._lock:
            self.current += 1
            self.peak = max(self.peak, self.current)
        return self

    def __exit__(self, *exc):
        with self._lock:
            self.current -= 1
        return False


def evaluate_federated(
    a: Algebra,
    registry: EndpointRegistry,
    opts: FederationOptions = FederationOptions(),
    warnings: Optional[list[str]] = None,
) -> SolutionSequence:
    """Evaluate a query whose remote parts are SERVICE nodes.

    Service leaves run concurrently (at most max_parallel in flight, in
    registry submission order for deterministic union order); joins,
    filters, binds and slicing happen locally. Local BGPs evaluate against
    the gateway's empty local graph: only the empty pattern has a solution.
    The final sequence is sorted by the first projected variable for
    stable output.
    """
    services: list[Service] = []

    def collect(node) -> None:
        if isinstance(node, Service):
            services.append(node)
        elif isinstance(node, (Filter, Bind, Project, Distinct, Slice)):
            collect(node.child)
        elif isinstance(node, (Join, Union)):
            collect(node.left)
            collect(node.right)

    collect(a)
    buffered: dict[int, list[SolutionMapping]] = {}
    if services:
        gate = _BoundedGate()

        def run(node: Service) -> list[SolutionMapping]:
            with gate:
                return evaluate_service(node, registry, opts, warnings).rows

        with ThreadPoolExecutor(max_workers=opts.max_parallel) as pool:
            futures = [(id(node), pool.submit(run, node)) for node in services]
            for node_id, future in futures:
                buffered[node_id] = future.result()
        if gate.peak > opts.max_parallel:
            raise FederationError("parallelism bound exceeded")

    def walk(node) -> list[SolutionMapping]:
        if isinstance(node, Service):
            return list(buffered[id(node)])
        if isinstance(node, Bgp):
            return [{}] if not node.patterns else []
        if isinstance(node, Filter):
            return filter_rows(node.expr, walk(node.child))
        if isinstance(node, Join):
            return join_rows(walk(node.left), walk(node.right))
        if isinstance(node, Union):
            return walk(node.left) + walk(node.right)
        if isinstance(node, Bind):
            return bind_rows(node.var.name, node.value, walk(node.child))
        if isinstance(node, Project):
            return project_rows(node.variables, walk(node.child))
        if isinstance(node, Distinct):
            return distinct_rows(walk(node.child))
        if isinstance(node, Slice):
            return slice_rows(walk(node.child), node.limit, node.offset)
        raise FederationError(f"cannot evaluate node {type(node).__name__}")

    rows = walk(a)
    variables = _result_variables(a)
    if variables:
        first = variables[0]
        rows.sort(key=lambda r: (first not in r, solution_key({first: r[first]}) if first in r else ()))
    return SolutionSequence(variables, rows)


def _result_variables(a: Algebra) -> list[str]:
    node = a
    if isinstance(node, Slice):
        node = node.child
    if isinstance(node, Distinct):
        node = node.child
    if isinstance(node, Project):
        return list(node.variables)
    return scope_variables(a)


def mediate(
    q: Algebra,
    registry: EndpointRegistry,
    opts: FederationOptions = FederationOptions(),
) -> Algebra:
    """Rewrite a reference-ontology query into a union of per-site SERVICE
    branches over the same group pattern.

    With a provenance variable set, each branch binds it to the site name,
    and the projection grows by that variable.
    """
    if contains_service(q):
        raise MediationError("query to mediate must not contain SERVICE")
    active = registry.active_entries()
    if not active:
        raise MediationError("no active sites")

    node = q
    slice_node: Optional[Slice] = None
    if isinstance(node, Slice):
        slice_node = node
        node = node.child
    distinct = isinstance(node, Distinct)
    if distinct:
        node = node.child
    if not isinstance(node, Project):
        raise MediationError("mediation expects a SELECT algebra tree")
    body = node.child
    variables = list(node.variables)

    prov = opts.provenance_variable
    if prov:
        taken = set(variables) | set(scope_variables(body))
        while prov in taken:
            prov += "_"
        variables = variables + [prov]

    branches: list[Algebra] = []
    for entry in active:
        branch: Algebra = Service(Iri(entry.service_iri), body, silent=opts.partial_results)
        if prov:
            branch = Bind(Variable(prov), Literal(entry.site_name), branch)
        branches.append(branch)
    unioned = branches[0]
    for branch in branches[1:]:
        unioned = Union(unioned, branch)

    tree: Algebra = Project(tuple(variables), unioned)
    if distinct:
        tree = Distinct(tree)
    if slice_node is not None:
        tree = Slice(slice_node.limit, slice_node.offset, tree)
    return tree


def query_site(
    registry: EndpointRegistry,
    site_name: str,
    query: str,
    opts: FederationOptions = FederationOptions(),
) -> str:
    """Pass a query through to one site's endpoint; returns raw results JSON."""
    entry = registry.by_name(site_name)
    if not entry.active:
        raise FederationError(f"site {site_name!r} is inactive")
    return _post_query(entry.service_iri, query, entry.timeout_ms or opts.per_service_timeout_ms)
