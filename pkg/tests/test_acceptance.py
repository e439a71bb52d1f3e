"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest tests/test_acceptance.py -v -s`).

The virtual engine is held to the independent in-memory evaluator over
the fully materialized graphs; golden files, the live HTTP surface, the
federation demo, the read-only audit and the scalability fits are all
checked at their stated tolerances.
"""

from __future__ import annotations

import json
import random
import sqlite3
import sys
import time
from collections import Counter
from contextlib import contextmanager
from pathlib import Path

import pytest
import requests
from jsonschema import validate as js_validate

from oracle import QuerySampler, multiset, ref_evaluate
from s3ai.cli import run as cli_run
from s3ai.demo import FixtureSpec, build_fixtures
from s3ai.endpoint import EndpointConfig, serve
from s3ai.federate import (
    EndpointDescriptor,
    EndpointRegistry,
    FederationOptions,
    evaluate_federated,
    mediate,
)
from s3ai.bench import run_bench
from s3ai.mapping import load_mapping
from s3ai.relational import STATEMENT_LOG, SQL_LOG_ENV
from s3ai.results_json import read_results_json
from s3ai.sparql import parse_query
from s3ai.terms import Iri, Literal, XSD_INTEGER
from s3ai.turtle import parse_turtle
from s3ai.virtual import evaluate, materialize

import os

HDO = "http://www.samos.gr/ontologies/helpdeskOnto.owl#"

NO_VIDEO = (
    f"PREFIX hdo: <{HDO}>\n"
    "SELECT ?t ?title WHERE { ?t a hdo:ItSupportTicket ; hdo:ticketTitle ?title ."
    ' FILTER regex(?title, "No Video") }'
)


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"FAIL [{name}]", file=sys.stderr)
        raise
    print(f"PASS [{name}]", file=sys.stderr)


def _start_demo_endpoints(demo_fixtures):
    os_handle = serve(EndpointConfig(
        base_iri="http://localhost:2020/", port=0,
        mapping_path=str(demo_fixtures.os_mapping_aligned), host="127.0.0.1",
    ))
    glpi_handle = serve(EndpointConfig(
        base_iri="http://localhost:2021/", port=0,
        mapping_path=str(demo_fixtures.glpi_mapping_aligned), host="127.0.0.1",
    ))
    registry = EndpointRegistry((
        EndpointDescriptor("samos", f"http://127.0.0.1:{os_handle.port}/sparql"),
        EndpointDescriptor("ikaria", f"http://127.0.0.1:{glpi_handle.port}/sparql"),
    ))
    return os_handle, glpi_handle, registry


def test_oracle_equivalence_100_queries_per_site(demo_fixtures, os_site, glpi_site):
    with criterion("oracle equivalence: 100 randomized queries per site, multiset-exact"):
        started = time.monotonic()
        for label, (doc, conn), seed in (
            ("osticket", os_site, 84192), ("glpi", glpi_site, 84193),
        ):
            graph = materialize(doc, conn)
            sampler = QuerySampler(doc, graph, random.Random(seed))
            for i in range(100):
                query = sampler.query()
                got = multiset(evaluate(query, doc, conn))
                want = multiset(ref_evaluate(query, graph))
                assert got == want, f"{label} query #{i} diverged"
        elapsed = time.monotonic() - started
        assert elapsed < 300, f"took {elapsed:.0f}s, budget is 5 minutes"


def test_mapping_generation_reproduces_golden_file(demo_fixtures, tmp_path, monkeypatch):
    with criterion("mapping generation: canonical serialization matches the golden file byte-for-byte"):
        monkeypatch.chdir(demo_fixtures.root)
        out = tmp_path / "mappingOSTicket.ttl"
        assert cli_run([
            "generate-mapping", "-o", str(out), "-u", "xxxxxx", "-p", "xxxxxx",
            "sqlite:osticket.db",
        ]) == 0
        golden = Path(__file__).parent / "golden" / "mappingOSTicket.golden.ttl"
        generated = out.read_bytes()
        assert generated == golden.read_bytes(), "byte mismatch against golden file"
        text = generated.decode()
        lines = text.splitlines()
        assert lines[0:3] == [
            "@prefix map: <#> .", "@prefix db: <> .", "@prefix vocab: <vocab/> .",
        ]
        assert 'd2rq:username "XXXXXXXX";' in text
        assert 'd2rq:password "XXXXX";' in text
        assert 'd2rq:uriPattern "ost_ticket/@@ost_ticket.ticket_id@@";' in text
        assert "d2rq:class vocab:ost_ticket;" in text


def test_alignment_rewrite_matches_updated_structure(demo_fixtures, tmp_path):
    with criterion("alignment rewrite: class becomes hdo:ItSupportTicket, triple count unchanged"):
        out = tmp_path / "aligned.ttl"
        assert cli_run([
            "align", "apply",
            "-m", str(demo_fixtures.os_mapping),
            "-a", str(demo_fixtures.os_alignment),
            "-O", str(demo_fixtures.ontology),
            "-o", str(out),
        ]) == 0
        text = out.read_text()
        assert "d2rq:class hdo:ItSupportTicket;" in text
        assert f"@prefix hdo: <{HDO}> ." in text
        doc_before, conn = load_mapping(demo_fixtures.os_mapping)
        doc_after, _ = load_mapping(out)
        assert len(materialize(doc_after, conn)) == len(materialize(doc_before, conn))


def test_dereferencing_ticket_1149(demo_fixtures):
    with criterion("dereferencing: /resource/ost_ticket/1149 serves its description, absent keys 404"):
        handle, glpi_handle, _registry = _start_demo_endpoints(demo_fixtures)
        try:
            url = f"http://127.0.0.1:{handle.port}"
            r = requests.get(url + "/resource/ost_ticket/1149",
                             headers={"Accept": "text/turtle"})
            assert r.status_code == 200
            g = parse_turtle(r.text)
            pairs = {(t.predicate.value, t.object) for t in g}
            assert (HDO + "ticketId", Literal("1149", XSD_INTEGER)) in pairs
            assert (HDO + "ticketTitle", Literal('"No Video" error')) in pairs
            assert any(
                p == "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
                and o == Iri(HDO + "ItSupportTicket")
                for p, o in pairs
            )
            assert requests.get(url + "/resource/ost_ticket/424242424").status_code == 404
        finally:
            handle.stop()
            glpi_handle.stop()


def test_federated_demo_query(demo_fixtures, os_site_aligned, glpi_site_aligned_2021):
    with criterion("federation demo: mediated query answers from both sites, exactly the union of direct answers"):
        os_handle, glpi_handle, registry = _start_demo_endpoints(demo_fixtures)
        try:
            opts = FederationOptions(provenance_variable="site")
            mediated = evaluate_federated(
                mediate(parse_query(NO_VIDEO), registry, opts), registry, opts
            )
            per_site = Counter(row["site"].lexical for row in mediated.rows)
            assert per_site["samos"] >= 1 and per_site["ikaria"] >= 1
            expected = Counter()
            for doc, conn in (os_site_aligned, glpi_site_aligned_2021):
                expected += multiset(evaluate(parse_query(NO_VIDEO), doc, conn))
            assert multiset(mediated.drop_variable("site")) == expected
        finally:
            os_handle.stop()
            glpi_handle.stop()


def test_scalability_linearity(tmp_path):
    with criterion("scalability: memory and latency grow linearly in the site count (R^2 >= 0.9)"):
        started = time.monotonic()
        report = run_bench(
            [1, 2, 4, 8],
            triples_per_site=84_192,
            scale=10,  # 8,419 triples per site, the documented reduced size
            repetitions=5,
            dest=tmp_path / "bench",
        )
        print(report.table(), file=sys.stderr)
        memory = report.fits["memory_vs_sites"]
        latency = report.fits["latency_vs_sites"]
        assert memory is not None and latency is not None
        assert memory.slope > 0, "memory must grow with the site count"
        assert latency.slope > 0, "latency must grow with the site count"
        assert memory.r_squared >= 0.9, f"memory fit R^2={memory.r_squared:.3f}"
        assert latency.r_squared >= 0.9, f"latency fit R^2={latency.r_squared:.3f}"
        assert time.monotonic() - started < 1200, "harness exceeded its 20 minute budget"


def test_read_only_guarantee_so_far():
    with criterion("read-only guarantee: the statement log holds only SELECT statements"):
        statements = STATEMENT_LOG.statements()
        assert statements, "the suite must have executed queries by now"
        offenders = [s for s in statements if not s.lstrip().upper().startswith("SELECT")]
        assert offenders == [], f"non-SELECT statements executed: {offenders[:3]}"
        log_path = os.environ.get(SQL_LOG_ENV)
        if log_path and Path(log_path).exists():
            lines = Path(log_path).read_text().splitlines()
            bad = [s for s in lines if not s.lstrip().upper().startswith("SELECT")]
            assert bad == [], f"non-SELECT statements in the cross-process log: {bad[:3]}"


def test_liveness_out_of_band_inserts(tmp_path):
    with criterion("liveness: out-of-band inserts are visible to the very next query, 10 times"):
        fixtures = build_fixtures(tmp_path / "live", FixtureSpec(seed=3))
        handle = serve(EndpointConfig(
            base_iri="http://localhost:2020/", port=0,
            mapping_path=str(fixtures.os_mapping_aligned), host="127.0.0.1",
        ))
        url = f"http://127.0.0.1:{handle.port}"
        writer = sqlite3.connect(fixtures.os_db)  # the original application
        rng = random.Random(10)
        try:
            for i in range(10):
                ticket_id = 5000 + rng.randint(0, 99) * 10 + i
                writer.execute(
                    "INSERT INTO ost_ticket (ticket_id, title, status) VALUES (?, ?, ?)",
                    (ticket_id, f"hot insert {i}", "open"),
                )
                writer.commit()
                query = (
                    f"PREFIX hdo: <{HDO}>\n"
                    f"SELECT ?t WHERE {{ ?t hdo:ticketId {ticket_id} }}"
                )
                r = requests.get(url + "/sparql", params={"query": query})
                assert r.status_code == 200
                rows = read_results_json(r.text).rows
                assert len(rows) == 1, f"insert #{i} not visible immediately"
                assert rows[0]["t"].value.endswith(f"ost_ticket/{ticket_id}")
        finally:
            writer.close()
            handle.stop()


RESULTS_SCHEMA = {
    "type": "object",
    "required": ["head", "results"],
    "properties": {
        "head": {
            "type": "object",
            "required": ["vars"],
            "properties": {"vars": {"type": "array", "items": {"type": "string"}}},
        },
        "results": {
            "type": "object",
            "required": ["bindings"],
            "properties": {
                "bindings": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "object",
                            "required": ["type", "value"],
                            "properties": {
                                "type": {"enum": ["uri", "literal", "bnode"]},
                                "value": {"type": "string"},
                                "datatype": {"type": "string"},
                                "xml:lang": {"type": "string"},
                            },
                        },
                    },
                }
            },
        },
    },
}

GOLDEN_QUERIES = [
    "SELECT * WHERE {}",
    NO_VIDEO,
    (f"PREFIX hdo: <{HDO}>\n"
     "SELECT DISTINCT ?status WHERE { ?t hdo:ticketStatus ?status }"),
    (f"PREFIX hdo: <{HDO}>\n"
     "SELECT ?t ?id WHERE { ?t hdo:ticketId ?id . FILTER (?id >= 1149) } LIMIT 5"),
    (f"PREFIX hdo: <{HDO}>\n"
     "SELECT ?t ?title WHERE { { ?t hdo:ticketTitle ?title } UNION "
     "{ ?t hdo:ticketStatus ?title } } OFFSET 2"),
]


def test_protocol_conformance(demo_fixtures):
    with criterion("protocol conformance: golden query responses validate, malformed queries get 400 with position"):
        handle, glpi_handle, _ = _start_demo_endpoints(demo_fixtures)
        try:
            url = f"http://127.0.0.1:{handle.port}"
            for query in GOLDEN_QUERIES:
                r = requests.get(url + "/sparql", params={"query": query})
                assert r.status_code == 200, f"query failed: {query}"
                assert r.headers["Content-Type"].startswith(
                    "application/sparql-results+json"
                )
                js_validate(json.loads(r.text), RESULTS_SCHEMA)
            bad = requests.get(url + "/sparql", params={"query": "SELECT ?x WHERE { nope"})
            assert bad.status_code == 400
            assert "line" in bad.text and "column" in bad.text
        finally:
            handle.stop()
            glpi_handle.stop()
