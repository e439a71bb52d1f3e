from __future__ import annotations

import json
import subprocess
import sys
import time
from pathlib import Path

import pytest
import requests

from oracle import multiset, ref_evaluate
from s3ai.cli import run
from s3ai.federate import EndpointDescriptor, EndpointRegistry, save_registry
from s3ai.endpoint import EndpointConfig, serve
from s3ai.results_json import read_results_json
from s3ai.sparql import parse_query
from s3ai.turtle import parse_turtle

HDO = "http://www.samos.gr/ontologies/helpdeskOnto.owl#"


def test_unknown_subcommand_is_usage_error(capsys):
    assert run(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert run(["dump", "--frob", "x.ttl"]) == 1


def test_generate_mapping_writes_structural_fig(demo_fixtures, tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(demo_fixtures.root)
    out = tmp_path / "m.ttl"
    code = run([
        "generate-mapping", "-o", str(out), "-u", "user-secret", "-p", "pass-secret",
        "sqlite:osticket.db",
    ])
    assert code == 0
    text = out.read_text()
    assert text.startswith("@prefix map: <#> .\n@prefix db: <> .\n@prefix vocab: <vocab/> .\n")
    assert 'd2rq:uriPattern "ost_ticket/@@ost_ticket.ticket_id@@";' in text
    assert "d2rq:class vocab:ost_ticket;" in text
    assert 'd2rq:username "XXXXXXXX";' in text and 'd2rq:password "XXXXX";' in text
    captured = capsys.readouterr()
    for stream in (captured.out, captured.err, text):
        assert "pass-secret" not in stream
        assert "user-secret" not in stream


def test_generate_mapping_runtime_failure_is_exit_2(tmp_path, capsys):
    code = run(["generate-mapping", "-o", str(tmp_path / "x.ttl"),
                "-u", "", "-p", "", f"sqlite:{tmp_path}/gone.db"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_env_credentials_override(demo_fixtures, tmp_path, monkeypatch):
    monkeypatch.chdir(demo_fixtures.root)
    monkeypatch.setenv("S3AI_DB_USER", "envuser")
    monkeypatch.setenv("S3AI_DB_PASS", "envpass")
    out = tmp_path / "m.ttl"
    assert run(["generate-mapping", "-o", str(out), "--unmasked",
                "sqlite:osticket.db"]) == 0
    text = out.read_text()
    assert 'd2rq:username "envuser";' in text


def test_align_suggest_then_apply(demo_fixtures, tmp_path):
    suggested = tmp_path / "suggested.align"
    code = run([
        "align", "suggest",
        "-m", str(demo_fixtures.os_mapping),
        "-O", str(demo_fixtures.ontology),
        "-o", str(suggested),
    ])
    assert code == 0
    body = suggested.read_text()
    assert "ticketId" in body and "ticketTitle" in body  # lexical 1.0 hits
    out = tmp_path / "aligned.ttl"
    code = run([
        "align", "apply",
        "-m", str(demo_fixtures.os_mapping),
        "-a", str(demo_fixtures.os_alignment),
        "-O", str(demo_fixtures.ontology),
        "-o", str(out),
    ])
    assert code == 0
    text = out.read_text()
    assert "d2rq:class hdo:ItSupportTicket;" in text
    assert "@prefix hdo: <http://www.samos.gr/ontologies/helpdeskOnto.owl#> ." in text


def test_dump_matches_site_queries(demo_fixtures, tmp_path, capsys):
    code = run(["dump", str(demo_fixtures.os_mapping_aligned)])
    assert code == 0
    dumped = capsys.readouterr().out
    graph = parse_turtle(dumped)
    handle = serve(EndpointConfig(
        base_iri="http://localhost:2020/", port=0,
        mapping_path=str(demo_fixtures.os_mapping_aligned), host="127.0.0.1",
    ))
    registry_path = tmp_path / "registry.txt"
    save_registry(EndpointRegistry((
        EndpointDescriptor("samos", f"http://127.0.0.1:{handle.port}/sparql"),
    )), registry_path)
    golden_queries = [
        f"PREFIX hdo: <{HDO}>\nSELECT ?t WHERE {{ ?t a hdo:ItSupportTicket }}",
        f"PREFIX hdo: <{HDO}>\nSELECT ?t ?v WHERE {{ ?t hdo:ticketId ?v }}",
        f"PREFIX hdo: <{HDO}>\nSELECT ?t WHERE {{ ?t hdo:ticketStatus \"closed\" }}",
    ]
    try:
        for q in golden_queries:
            code = run(["query", "--site", "samos", "--registry", str(registry_path), q])
            assert code == 0
            remote = read_results_json(capsys.readouterr().out)
            local = ref_evaluate(parse_query(q), graph)
            assert multiset(remote) == multiset(local)
    finally:
        handle.stop()


def test_query_mediated_from_file(demo_fixtures, tmp_path, capsys):
    os_handle = serve(EndpointConfig(
        base_iri="http://localhost:2020/", port=0,
        mapping_path=str(demo_fixtures.os_mapping_aligned), host="127.0.0.1",
    ))
    glpi_handle = serve(EndpointConfig(
        base_iri="http://localhost:2021/", port=0,
        mapping_path=str(demo_fixtures.glpi_mapping_aligned), host="127.0.0.1",
    ))
    registry_path = tmp_path / "registry.txt"
    save_registry(EndpointRegistry((
        EndpointDescriptor("samos", f"http://127.0.0.1:{os_handle.port}/sparql"),
        EndpointDescriptor("ikaria", f"http://127.0.0.1:{glpi_handle.port}/sparql"),
    )), registry_path)
    try:
        code = run([
            "query", "--mediated", "--registry", str(registry_path),
            "-f", str(demo_fixtures.queries["novideo"]),
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        sites = {b["site"]["value"] for b in doc["results"]["bindings"]}
        assert sites == {"samos", "ikaria"}
    finally:
        os_handle.stop()
        glpi_handle.stop()


def test_query_without_text_is_runtime_error(demo_fixtures, tmp_path, capsys):
    registry_path = tmp_path / "registry.txt"
    save_registry(EndpointRegistry((
        EndpointDescriptor("samos", "http://127.0.0.1:9/sparql"),
    )), registry_path)
    assert run(["query", "--mediated", "--registry", str(registry_path)]) == 2


def test_serve_subprocess_answers_and_stops(demo_fixtures, tmp_path):
    port = _free_port()
    process = subprocess.Popen(
        [sys.executable, "-m", "s3ai", "serve",
         "-b", f"http://127.0.0.1:{port}/", "-p", str(port), "--fast",
         str(demo_fixtures.os_mapping_aligned)],
        stderr=subprocess.PIPE,
    )
    try:
        _wait_http(f"http://127.0.0.1:{port}/sparql?query=SELECT%20*%20WHERE%20%7B%7D")
        r = requests.get(f"http://127.0.0.1:{port}/sparql",
                         params={"query": "SELECT * WHERE {}"})
        assert r.status_code == 200
    finally:
        process.terminate()
        assert process.wait(timeout=10) == 0  # graceful shutdown exits cleanly


def _free_port() -> int:
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_http(url: str, timeout_s: float = 20.0) -> None:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        try:
            if requests.get(url, timeout=2).status_code == 200:
                return
        except requests.RequestException:
            pass
        time.sleep(0.1)
    raise AssertionError(f"{url} never became ready")
