from __future__ import annotations

import json
import random

import pytest

from s3ai.results_json import ResultsJsonError, read_results_json, write_results_json
from s3ai.terms import (
    RDF_LANGSTRING,
    XSD_BOOLEAN,
    XSD_DATETIME,
    XSD_INTEGER,
    BlankNode,
    Iri,
    Literal,
    SolutionSequence,
)


def test_empty_sequence_shape():
    text = write_results_json(SolutionSequence(["t"]))
    doc = json.loads(text)
    assert doc["head"]["vars"] == ["t"]
    assert doc["results"]["bindings"] == []


def test_typed_integer_binding():
    seq = SolutionSequence(["id"], [{"id": Literal("1149", XSD_INTEGER)}])
    doc = json.loads(write_results_json(seq))
    binding = doc["results"]["bindings"][0]["id"]
    assert binding == {
        "type": "literal",
        "value": "1149",
        "datatype": "http://www.w3.org/2001/XMLSchema#integer",
    }


def test_plain_string_has_no_datatype_key():
    seq = SolutionSequence(["s"], [{"s": Literal("Phone")}])
    binding = json.loads(write_results_json(seq))["results"]["bindings"][0]["s"]
    assert "datatype" not in binding and "xml:lang" not in binding


def test_uri_bnode_lang_encodings():
    seq = SolutionSequence(
        ["a", "b", "c"],
        [{
            "a": Iri("http://example.org/x"),
            "b": BlankNode("n1"),
            "c": Literal("γεια", RDF_LANGSTRING, "el"),
        }],
    )
    row = json.loads(write_results_json(seq))["results"]["bindings"][0]
    assert row["a"]["type"] == "uri"
    assert row["b"] == {"type": "bnode", "value": "n1"}
    assert row["c"] == {"type": "literal", "value": "γεια", "xml:lang": "el"}


def test_unbound_variables_are_omitted_from_binding():
    seq = SolutionSequence(["x", "y"], [{"x": Iri("http://example.org/1")}])
    row = json.loads(write_results_json(seq))["results"]["bindings"][0]
    assert set(row) == {"x"}


def _random_sequence(rng: random.Random) -> SolutionSequence:
    variables = [f"v{i}" for i in range(rng.randint(1, 4))]
    rows = []
    for _ in range(rng.randint(0, 8)):
        row = {}
        for var in variables:
            roll = rng.random()
            if roll < 0.2:
                continue  # unbound
            if roll < 0.45:
                row[var] = Iri(f"http://example.org/r{rng.randint(0, 9)}")
            elif roll < 0.55:
                row[var] = BlankNode(f"b{rng.randint(0, 3)}")
            elif roll < 0.7:
                row[var] = Literal(str(rng.randint(0, 2000)), XSD_INTEGER)
            elif roll < 0.8:
                row[var] = Literal(rng.choice(["true", "false"]), XSD_BOOLEAN)
            elif roll < 0.9:
                row[var] = Literal("2013-04-05T09:38:59", XSD_DATETIME)
            else:
                row[var] = Literal(rng.choice(["closed", '"No Video" error', ""]))
        rows.append(row)
    return SolutionSequence(variables, rows)


def test_roundtrip_randomized_sequences():
    rng = random.Random(1149)
    for _ in range(200):
        seq = _random_sequence(rng)
        back = read_results_json(write_results_json(seq))
        assert back.variables == seq.variables
        assert back.rows == seq.rows


def test_read_rejects_malformed_documents():
    with pytest.raises(ResultsJsonError):
        read_results_json("{not json")
    with pytest.raises(ResultsJsonError):
        read_results_json('{"results": {"bindings": []}}')
    with pytest.raises(ResultsJsonError):
        read_results_json(
            '{"head": {"vars": ["x"]}, "results": {"bindings": [{"x": {"type": "wat", "value": "v"}}]}}'
        )


def test_reader_accepts_legacy_typed_literal():
    text = ('{"head": {"vars": ["x"]}, "results": {"bindings": '
            '[{"x": {"type": "typed-literal", "value": "5", '
            '"datatype": "http://www.w3.org/2001/XMLSchema#integer"}}]}}')
    seq = read_results_json(text)
    assert seq.rows[0]["x"] == Literal("5", XSD_INTEGER)
