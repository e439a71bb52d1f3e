"""SPARQL 1.1 query results JSON writer and reader.

The writer emits the W3C structure (`head.vars` + `results.bindings`);
the reader is used by the federation client to consume remote answers.
Plain xsd:string literals are written without a datatype key and read
back as xsd:string, so write/read round-trips are exact.
"""

from __future__ import annotations

import json

from .terms import (
    RDF_LANGSTRING,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    RdfTerm,
    SolutionSequence,
)


class ResultsJsonError(ValueError):
    pass


def _encode_term(term: RdfTerm) -> dict:
    if isinstance(term, Iri):
        return {"type": "uri", "value": term.value}
    if isinstance(term, BlankNode):
        return {"type": "bnode", "value": term.label}
    obj = {"type": "literal", "value": term.lexical}
    if term.lang is not None:
        obj["xml:lang"] = term.lang
    elif term.datatype != XSD_STRING:
        obj["datatype"] = term.datatype
    return obj


def write_results_json(seq: SolutionSequence, indent: int | None = None) -> str:
    doc = {
        "head": {"vars": list(seq.variables)},
        "results": {
            "bindings": [
                {var: _encode_term(term) for var, term in row.items()}
                for row in seq.rows
            ]
        },
    }
    return json.dumps(doc, sort_keys=True, indent=indent)


def _decode_term(obj: dict) -> RdfTerm:
    kind = obj.get("type")
    value = obj.get("value")
    if not isinstance(value, str):
        raise ResultsJsonError(f"binding value must be a string: {obj!r}")
    if kind == "uri":
        return Iri(value)
    if kind == "bnode":
        return BlankNode(value)
    if kind in ("literal", "typed-literal"):
        lang = obj.get("xml:lang")
        if lang is not None:
            return Literal(value, RDF_LANGSTRING, lang)
        return Literal(value, obj.get("datatype", XSD_STRING))
    raise ResultsJsonError(f"unknown binding type: {kind!r}")


def read_results_json(text: str) -> SolutionSequence:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ResultsJsonError(f"malformed results JSON: {exc}") from exc
    try:
        variables = list(doc["head"]["vars"])
        bindings = doc["results"]["bindings"]
    except (KeyError, TypeError) as exc:
        raise ResultsJsonError("missing head.vars or results.bindings") from exc
    rows = []
    for binding in bindings:
        rows.append({var: _decode_term(term) for var, term in binding.items()})
    return SolutionSequence(variables, rows)
