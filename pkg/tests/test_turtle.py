from __future__ import annotations

import random

import pytest

from s3ai.terms import (
    RDF_LANGSTRING,
    XSD_BOOLEAN,
    XSD_DATETIME,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    Graph,
    Iri,
    Literal,
    Triple,
)
from s3ai.turtle import TurtleParseError, parse_turtle, serialize_turtle

MAPPING_PREFIX_BLOCK = """\
@prefix map: <#> .
@prefix db: <> .
@prefix vocab: <vocab/> .
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix d2rq: <http://www.wiwiss.fu-berlin.de/suhl/bizer/D2RQ/0.1#> .
@prefix jdbc: <http://d2rq.org/terms/jdbc/> .
"""


def test_prefix_block_yields_no_triples_and_eight_prefixes():
    g = parse_turtle(MAPPING_PREFIX_BLOCK, base="http://localhost:2020/")
    assert len(g) == 0
    assert len(g.prefixes) == 8
    assert g.prefixes["map"] == "http://localhost:2020/#"
    assert g.prefixes["db"] == "http://localhost:2020/"
    assert g.prefixes["vocab"] == "http://localhost:2020/vocab/"
    assert g.prefixes["d2rq"] == "http://www.wiwiss.fu-berlin.de/suhl/bizer/D2RQ/0.1#"


def test_empty_document():
    g = parse_turtle("")
    assert len(g) == 0 and g.prefixes == {}


def test_classmap_block_roundtrips():
    text = MAPPING_PREFIX_BLOCK + """
map:ost_ticket a d2rq:ClassMap ;
\td2rq:dataStorage map:database ;
\td2rq:uriPattern "ost_ticket/@@ost_ticket.ticket_id@@" ;
\td2rq:class vocab:ost_ticket ;
\td2rq:classDefinitionLabel "ost_ticket" .
"""
    g = parse_turtle(text, base="http://localhost:2020/")
    assert len(g) == 5
    again = parse_turtle(serialize_turtle(g), base="http://localhost:2020/")
    assert again == g


def test_predicate_object_and_object_lists():
    g = parse_turtle(
        '@prefix ex: <http://example.org/> .\n'
        "ex:s ex:p ex:o1, ex:o2 ; ex:q \"v\" .\n"
    )
    assert len(g) == 3
    subjects = {t.subject for t in g}
    assert subjects == {Iri("http://example.org/s")}


def test_literal_forms():
    g = parse_turtle(
        '@prefix x: <http://example.org/> .\n'
        'x:s x:a "plain" .\n'
        'x:s x:b "tagged"@en .\n'
        'x:s x:c "5"^^<http://www.w3.org/2001/XMLSchema#integer> .\n'
        'x:s x:d "quote \\" and newline \\n" .\n'
    )
    objects = {t.object for t in g}
    assert Literal("plain") in objects
    assert Literal("tagged", RDF_LANGSTRING, "en") in objects
    assert Literal("5", XSD_INTEGER) in objects
    assert Literal('quote " and newline \n') in objects


def test_a_keyword_is_rdf_type():
    g = parse_turtle('@prefix x: <http://e.org/> .\nx:s a x:C .')
    (t,) = list(g)
    assert t.predicate.value.endswith("#type")


def test_blank_node_labels():
    g = parse_turtle('@prefix x: <http://e.org/> .\n_:b0 x:p _:b1 .')
    (t,) = list(g)
    assert t.subject == BlankNode("b0") and t.object == BlankNode("b1")


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("x:s x:p x:o .", "undeclared prefix"),
        ('@prefix x: <http://e.org/> .\nx:s x:p .', "unexpected"),
        ('@prefix x: <http://e.org/> .\n"lit" x:p x:o .', "subject"),
        ("<rel> <http://e.org/p> <http://e.org/o> .", "relative IRI"),
        ('@prefix x: <http://e.org/> .\nx:s x:p "open .', "unterminated"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(TurtleParseError) as err:
        parse_turtle(text)
    assert fragment in str(err.value)


def test_error_carries_position():
    with pytest.raises(TurtleParseError) as err:
        parse_turtle('@prefix x: <http://e.org/> .\nx:s x:p "open .')
    assert err.value.line == 2


def test_literal_subject_rejected_in_model():
    with pytest.raises(ValueError):
        Triple(Literal("x"), Iri("http://e.org/p"), Literal("y"))


def _random_graph(rng: random.Random) -> Graph:
    prefixes = {"ex": "http://example.org/", "v": "http://example.org/vocab/"}
    iris = [Iri(f"http://example.org/r{i}") for i in range(6)]
    preds = [Iri(f"http://example.org/vocab/p{i}") for i in range(4)]
    datatypes = [XSD_STRING, XSD_INTEGER, XSD_DECIMAL, XSD_BOOLEAN, XSD_DATETIME]

    def random_literal() -> Literal:
        if rng.random() < 0.2:
            return Literal(rng.choice(["hi", "héllo", 'say "no"', "tab\t"]),
                           RDF_LANGSTRING, rng.choice(["en", "el"]))
        dt = rng.choice(datatypes)
        lex = {
            XSD_STRING: rng.choice(["", "plain", "multi\nline", "ticket/1149"]),
            XSD_INTEGER: str(rng.randint(-10, 1200)),
            XSD_DECIMAL: f"{rng.randint(0, 9)}.{rng.randint(0, 99)}",
            XSD_BOOLEAN: rng.choice(["true", "false"]),
            XSD_DATETIME: "2013-04-05T09:38:59",
        }[dt]
        return Literal(lex, dt)

    triples = set()
    for _ in range(rng.randint(0, 12)):
        subject = rng.choice(iris + [BlankNode(f"b{rng.randint(0, 3)}")])
        obj_kind = rng.random()
        if obj_kind < 0.4:
            obj = random_literal()
        elif obj_kind < 0.8:
            obj = rng.choice(iris)
        else:
            obj = BlankNode(f"b{rng.randint(0, 3)}")
        triples.add(Triple(subject, rng.choice(preds), obj))
    return Graph(triples, prefixes)


def test_roundtrip_on_randomized_graphs():
    rng = random.Random(20130405)
    for _ in range(200):
        g = _random_graph(rng)
        assert parse_turtle(serialize_turtle(g)) == g


def test_serialization_is_canonical():
    rng = random.Random(7)
    g = _random_graph(rng)
    shuffled = Graph(sorted(g.triples, key=repr, reverse=True), g.prefixes)
    assert serialize_turtle(g) == serialize_turtle(shuffled)


def test_no_literal_subject_possible_after_roundtrip():
    rng = random.Random(99)
    for _ in range(50):
        g = _random_graph(rng)
        for t in parse_turtle(serialize_turtle(g)):
            assert not isinstance(t.subject, Literal)
