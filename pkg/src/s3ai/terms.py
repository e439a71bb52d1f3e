"""RDF term and graph model shared by every other module.

Terms are immutable value objects: IRIs must be absolute, literals carry a
datatype (plain literals are typed xsd:string, per RDF 1.1), and a language
tag is only legal together with rdf:langString. Graphs have set semantics
for triples and carry the prefix map they were parsed with.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"

XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_DECIMAL = XSD + "decimal"
XSD_DOUBLE = XSD + "double"
XSD_BOOLEAN = XSD + "boolean"
XSD_DATETIME = XSD + "dateTime"
RDF_TYPE = RDF + "type"
RDF_LANGSTRING = RDF + "langString"

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")


def is_absolute_iri(value: str) -> bool:
    return bool(_SCHEME_RE.match(value))


@dataclass(frozen=True)
class Iri:
    """An absolute IRI."""

    value: str

    def __post_init__(self) -> None:
        if not is_absolute_iri(self.value):
            raise ValueError(f"IRI is not absolute: {self.value!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __str__(self) -> str:
        return "_:" + self.label


@dataclass(frozen=True)
class Literal:
    """A literal with verbatim lexical form.

    No value-space normalization happens here; "02"^^xsd:integer and
    "2"^^xsd:integer are distinct terms.
    """

    lexical: str
    datatype: str = XSD_STRING
    lang: Optional[str] = None

    def __post_init__(self) -> None:
        if self.lang is not None and self.datatype != RDF_LANGSTRING:
            raise ValueError("language tag requires the rdf:langString datatype")
        if self.lang is None and self.datatype == RDF_LANGSTRING:
            raise ValueError("rdf:langString literal requires a language tag")

    def __str__(self) -> str:
        if self.lang:
            return f'"{self.lexical}"@{self.lang}'
        if self.datatype == XSD_STRING:
            return f'"{self.lexical}"'
        return f'"{self.lexical}"^^<{self.datatype}>'


RdfTerm = Union[Iri, BlankNode, Literal]


def term_sort_key(term: RdfTerm) -> tuple:
    """Total order over terms: IRIs, then blank nodes, then literals."""
    if isinstance(term, Iri):
        return (0, term.value)
    if isinstance(term, BlankNode):
        return (1, term.label)
    return (2, term.lexical, term.datatype, term.lang or "")


@dataclass(frozen=True)
class Triple:
    subject: RdfTerm
    predicate: Iri
    object: RdfTerm

    def __post_init__(self) -> None:
        if isinstance(self.subject, Literal):
            raise ValueError("triple subject cannot be a literal")
        if not isinstance(self.predicate, Iri):
            raise ValueError("triple predicate must be an IRI")


class Graph:
    """Immutable set of triples plus the prefix map declared with them."""

    __slots__ = ("_triples", "_prefixes")

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        prefixes: Optional[Mapping[str, str]] = None,
    ) -> None:
        self._triples = frozenset(triples)
        prefix_map = dict(prefixes or {})
        for label, ns in prefix_map.items():
            if not is_absolute_iri(ns):
                raise ValueError(f"prefix {label!r} maps to a non-absolute IRI: {ns!r}")
        self._prefixes = prefix_map

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    @property
    def prefixes(self) -> dict[str, str]:
        return dict(self._prefixes)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self):
        return iter(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples and self._prefixes == other._prefixes

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"Graph({len(self._triples)} triples, {len(self._prefixes)} prefixes)"

    def subjects(self) -> set[RdfTerm]:
        return {t.subject for t in self._triples}

    def matching(
        self,
        subject: Optional[RdfTerm] = None,
        predicate: Optional[Iri] = None,
        object: Optional[RdfTerm] = None,
    ) -> list[Triple]:
        out = []
        for t in self._triples:
            if subject is not None and t.subject != subject:
                continue
            if predicate is not None and t.predicate != predicate:
                continue
            if object is not None and t.object != object:
                continue
            out.append(t)
        return out


SolutionMapping = dict[str, RdfTerm]


def solution_key(row: Mapping[str, RdfTerm]) -> tuple:
    """Hashable identity of a solution mapping (for multisets and DISTINCT)."""
    return tuple(sorted((var, term_sort_key(term)) for var, term in row.items()))


@dataclass
class SolutionSequence:
    """An ordered bag of solution mappings over a fixed variable header.

    Rows are partial: a variable may be unbound in any row. Bag semantics,
    duplicates are meaningful until DISTINCT discards them.
    """

    variables: list[str]
    rows: list[SolutionMapping] = field(default_factory=list)

    def __post_init__(self) -> None:
        declared = set(self.variables)
        for row in self.rows:
            extra = set(row) - declared
            if extra:
                raise ValueError(f"row binds undeclared variables: {sorted(extra)}")

    def __len__(self) -> int:
        return len(self.rows)

    def as_multiset(self) -> Counter:
        return Counter(solution_key(row) for row in self.rows)

    def drop_variable(self, name: str) -> "SolutionSequence":
        """Copy without one variable (used to compare modulo provenance)."""
        return SolutionSequence(
            [v for v in self.variables if v != name],
            [{k: v for k, v in row.items() if k != name} for row in self.rows],
        )
