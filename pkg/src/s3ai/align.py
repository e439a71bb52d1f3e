"""Reference-ontology loading, lexical alignment suggestion, and mapping
document rewrite.

Alignments are reviewed artifacts: `suggest_alignment` scores generated
vocabulary terms against ontology terms by token overlap and writes its
candidates to a file, a human curates the file (the matcher only assists),
and `apply_alignment` rewrites the mapping document's class and property
IRIs accordingly. Unmapped terms stay in the generated vocabulary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional

from .mapping import MappingDocument, PropertyBridge
from .terms import OWL, RDF, RDF_TYPE, RDFS, Graph, Iri, Literal
from .turtle import parse_turtle

HDO_NAMESPACE = "http://www.samos.gr/ontologies/helpdeskOnto.owl#"

_CLASS_TYPES = {OWL + "Class", RDFS + "Class"}
_PROPERTY_TYPES = {
    RDF + "Property",
    OWL + "DatatypeProperty",
    OWL + "ObjectProperty",
    OWL + "AnnotationProperty",
}
_KNOWN_PREDICATES = {
    RDF_TYPE,
    RDFS + "subClassOf",
    RDFS + "subPropertyOf",
    RDFS + "domain",
    RDFS + "range",
    RDFS + "label",
    RDFS + "comment",
}


class OntologyError(ValueError):
    pass


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class OntologyModel:
    classes: tuple[str, ...]
    properties: tuple[str, ...]
    labels: tuple[tuple[str, str], ...] = ()
    subclass_of: tuple[tuple[str, str], ...] = ()
    subproperty_of: tuple[tuple[str, str], ...] = ()
    domains: tuple[tuple[str, str], ...] = ()
    ranges: tuple[tuple[str, str], ...] = ()
    prefixes: tuple[tuple[str, str], ...] = ()
    warnings: tuple[str, ...] = ()

    def is_class(self, iri: str) -> bool:
        return iri in self.classes

    def is_property(self, iri: str) -> bool:
        return iri in self.properties

    def superclasses(self, iri: str) -> list[str]:
        return [sup for sub, sup in self.subclass_of if sub == iri]

    def label(self, iri: str) -> Optional[str]:
        for term, text in self.labels:
            if term == iri:
                return text
        return None


def load_ontology(text: str) -> OntologyModel:
    """Read an RDFS/OWL-lite ontology from Turtle.

    Unknown constructs are kept out of the model but reported in
    `warnings`; a cycle among subclass edges is an error.
    """
    g: Graph = parse_turtle(text)
    classes: set[str] = set()
    properties: set[str] = set()
    labels = {}
    subclass = []
    subproperty = []
    domains = []
    ranges = []
    warnings = []
    for t in sorted(g, key=lambda t: (str(t.subject), t.predicate.value)):
        if not isinstance(t.subject, Iri):
            warnings.append(f"ignored blank-node subject {t.subject}")
            continue
        s, p, o = t.subject.value, t.predicate.value, t.object
        if p == RDF_TYPE and isinstance(o, Iri):
            if o.value in _CLASS_TYPES:
                classes.add(s)
            elif o.value in _PROPERTY_TYPES:
                properties.add(s)
            elif o.value == OWL + "Ontology":
                pass
            else:
                warnings.append(f"ignored typing of {s} as {o.value}")
        elif p == RDFS + "subClassOf" and isinstance(o, Iri):
            classes.add(s)
            subclass.append((s, o.value))
        elif p == RDFS + "subPropertyOf" and isinstance(o, Iri):
            properties.add(s)
            subproperty.append((s, o.value))
        elif p == RDFS + "domain" and isinstance(o, Iri):
            domains.append((s, o.value))
        elif p == RDFS + "range" and isinstance(o, Iri):
            ranges.append((s, o.value))
        elif p == RDFS + "label" and isinstance(o, Literal):
            labels[s] = o.lexical
        elif p == RDFS + "comment":
            pass
        else:
            warnings.append(f"ignored {s} {p}")
    _check_acyclic(subclass)
    return OntologyModel(
        classes=tuple(sorted(classes)),
        properties=tuple(sorted(properties)),
        labels=tuple(sorted(labels.items())),
        subclass_of=tuple(sorted(subclass)),
        subproperty_of=tuple(sorted(subproperty)),
        domains=tuple(sorted(domains)),
        ranges=tuple(sorted(ranges)),
        prefixes=tuple(sorted(g.prefixes.items())),
        warnings=tuple(warnings),
    )


def _check_acyclic(edges: list[tuple[str, str]]) -> None:
    children: dict[str, list[str]] = {}
    for sub, sup in edges:
        children.setdefault(sub, []).append(sup)
    state: dict[str, int] = {}

    def visit(node: str) -> None:
        state[node] = 1
        for nxt in children.get(node, ()):
            mark = state.get(nxt)
            if mark == 1:
                raise OntologyError(f"cycle in subclass hierarchy at {node}")
            if mark is None:
                visit(nxt)
        state[node] = 2

    for node in list(children):
        if state.get(node) is None:
            visit(node)


# --- alignment ----------------------------------------------------------------

@dataclass(frozen=True)
class Correspondence:
    source: str
    target: str
    confidence: float
    origin: str = "lexical"  # lexical | manual

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise AlignmentError(f"confidence out of range: {self.confidence}")
        if self.origin not in ("lexical", "manual"):
            raise AlignmentError(f"unknown origin {self.origin!r}")


@dataclass(frozen=True)
class Alignment:
    correspondences: tuple[Correspondence, ...] = ()

    def __post_init__(self) -> None:
        sources = [c.source for c in self.correspondences]
        if len(set(sources)) != len(sources):
            raise AlignmentError("a source term appears more than once")

    def target_for(self, source: str) -> Optional[str]:
        for c in self.correspondences:
            if c.source == source:
                return c.target
        return None


_TABLE_PREFIXES = ("ost_", "glpi_")
_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z0-9]+|[A-Z]+")


def local_name(iri: str) -> str:
    for sep in ("#", "/"):
        if sep in iri:
            iri = iri.rsplit(sep, 1)[1]
    return iri


def tokenize(name: str, strip_prefixes: tuple[str, ...] = _TABLE_PREFIXES) -> frozenset[str]:
    """Token set of a term name: strip table prefixes, split on underscores
    and camel case, case-fold."""
    for prefix in strip_prefixes:
        if name.startswith(prefix):
            name = name[len(prefix):]
            break
    tokens: set[str] = set()
    for part in name.split("_"):
        for token in _CAMEL_RE.findall(part):
            tokens.add(token.lower())
    return frozenset(tokens)


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def suggest_alignment(
    class_terms: Iterable[str],
    property_terms: Iterable[str],
    onto: OntologyModel,
    threshold: float = 0.5,
    strip_prefixes: tuple[str, ...] = _TABLE_PREFIXES,
) -> Alignment:
    """Best-scoring ontology term per vocabulary term, above the threshold.

    Classes align only to classes, properties only to properties. Ties
    break on the lexicographically smaller target IRI, so the suggestion
    is deterministic.
    """
    correspondences = []
    for sources, targets in ((class_terms, onto.classes), (property_terms, onto.properties)):
        for source in sorted(set(sources)):
            source_tokens = tokenize(local_name(source), strip_prefixes)
            best: Optional[tuple[float, str]] = None
            for target in sorted(targets):
                score = jaccard(source_tokens, tokenize(local_name(target), strip_prefixes))
                if best is None or score > best[0] or (score == best[0] and target < best[1]):
                    best = (score, target)
            if best is not None and best[0] >= threshold:
                correspondences.append(Correspondence(source, best[1], best[0]))
    return Alignment(tuple(sorted(correspondences, key=lambda c: c.source)))


def apply_alignment(
    doc: MappingDocument,
    alignment: Alignment,
    onto: OntologyModel,
) -> MappingDocument:
    """Rewrite class and property IRIs per the alignment; everything else,
    including the data each bridge produces, stays identical."""
    class_sources = {cm.class_iri for cm in doc.class_maps}
    for c in alignment.correspondences:
        if c.source in class_sources:
            if not onto.is_class(c.target):
                raise AlignmentError(f"class source {c.source} maps to non-class {c.target}")
        else:
            if not (onto.is_class(c.target) or onto.is_property(c.target)):
                raise AlignmentError(f"target {c.target} not in the ontology")
            if onto.is_class(c.target) and not onto.is_property(c.target):
                raise AlignmentError(f"property source {c.source} maps to class {c.target}")

    def rewrite(iri: str) -> str:
        return alignment.target_for(iri) or iri

    new_maps = []
    for cm in doc.class_maps:
        bridges = tuple(
            PropertyBridge(b.name, rewrite(b.property_iri), b.source, b.datatype)
            for b in cm.bridges
        )
        new_maps.append(replace(cm, class_iri=rewrite(cm.class_iri), bridges=bridges))

    used_namespaces = set()
    for c in alignment.correspondences:
        name = local_name(c.target)
        used_namespaces.add(c.target[: len(c.target) - len(name)])
    prefix_lookup = {ns: label for label, ns in onto.prefixes}
    extra = dict(doc.extra_prefixes)
    if "hdo" not in extra:
        extra["hdo"] = HDO_NAMESPACE
    counter = 0
    for ns in sorted(used_namespaces):
        if ns in (doc.vocab, HDO_NAMESPACE) or ns in extra.values():
            continue
        label = prefix_lookup.get(ns)
        while label is None or label in extra:
            label = f"ns{counter}"
            counter += 1
        extra[label] = ns
    return replace(
        doc,
        class_maps=tuple(new_maps),
        extra_prefixes=tuple(extra.items()),
    )


# --- alignment files -------------------------------------------------------------

def write_alignment(alignment: Alignment, path: str | Path) -> None:
    lines = ["# source\ttarget\tconfidence\torigin"]
    for c in alignment.correspondences:
        lines.append(f"{c.source}\t{c.target}\t{c.confidence:g}\t{c.origin}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_alignment(path: str | Path) -> Alignment:
    correspondences = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise AlignmentError(f"line {lineno}: expected 4 tab-separated fields")
        source, target, confidence, origin = parts
        try:
            value = float(confidence)
        except ValueError:
            raise AlignmentError(f"line {lineno}: bad confidence {confidence!r}")
        correspondences.append(Correspondence(source, target, value, origin))
    return Alignment(tuple(correspondences))
