"""Algebra for the evaluated SPARQL subset.

SELECT queries translate to Slice?(Distinct?(Project(vars, pattern))) where
the pattern tree is built from Bgp, Filter, Join, Union, Service and Bind
nodes. Trees are immutable and structurally comparable, which the
parse/render round-trip tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ..terms import Iri, Literal, RdfTerm


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


PatternTerm = Union[Iri, Literal, Variable]


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: Union[Iri, Variable]
    object: PatternTerm

    def __post_init__(self) -> None:
        if isinstance(self.subject, Literal):
            raise ValueError("triple pattern subject cannot be a literal")
        if not isinstance(self.predicate, (Iri, Variable)):
            raise ValueError("triple pattern predicate must be an IRI or variable")

    def variables(self) -> list[str]:
        out = []
        for term in (self.subject, self.predicate, self.object):
            if isinstance(term, Variable):
                out.append(term.name)
        return out


# --- filter expressions ---------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    op: str  # one of = != < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    expr: "Expr"


@dataclass(frozen=True)
class Regex:
    text: "Expr"
    pattern: str
    flags: str = ""

    def __post_init__(self) -> None:
        if self.flags not in ("", "i"):
            raise ValueError("regex flags restricted to 'i' or empty")


@dataclass(frozen=True)
class StrFn:
    arg: "Expr"


@dataclass(frozen=True)
class BoundFn:
    var: Variable


Expr = Union[Comparison, And, Or, Not, Regex, StrFn, BoundFn, Variable, Iri, Literal]


# --- pattern algebra -------------------------------------------------------

@dataclass(frozen=True)
class Bgp:
    patterns: tuple[TriplePattern, ...] = ()


@dataclass(frozen=True)
class Filter:
    expr: Expr
    child: "Algebra"


@dataclass(frozen=True)
class Join:
    left: "Algebra"
    right: "Algebra"


@dataclass(frozen=True)
class Union:
    left: "Algebra"
    right: "Algebra"


@dataclass(frozen=True)
class Service:
    endpoint: Union[Iri, Variable]
    child: "Algebra"
    silent: bool = False

    def __post_init__(self) -> None:
        if _contains_service(self.child):
            raise ValueError("SERVICE bodies must not nest SERVICE")


@dataclass(frozen=True)
class Bind:
    """Extend each solution with var bound to a constant term."""

    var: Variable
    value: RdfTerm
    child: "Algebra"


@dataclass(frozen=True)
class Project:
    variables: tuple[str, ...]
    child: "Algebra"


@dataclass(frozen=True)
class Distinct:
    child: "Algebra"


@dataclass(frozen=True)
class Slice:
    limit: Optional[int]
    offset: int
    child: "Algebra"

    def __post_init__(self) -> None:
        if self.limit is None and self.offset == 0:
            raise ValueError("Slice must limit or offset something")


Algebra = Bgp | Filter | Join | Union | Service | Bind | Project | Distinct | Slice


def _contains_service(node) -> bool:
    if isinstance(node, Service):
        return True
    if isinstance(node, Bgp):
        return False
    if isinstance(node, (Filter, Bind, Project, Distinct, Slice)):
        return _contains_service(node.child)
    if isinstance(node, (Join, Union)):
        return _contains_service(node.left) or _contains_service(node.right)
    return False


def contains_service(node) -> bool:
    """True when any Service node occurs in the tree."""
    return _contains_service(node)


def scope_variables(node) -> list[str]:
    """In-scope variables in first-appearance order (what SELECT * projects).

    FILTER expressions do not bind variables and contribute nothing.
    """
    out: list[str] = []

    def add(name: str) -> None:
        if name not in out:
            out.append(name)

    def walk(n) -> None:
        if isinstance(n, Bgp):
            for p in n.patterns:
                for name in p.variables():
                    add(name)
        elif isinstance(n, Filter):
            walk(n.child)
        elif isinstance(n, (Join, Union)):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Service):
            if isinstance(n.endpoint, Variable):
                add(n.endpoint.name)
            walk(n.child)
        elif isinstance(n, Bind):
            walk(n.child)
            add(n.var.name)
        elif isinstance(n, (Project, Distinct, Slice)):
            walk(n.child)

    walk(node)
    return out


def query_pattern(root) -> "Algebra":
    """Strip the Slice/Distinct/Project wrappers off a SELECT tree."""
    node = root
    if isinstance(node, Slice):
        node = node.child
    if isinstance(node, Distinct):
        node = node.child
    if not isinstance(node, Project):
        raise ValueError("not a SELECT algebra tree (missing Project)")
    return node.child
