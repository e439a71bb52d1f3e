"""Canonical query text for algebra trees.

Federation transmits sub-queries as text, so render_query must be a right
inverse of parse_query: parse_query(render_query(a)) is structurally equal
to a for every tree in the subset. IRIs are always written in full,
groups are braced explicitly, and filters are re-attached innermost-first.
"""

from __future__ import annotations

import re

from ..terms import (
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
    Iri,
    Literal,
)
from .algebra import (
    Algebra,
    And,
    Bgp,
    Bind,
    BoundFn,
    Comparison,
    Distinct,
    Expr,
    Filter,
    Join,
    Not,
    Or,
    Project,
    Regex,
    Service,
    Slice,
    StrFn,
    TriplePattern,
    Union,
    Variable,
)

_BARE_INTEGER = re.compile(r"[+-]?\d+")
_BARE_DECIMAL = re.compile(r"[+-]?\d+\.\d+")


def _escape(value: str) -> str:
    out = []
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    return "".join(out)


def render_term(term) -> str:
    if isinstance(term, Variable):
        return f"?{term.name}"
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, Literal):
        if term.lang:
            return f'"{_escape(term.lexical)}"@{term.lang}'
        if term.datatype == XSD_INTEGER and _BARE_INTEGER.fullmatch(term.lexical):
            return term.lexical
        if term.datatype == XSD_DECIMAL and _BARE_DECIMAL.fullmatch(term.lexical):
            return term.lexical
        if term.datatype == XSD_BOOLEAN and term.lexical in ("true", "false"):
            return term.lexical
        if term.datatype == XSD_STRING:
            return f'"{_escape(term.lexical)}"'
        return f'"{_escape(term.lexical)}"^^<{term.datatype}>'
    raise TypeError(f"cannot render term {term!r}")


def _render_pattern(p: TriplePattern) -> str:
    pred = "a" if isinstance(p.predicate, Iri) and p.predicate.value == RDF_TYPE \
        else render_term(p.predicate)
    return f"{render_term(p.subject)} {pred} {render_term(p.object)} ."


def render_expr(expr: Expr) -> str:
    if isinstance(expr, Comparison):
        return f"({render_expr(expr.left)} {expr.op} {render_expr(expr.right)})"
    if isinstance(expr, And):
        return f"({render_expr(expr.left)} && {render_expr(expr.right)})"
    if isinstance(expr, Or):
        return f"({render_expr(expr.left)} || {render_expr(expr.right)})"
    if isinstance(expr, Not):
        return f"(!{render_expr(expr.expr)})"
    if isinstance(expr, Regex):
        args = f'{render_expr(expr.text)}, "{_escape(expr.pattern)}"'
        if expr.flags:
            args += f', "{expr.flags}"'
        return f"REGEX({args})"
    if isinstance(expr, StrFn):
        return f"STR({render_expr(expr.arg)})"
    if isinstance(expr, BoundFn):
        return f"BOUND(?{expr.var.name})"
    return render_term(expr)


def _constraint_text(expr: Expr) -> str:
    text = render_expr(expr)
    if text.startswith("(") or isinstance(expr, (Regex, StrFn, BoundFn)):
        return text
    return f"({text})"


def _block(node: Algebra) -> str:
    elements = _elements(node)
    if not elements:
        return "{ }"
    return "{ " + " ".join(elements) + " }"


def _elements(node: Algebra) -> list[str]:
    if isinstance(node, Bgp):
        return [_render_pattern(p) for p in node.patterns]
    if isinstance(node, Filter):
        return _elements(node.child) + [f"FILTER {_constraint_text(node.expr)}"]
    if isinstance(node, Bind):
        # brace the child: a FILTER inside it must not escape into the
        # enclosing group on reparse
        return [_block(node.child), f"BIND({render_term(node.value)} AS ?{node.var.name})"]
    if isinstance(node, Join):
        return [_block(node.left), _block(node.right)]
    if isinstance(node, Union):
        return [f"{_block(node.left)} UNION {_block(node.right)}"]
    if isinstance(node, Service):
        silent = "SILENT " if node.silent else ""
        return [f"SERVICE {silent}{render_term(node.endpoint)} {_block(node.child)}"]
    raise TypeError(f"cannot render algebra node {type(node).__name__}")


def render_query(root: Algebra) -> str:
    """Serialize a SELECT algebra tree back to query text."""
    node = root
    limit, offset = None, 0
    if isinstance(node, Slice):
        limit, offset = node.limit, node.offset
        node = node.child
    distinct = isinstance(node, Distinct)
    if distinct:
        node = node.child
    if not isinstance(node, Project):
        raise TypeError("render_query expects a Project-rooted tree")
    head = "SELECT DISTINCT" if distinct else "SELECT"
    vars_text = " ".join(f"?{v}" for v in node.variables) if node.variables else "*"
    text = f"{head} {vars_text} WHERE {_block(node.child)}"
    if limit is not None:
        text += f" LIMIT {limit}"
    if offset:
        text += f" OFFSET {offset}"
    return text
