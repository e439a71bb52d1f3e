"""FILTER expression evaluation over solution mappings.

Comparisons are type-aware: numerics compare by value, xsd:dateTime by
ISO-8601 lexical order, strings lexicographically. Evaluation errors
(unbound variables, incomparable operands) follow SPARQL semantics: the
error propagates until a logical connective or the FILTER absorbs it.
"""

from __future__ import annotations

import re
from typing import Mapping, Union as TUnion

from ..terms import (
    RDF_LANGSTRING,
    XSD,
    XSD_BOOLEAN,
    XSD_DATETIME,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    Iri,
    Literal,
    RdfTerm,
)
from .algebra import (
    And,
    BoundFn,
    Comparison,
    Expr,
    Not,
    Or,
    Regex,
    StrFn,
    Variable,
)

_NUMERIC_TYPES = {XSD_INTEGER, XSD_DECIMAL, XSD_DOUBLE, XSD + "float"}
_STRINGY_TYPES = {XSD_STRING, RDF_LANGSTRING}
_KNOWN_TYPES = _NUMERIC_TYPES | _STRINGY_TYPES | {XSD_BOOLEAN, XSD_DATETIME}


class ExprError(Exception):
    """A SPARQL expression evaluation error (filters drop the row)."""


def _numeric_value(lit: Literal) -> TUnion[int, float]:
    try:
        if lit.datatype == XSD_INTEGER:
            return int(lit.lexical)
        return float(lit.lexical)
    except ValueError:
        raise ExprError(f"invalid numeric lexical form {lit.lexical!r}")


def _is_numeric(term: RdfTerm) -> bool:
    return isinstance(term, Literal) and term.datatype in _NUMERIC_TYPES


def _is_string(term: RdfTerm) -> bool:
    return isinstance(term, Literal) and term.datatype in _STRINGY_TYPES


def effective_boolean_value(term: RdfTerm) -> bool:
    if isinstance(term, Literal):
        if term.datatype == XSD_BOOLEAN:
            if term.lexical in ("true", "1"):
                return True
            if term.lexical in ("false", "0"):
                return False
            raise ExprError(f"invalid boolean {term.lexical!r}")
        if term.datatype in _NUMERIC_TYPES:
            return _numeric_value(term) != 0
        if term.datatype in _STRINGY_TYPES:
            return len(term.lexical) > 0
    raise ExprError(f"no effective boolean value for {term}")


def _equal(a: RdfTerm, b: RdfTerm) -> bool:
    if a == b:
        return True
    if _is_numeric(a) and _is_numeric(b):
        return _numeric_value(a) == _numeric_value(b)
    if isinstance(a, Literal) and isinstance(b, Literal):
        if a.datatype in _KNOWN_TYPES and b.datatype in _KNOWN_TYPES:
            return False  # known value spaces, structurally unequal
        raise ExprError(f"cannot test equality of {a} and {b}")
    # different kinds (IRI vs literal vs blank) are simply unequal
    return False


def _order(a: RdfTerm, b: RdfTerm) -> int:
    """-1 / 0 / 1 for comparable terms, ExprError otherwise."""
    if _is_numeric(a) and _is_numeric(b):
        va, vb = _numeric_value(a), _numeric_value(b)
    elif isinstance(a, Literal) and isinstance(b, Literal) \
            and a.datatype == b.datatype == XSD_DATETIME:
        va, vb = a.lexical, b.lexical
    elif _is_string(a) and _is_string(b) and a.lang is None and b.lang is None:
        va, vb = a.lexical, b.lexical
    elif isinstance(a, Literal) and isinstance(b, Literal) \
            and a.datatype == b.datatype == XSD_BOOLEAN:
        va, vb = effective_boolean_value(a), effective_boolean_value(b)
    else:
        raise ExprError(f"cannot order {a} and {b}")
    return (va > vb) - (va < vb)


_TRUE = Literal("true", XSD_BOOLEAN)
_FALSE = Literal("false", XSD_BOOLEAN)


def _boolean(value: bool) -> Literal:
    return _TRUE if value else _FALSE


def evaluate_expr(expr: Expr, row: Mapping[str, RdfTerm]) -> RdfTerm:
    if isinstance(expr, Variable):
        term = row.get(expr.name)
        if term is None:
            raise ExprError(f"unbound variable ?{expr.name}")
        return term
    if isinstance(expr, (Iri, Literal)):
        return expr
    if isinstance(expr, Comparison):
        left = evaluate_expr(expr.left, row)
        right = evaluate_expr(expr.right, row)
        if expr.op == "=":
            return _boolean(_equal(left, right))
        if expr.op == "!=":
            return _boolean(not _equal(left, right))
        cmp = _order(left, right)
        return _boolean(
            {"<": cmp < 0, "<=": cmp <= 0, ">": cmp > 0, ">=": cmp >= 0}[expr.op]
        )
    if isinstance(expr, And):
        # three-valued logic: an error on one side is masked by false on the other
        left = _try_ebv(expr.left, row)
        right = _try_ebv(expr.right, row)
        if left is False or right is False:
            return _FALSE
        if isinstance(left, ExprError):
            raise left
        if isinstance(right, ExprError):
            raise right
        return _boolean(left and right)
    if isinstance(expr, Or):
        left = _try_ebv(expr.left, row)
        right = _try_ebv(expr.right, row)
        if left is True or right is True:
            return _TRUE
        if isinstance(left, ExprError):
            raise left
        if isinstance(right, ExprError):
            raise right
        return _boolean(left or right)
    if isinstance(expr, Not):
        return _boolean(not effective_boolean_value(evaluate_expr(expr.expr, row)))
    if isinstance(expr, Regex):
        text = evaluate_expr(expr.text, row)
        if not _is_string(text):
            raise ExprError("REGEX requires a string literal")
        flags = re.IGNORECASE if expr.flags == "i" else 0
        try:
            found = re.search(expr.pattern, text.lexical, flags)
        except re.error as exc:
            raise ExprError(f"invalid regex pattern: {exc}")
        return _boolean(found is not None)
    if isinstance(expr, StrFn):
        term = evaluate_expr(expr.arg, row)
        if isinstance(term, Iri):
            return Literal(term.value)
        if isinstance(term, Literal):
            return Literal(term.lexical)
        raise ExprError("STR of a blank node")
    if isinstance(expr, BoundFn):
        return _boolean(expr.var.name in row)
    raise ExprError(f"cannot evaluate expression {expr!r}")


def _try_ebv(expr: Expr, row: Mapping[str, RdfTerm]):
    try:
        return effective_boolean_value(evaluate_expr(expr, row))
    except ExprError as exc:
        return exc


def filter_passes(expr: Expr, row: Mapping[str, RdfTerm]) -> bool:
    """True when the row satisfies the filter; errors eliminate the row."""
    try:
        return effective_boolean_value(evaluate_expr(expr, row))
    except ExprError:
        return False
