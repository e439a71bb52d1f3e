"""SPARQL subset: algebra, parser, renderer, filter evaluation."""

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
    contains_service,
    query_pattern,
    scope_variables,
)
from .expr_eval import ExprError, effective_boolean_value, evaluate_expr, filter_passes
from .parser import SparqlSyntaxError, UnsupportedFeatureError, parse_query
from .render import render_expr, render_query, render_term

__all__ = [
    "Algebra", "And", "Bgp", "Bind", "BoundFn", "Comparison", "Distinct",
    "Expr", "Filter", "Join", "Not", "Or", "Project", "Regex", "Service",
    "Slice", "StrFn", "TriplePattern", "Union", "Variable",
    "contains_service", "query_pattern", "scope_variables",
    "ExprError", "effective_boolean_value", "evaluate_expr", "filter_passes",
    "SparqlSyntaxError", "UnsupportedFeatureError", "parse_query",
    "render_expr", "render_query", "render_term",
]
