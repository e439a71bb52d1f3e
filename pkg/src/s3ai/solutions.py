"""Local algebra operations over bags of solution mappings.

Used by both the virtual-graph evaluator and the federation engine. Rows
are plain dicts (variable name to term); bags are lists. LIMIT/OFFSET is
applied over a canonical row ordering so that repeated evaluations of the
same query return identical answers.
"""

from __future__ import annotations

from typing import Iterable

from .sparql.algebra import Expr
from .sparql.expr_eval import filter_passes
from .terms import RdfTerm, SolutionMapping, solution_key


def compatible(a: SolutionMapping, b: SolutionMapping) -> bool:
    for var, term in a.items():
        other = b.get(var)
        if other is not None and other != term:
            return False
    return True


def merge(a: SolutionMapping, b: SolutionMapping) -> SolutionMapping:
    out = dict(a)
    out.update(b)
    return out


def join_rows(left: list[SolutionMapping], right: list[SolutionMapping]) -> list[SolutionMapping]:
    """SPARQL join: pair up compatible mappings.

    Hash join on the variables bound in every row of both sides; pairs are
    still verified for full compatibility, so partially bound rows (from
    UNION branches) combine correctly.
    """
    if not left or not right:
        return []
    always_left = set.intersection(*(set(r) for r in left))
    always_right = set.intersection(*(set(r) for r in right))
    keys = sorted(always_left & always_right)
    out = []
    if keys:
        index: dict[tuple, list[SolutionMapping]] = {}
        for row in right:
            index.setdefault(tuple(solution_key({k: row[k] for k in keys})), []).append(row)
        for lrow in left:
            bucket = index.get(tuple(solution_key({k: lrow[k] for k in keys})), ())
            for rrow in bucket:
                if compatible(lrow, rrow):
                    out.append(merge(lrow, rrow))
    else:
        for lrow in left:
            for rrow in right:
                if compatible(lrow, rrow):
                    out.append(merge(lrow, rrow))
    return out


def filter_rows(expr: Expr, rows: Iterable[SolutionMapping]) -> list[SolutionMapping]:
    return [row for row in rows if filter_passes(expr, row)]


def project_rows(variables: Iterable[str], rows: Iterable[SolutionMapping]) -> list[SolutionMapping]:
    keep = list(variables)
    return [{v: row[v] for v in keep if v in row} for row in rows]


def distinct_rows(rows: Iterable[SolutionMapping]) -> list[SolutionMapping]:
    seen = set()
    out = []
    for row in rows:
        key = solution_key(row)
        if key not in seen:
            seen.add(key)
            out.append(row)
    return out


def bind_rows(var: str, value: RdfTerm, rows: Iterable[SolutionMapping]) -> list[SolutionMapping]:
    out = []
    for row in rows:
        if var in row:
            raise ValueError(f"BIND target ?{var} already bound")
        out.append(merge(row, {var: value}))
    return out


def canonical_order(rows: Iterable[SolutionMapping]) -> list[SolutionMapping]:
    return sorted(rows, key=solution_key)


def slice_rows(rows: list[SolutionMapping], limit, offset: int) -> list[SolutionMapping]:
    """OFFSET/LIMIT over the canonical ordering (deterministic answers)."""
    ordered = canonical_order(rows)
    ordered = ordered[offset:]
    if limit is not None:
        ordered = ordered[:limit]
    return ordered
