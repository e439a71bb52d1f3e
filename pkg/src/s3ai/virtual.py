"""The virtual-graph engine: BGP-to-SQL translation and algebra evaluation
against a live store, URI dereferencing, and full materialization.

Translation enumerates, per triple pattern, the (class map, bridge)
candidates compatible with its bound positions, then joins candidate
combinations on shared variables: shared subjects on the same class map
collapse into one table instance, object joins follow the mapping's
foreign-key joins, and bound subjects/literals become SQL equality
conjuncts. Each surviving combination yields one TranslationUnit whose
rows are turned into solution mappings by a per-variable recipe.

materialize() is the independent test oracle: the production path never
builds the full graph, it rewrites every query into SQL on the fly, so
data changed in the store is visible to the very next query.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .mapping import (
    ClassMap,
    ColumnSource,
    MappingDocument,
    UriJoinSource,
    bridge_literal,
    cell_to_lexical,
    fill_pattern,
    is_canonical_lexical,
    lexical_to_cell,
    match_pattern,
)
from .relational import (
    ColumnEq,
    Compare,
    ConnectionSpec,
    JoinClause,
    NullCond,
    SelectColumn,
    SqlSelect,
    TableRef,
    execute_select,
)
from .solutions import (
    bind_rows,
    distinct_rows,
    filter_rows,
    join_rows,
    project_rows,
    slice_rows,
)
from .sparql.algebra import (
    Algebra,
    Bgp,
    Bind,
    Distinct,
    Filter,
    Join,
    Project,
    Service,
    Slice,
    TriplePattern,
    Union,
    Variable,
    scope_variables,
)
from .sparql.parser import UnsupportedFeatureError
from .terms import (
    RDF,
    RDF_TYPE,
    XSD,
    Graph,
    Iri,
    Literal,
    RdfTerm,
    SolutionMapping,
    SolutionSequence,
    Triple,
)


class EvalError(RuntimeError):
    pass


class ResourceNotFound(LookupError):
    """Dereferenced IRI matches no class map's URI pattern."""


@dataclass
class EvalOptions:
    row_cap: int = 1_000_000
    timeout_ms: int = 10_000
    describe_incoming: bool = False


DEFAULT_OPTIONS = EvalOptions()


# --- value constructors -------------------------------------------------------

@dataclass(frozen=True)
class UriFromPattern:
    class_map: str
    alias: str


@dataclass(frozen=True)
class LiteralFromColumn:
    alias: str
    column: str
    datatype: Optional[str]


@dataclass(frozen=True)
class ConstantTerm:
    term: RdfTerm


Constructor = UriFromPattern | LiteralFromColumn | ConstantTerm


@dataclass
class TranslationUnit:
    sql: SqlSelect
    recipe: dict[str, Constructor]
    labels: dict[tuple[str, str], str]  # (alias, column) -> result label


def _column_datatype(cm: ClassMap, column: str) -> Optional[str]:
    for bridge in cm.datatype_bridges():
        if bridge.source.column == column:
            return bridge.datatype
    return None


def _subject_values(cm: ClassMap, cells: dict[str, object]) -> Optional[dict[str, str]]:
    values = {}
    for col in cm.pattern_columns():
        cell = cells.get(col)
        if cell is None:
            return None
        values[col] = cell_to_lexical(cell, _column_datatype(cm, col))
    return values


def _subject_iri(doc: MappingDocument, cm: ClassMap, cells: dict[str, object]) -> Optional[Iri]:
    values = _subject_values(cm, cells)
    if values is None:
        return None
    return Iri(doc.subject_root() + fill_pattern(cm.uri_pattern, values))


def _match_subject(doc: MappingDocument, cm: ClassMap, iri: str) -> Optional[dict[str, str]]:
    root = doc.subject_root()
    if not iri.startswith(root):
        return None
    return match_pattern(cm.uri_pattern, iri[len(root):])


class _UnitBuilder:
    """Accumulates one candidate combination into a TranslationUnit."""

    def __init__(self, doc: MappingDocument) -> None:
        self.doc = doc
        self.aliases: list[tuple[str, str]] = []  # (alias, table)
        self.entity_alias: dict[tuple, tuple[str, str]] = {}  # key -> (cm name, alias)
        self.recipe: dict[str, Constructor] = {}
        self.equalities: list[ColumnEq] = []
        self.conditions: list = []
        self.needed: set[tuple[str, str]] = set()
        self.dead = False

    def new_alias(self, table: str) -> str:
        alias = f"t{len(self.aliases)}"
        self.aliases.append((alias, table))
        return alias

    def resource_alias(self, key: tuple, cm: ClassMap) -> Optional[str]:
        existing = self.entity_alias.get(key)
        if existing is not None:
            cm_name, alias = existing
            if cm_name != cm.name:
                return None  # URI patterns of distinct class maps are disjoint
            return alias
        alias = self.new_alias(cm.table)
        self.entity_alias[key] = (cm.name, alias)
        return alias

    def pin_subject(self, cm: ClassMap, alias: str, iri: str) -> bool:
        """Constrain alias rows to the single row a bound subject denotes."""
        raw = _match_subject(self.doc, cm, iri)
        if raw is None:
            return False
        for col, lexical in raw.items():
            datatype = _column_datatype(cm, col)
            if not is_canonical_lexical(lexical, datatype):
                return False
            self.conditions.append(Compare(alias, col, "=", lexical_to_cell(lexical, datatype)))
        return True

    def need_subject_columns(self, cm: ClassMap, alias: str) -> None:
        for col in cm.pattern_columns():
            self.needed.add((alias, col))
            self.conditions.append(NullCond(alias, col, is_null=False))

    def merge_constructor(self, var: str, new: Constructor) -> bool:
        old = self.recipe.get(var)
        if old is None:
            self.recipe[var] = new
            return True
        if old == new:
            return True
        if isinstance(old, ConstantTerm) and isinstance(new, ConstantTerm):
            return old.term == new.term
        # constant vs column-driven constructor: push the constant into SQL
        for const, other in ((old, new), (new, old)):
            if isinstance(const, ConstantTerm):
                ok = self._pin_constructor(other, const.term)
                if ok:
                    self.recipe[var] = const
                return ok
        if isinstance(old, LiteralFromColumn) and isinstance(new, LiteralFromColumn):
            if old.datatype != new.datatype:
                return False
            self.equalities.append(
                ColumnEq(old.alias, old.column, new.alias, new.column)
            )
            return True
        # UriFromPattern pairs were unified through entity aliases already;
        # any remaining mix (uri vs literal) cannot denote one term
        return False

    def _pin_constructor(self, ctor: Constructor, term: RdfTerm) -> bool:
        if isinstance(ctor, LiteralFromColumn):
            if not isinstance(term, Literal):
                return False
            expected = ctor.datatype or (XSD + "string")
            if term.lang is not None or term.datatype != expected:
                return False
            if not is_canonical_lexical(term.lexical, ctor.datatype):
                return False
            self.conditions.append(
                Compare(ctor.alias, ctor.column, "=", lexical_to_cell(term.lexical, ctor.datatype))
            )
            return True
        if isinstance(ctor, UriFromPattern):
            if not isinstance(term, Iri):
                return False
            return self.pin_subject(self.doc.class_map(ctor.class_map), ctor.alias, term.value)
        return False

    def build(self, row_cap: int) -> Optional[TranslationUnit]:
        if self.dead or not self.aliases:
            return None
        labels: dict[tuple[str, str], str] = {}
        columns = []
        for alias, col in sorted(self.needed):
            label = f"c{len(labels)}"
            labels[(alias, col)] = label
            columns.append(SelectColumn(alias, col, label))
        base_alias, base_table = self.aliases[0]
        earlier = {base_alias}
        joins = []
        where = list(self.conditions)
        remaining = list(self.equalities)
        for alias, table in self.aliases[1:]:
            on = []
            rest = []
            for eq in remaining:
                touches_self = alias in (eq.left_alias, eq.right_alias)
                other = eq.right_alias if eq.left_alias == alias else eq.left_alias
                if touches_self and other in earlier:
                    on.append(eq)
                else:
                    rest.append(eq)
            remaining = rest
            joins.append(JoinClause(TableRef(table, alias), tuple(on)))
            earlier.add(alias)
        where.extend(remaining)
        sql = SqlSelect(
            columns=tuple(columns),
            base=TableRef(base_table, base_alias),
            joins=tuple(joins),
            where=tuple(where),
            distinct=True,
            limit=row_cap + 1,
        )
        return TranslationUnit(sql, dict(self.recipe), labels)


def translate_bgp(
    patterns: list[TriplePattern] | tuple[TriplePattern, ...],
    doc: MappingDocument,
    row_cap: int = DEFAULT_OPTIONS.row_cap,
) -> list[TranslationUnit]:
    """Compile a BGP into translation units (one per candidate combination).

    Returns an empty list when some pattern mentions a term the document
    does not map (the BGP then has no answers). Variable predicates are
    not translatable against a whole document and are rejected.
    """
    if not patterns:
        return []
    candidate_lists = []
    for p in patterns:
        if isinstance(p.predicate, Variable):
            raise UnsupportedFeatureError("unbound predicate in basic graph pattern")
        candidates: list[tuple] = []
        if p.predicate.value == RDF_TYPE:
            obj = p.object
            if isinstance(obj, Variable):
                candidates = [("type", cm, None) for cm in doc.class_maps]
            elif isinstance(obj, Iri):
                candidates = [
                    ("type", cm, None) for cm in doc.class_maps if cm.class_iri == obj.value
                ]
        else:
            candidates = [
                ("bridge", cm, b)
                for cm in doc.class_maps
                for b in cm.bridges
                if b.property_iri == p.predicate.value
            ]
        if not candidates:
            return []
        candidate_lists.append(candidates)

    units = []
    for combo in itertools.product(*candidate_lists):
        unit = _build_combo(patterns, combo, doc, row_cap)
        if unit is not None:
            units.append(unit)
    return units


def _build_combo(patterns, combo, doc: MappingDocument, row_cap: int) -> Optional[TranslationUnit]:
    b = _UnitBuilder(doc)
    for pattern, (kind, cm, bridge) in zip(patterns, combo):
        subject = pattern.subject
        if isinstance(subject, Variable):
            alias = b.resource_alias(("var", subject.name), cm)
            if alias is None:
                return None
            if not b.merge_constructor(subject.name, UriFromPattern(cm.name, alias)):
                return None
            b.need_subject_columns(cm, alias)
        elif isinstance(subject, Iri):
            alias = b.resource_alias(("const", subject.value), cm)
            if alias is None or not b.pin_subject(cm, alias, subject.value):
                return None
        else:
            return None  # blank node subjects are not produced by the parser

        obj = pattern.object
        if kind == "type":
            if isinstance(obj, Variable):
                if not b.merge_constructor(obj.name, ConstantTerm(Iri(cm.class_iri))):
                    return None
            # bound class IRIs already narrowed the candidate list
        elif isinstance(bridge.source, ColumnSource):
            column = bridge.source.column
            if isinstance(obj, Variable):
                ok = b.merge_constructor(
                    obj.name, LiteralFromColumn(alias, column, bridge.datatype)
                )
                if not ok:
                    return None
                b.needed.add((alias, column))
                b.conditions.append(NullCond(alias, column, is_null=False))
            elif isinstance(obj, Literal):
                expected = bridge.datatype or (XSD + "string")
                if obj.lang is not None or obj.datatype != expected:
                    return None
                if not is_canonical_lexical(obj.lexical, bridge.datatype):
                    return None
                b.conditions.append(
                    Compare(alias, column, "=", lexical_to_cell(obj.lexical, bridge.datatype))
                )
            else:
                return None  # IRI object never matches a datatype bridge
        else:  # UriJoin bridge
            target_cm = doc.class_map(bridge.source.target_class_map)
            if isinstance(obj, Variable):
                target_alias = b.resource_alias(("var", obj.name), target_cm)
                if target_alias is None:
                    return None
                if not b.merge_constructor(obj.name, UriFromPattern(target_cm.name, target_alias)):
                    return None
                b.need_subject_columns(target_cm, target_alias)
            elif isinstance(obj, Iri):
                target_alias = b.resource_alias(("const", obj.value), target_cm)
                if target_alias is None or not b.pin_subject(target_cm, target_alias, obj.value):
                    return None
            else:
                return None  # literal object never matches an object bridge
            for local_col, target_col in bridge.source.joins:
                b.equalities.append(ColumnEq(alias, local_col, target_alias, target_col))
    return b.build(row_cap)


def run_unit(
    unit: TranslationUnit,
    doc: MappingDocument,
    conn: ConnectionSpec,
    options: EvalOptions = DEFAULT_OPTIONS,
) -> list[SolutionMapping]:
    rowset = execute_select(conn, unit.sql, timeout_ms=options.timeout_ms)
    if len(rowset.rows) > options.row_cap:
        raise EvalError(f"query exceeds the row cap of {options.row_cap}")
    out = []
    for raw in rowset.rows:
        cells = dict(zip(rowset.columns, raw))
        row: SolutionMapping = {}
        ok = True
        for var, ctor in unit.recipe.items():
            term = _construct(ctor, cells, unit.labels, doc)
            if term is None:
                ok = False
                break
            row[var] = term
        if ok:
            out.append(row)
    return out


def _construct(ctor: Constructor, cells, labels, doc: MappingDocument) -> Optional[RdfTerm]:
    if isinstance(ctor, ConstantTerm):
        return ctor.term
    if isinstance(ctor, LiteralFromColumn):
        cell = cells.get(labels[(ctor.alias, ctor.column)])
        if cell is None:
            return None
        return bridge_literal(cell, ctor.datatype)
    cm = doc.class_map(ctor.class_map)
    values = {}
    for col in cm.pattern_columns():
        cell = cells.get(labels[(ctor.alias, col)])
        if cell is None:
            return None
        values[col] = cell
    return _subject_iri(doc, cm, values)


def _evaluate_bgp(node: Bgp, doc, conn, options) -> list[SolutionMapping]:
    if not node.patterns:
        return [{}]
    rows: list[SolutionMapping] = []
    for unit in translate_bgp(node.patterns, doc, options.row_cap):
        rows.extend(run_unit(unit, doc, conn, options))
    # a BGP over a set-semantics graph yields each solution exactly once
    return distinct_rows(rows)


def evaluate(
    a: Algebra,
    doc: MappingDocument,
    conn: ConnectionSpec,
    options: EvalOptions = DEFAULT_OPTIONS,
) -> SolutionSequence:
    """Evaluate a Service-free algebra tree against the live store."""

    def walk(node) -> list[SolutionMapping]:
        if isinstance(node, Bgp):
            return _evaluate_bgp(node, doc, conn, options)
        if isinstance(node, Filter):
            return filter_rows(node.expr, walk(node.child))
        if isinstance(node, Join):
            return join_rows(walk(node.left), walk(node.right))
        if isinstance(node, Union):
            return walk(node.left) + walk(node.right)
        if isinstance(node, Bind):
            return bind_rows(node.var.name, node.value, walk(node.child))
        if isinstance(node, Project):
            return project_rows(node.variables, walk(node.child))
        if isinstance(node, Distinct):
            return distinct_rows(walk(node.child))
        if isinstance(node, Slice):
            return slice_rows(walk(node.child), node.limit, node.offset)
        if isinstance(node, Service):
            raise UnsupportedFeatureError("SERVICE in local evaluation")
        raise EvalError(f"cannot evaluate node {type(node).__name__}")

    rows = walk(a)
    return SolutionSequence(_result_variables(a), rows)


def _result_variables(a: Algebra) -> list[str]:
    node = a
    if isinstance(node, Slice):
        node = node.child
    if isinstance(node, Distinct):
        node = node.child
    if isinstance(node, Project):
        return list(node.variables)
    return scope_variables(a)


# --- materialization (the oracle) and dereferencing ---------------------------

def _graph_prefixes(doc: MappingDocument) -> dict[str, str]:
    prefixes = {
        "vocab": doc.vocab,
        "rdf": RDF,
        "xsd": XSD,
    }
    for label, ns in doc.extra_prefixes:
        prefixes[label] = ns
    return prefixes


def _table_select(cm: ClassMap, columns: list[str]) -> SqlSelect:
    labels = [SelectColumn("t0", col, col) for col in columns]
    return SqlSelect(columns=tuple(labels), base=TableRef(cm.table, "t0"))


def _row_triples(doc: MappingDocument, cm: ClassMap, cells: dict[str, object]) -> list[Triple]:
    subject = _subject_iri(doc, cm, cells)
    if subject is None:
        return []
    triples = [Triple(subject, Iri(RDF_TYPE), Iri(cm.class_iri))]
    for bridge in cm.datatype_bridges():
        cell = cells.get(bridge.source.column)
        if cell is None:
            continue
        triples.append(
            Triple(subject, Iri(bridge.property_iri), bridge_literal(cell, bridge.datatype))
        )
    return triples


def _join_select(cm: ClassMap, target: ClassMap, joins) -> SqlSelect:
    columns = []
    seen = set()
    for col in cm.pattern_columns():
        label = f"s_{col}"
        columns.append(SelectColumn("t0", col, label))
        seen.add(label)
    for col in target.pattern_columns():
        columns.append(SelectColumn("t1", col, f"o_{col}"))
    on = tuple(ColumnEq("t0", lc, "t1", tc) for lc, tc in joins)
    return SqlSelect(
        columns=tuple(columns),
        base=TableRef(cm.table, "t0"),
        joins=(JoinClause(TableRef(target.table, "t1"), on),),
    )


def materialize(
    doc: MappingDocument,
    conn: ConnectionSpec,
    options: EvalOptions = DEFAULT_OPTIONS,
) -> Graph:
    """Build the whole virtual graph (test oracle; production never does)."""
    triples: list[Triple] = []
    for cm in doc.class_maps:
        columns = list(dict.fromkeys(
            cm.pattern_columns() + [b.source.column for b in cm.datatype_bridges()]
        ))
        rowset = execute_select(conn, _table_select(cm, columns), timeout_ms=options.timeout_ms)
        for raw in rowset.rows:
            cells = dict(zip(rowset.columns, raw))
            triples.extend(_row_triples(doc, cm, cells))
        for bridge in cm.object_bridges():
            target = doc.class_map(bridge.source.target_class_map)
            rowset = execute_select(
                conn, _join_select(cm, target, bridge.source.joins), timeout_ms=options.timeout_ms
            )
            for raw in rowset.rows:
                cells = dict(zip(rowset.columns, raw))
                subject = _subject_iri(
                    doc, cm, {c[2:]: v for c, v in cells.items() if c.startswith("s_")}
                )
                obj = _subject_iri(
                    doc, target, {c[2:]: v for c, v in cells.items() if c.startswith("o_")}
                )
                if subject is not None and obj is not None:
                    triples.append(Triple(subject, Iri(bridge.property_iri), obj))
    return Graph(triples, _graph_prefixes(doc))


def describe(
    iri: Iri,
    doc: MappingDocument,
    conn: ConnectionSpec,
    options: EvalOptions = DEFAULT_OPTIONS,
) -> Graph:
    """All triples about one resource; raises ResourceNotFound when the IRI
    fits no class map pattern, returns an empty graph when the row is gone."""
    matched = None
    for cm in doc.class_maps:
        raw = _match_subject(doc, cm, iri.value)
        if raw is not None:
            matched = (cm, raw)
            break
    if matched is None:
        raise ResourceNotFound(iri.value)
    cm, raw = matched
    prefixes = _graph_prefixes(doc)
    conjuncts = []
    for col, lexical in raw.items():
        datatype = _column_datatype(cm, col)
        if not is_canonical_lexical(lexical, datatype):
            return Graph((), prefixes)
        conjuncts.append(Compare("t0", col, "=", lexical_to_cell(lexical, datatype)))
    columns = list(dict.fromkeys(
        cm.pattern_columns() + [b.source.column for b in cm.datatype_bridges()]
    ))
    select = _table_select(cm, columns)
    select = SqlSelect(
        columns=select.columns, base=select.base, where=tuple(conjuncts)
    )
    rowset = execute_select(conn, select, timeout_ms=options.timeout_ms)
    triples: list[Triple] = []
    for rawrow in rowset.rows:
        cells = dict(zip(rowset.columns, rawrow))
        triples.extend(_row_triples(doc, cm, cells))
    for bridge in cm.object_bridges():
        target = doc.class_map(bridge.source.target_class_map)
        join = _join_select(cm, target, bridge.source.joins)
        join = SqlSelect(
            columns=join.columns, base=join.base, joins=join.joins,
            where=tuple(conjuncts),
        )
        for rawrow in execute_select(conn, join, timeout_ms=options.timeout_ms).rows:
            cells = dict(zip([c.label for c in join.columns], rawrow))
            subject = _subject_iri(doc, cm, {c[2:]: v for c, v in cells.items() if c.startswith("s_")})
            obj = _subject_iri(doc, target, {c[2:]: v for c, v in cells.items() if c.startswith("o_")})
            if subject == iri and obj is not None:
                triples.append(Triple(subject, Iri(bridge.property_iri), obj))
    if options.describe_incoming and triples:
        triples.extend(_incoming_triples(iri, cm, raw, doc, conn, options))
    return Graph(triples, prefixes)


def _incoming_triples(iri, target_cm, raw, doc, conn, options) -> list[Triple]:
    out = []
    for cm in doc.class_maps:
        for bridge in cm.object_bridges():
            if bridge.source.target_class_map != target_cm.name:
                continue
            join = _join_select(cm, target_cm, bridge.source.joins)
            where = []
            for col, lexical in raw.items():
                datatype = _column_datatype(target_cm, col)
                where.append(Compare("t1", col, "=", lexical_to_cell(lexical, datatype)))
            join = SqlSelect(columns=join.columns, base=join.base, joins=join.joins,
                             where=tuple(where))
            for rawrow in execute_select(conn, join, timeout_ms=options.timeout_ms).rows:
                cells = dict(zip([c.label for c in join.columns], rawrow))
                subject = _subject_iri(doc, cm, {c[2:]: v for c, v in cells.items() if c.startswith("s_")})
                if subject is not None:
                    out.append(Triple(subject, Iri(bridge.property_iri), iri))
    return out


def list_subjects(doc: MappingDocument, conn: ConnectionSpec,
                  options: EvalOptions = DEFAULT_OPTIONS) -> list[tuple[Iri, Iri]]:
    """Every subject IRI with its class, sorted (drives the /all listing)."""
    out = []
    for cm in doc.class_maps:
        select = SqlSelect(
            columns=tuple(SelectColumn("t0", c, c) for c in cm.pattern_columns()),
            base=TableRef(cm.table, "t0"),
            distinct=True,
        )
        rowset = execute_select(conn, select, timeout_ms=options.timeout_ms)
        for raw in rowset.rows:
            cells = dict(zip(rowset.columns, raw))
            subject = _subject_iri(doc, cm, cells)
            if subject is not None:
                out.append((subject, Iri(cm.class_iri)))
    out.sort(key=lambda pair: pair[0].value)
    return out
