"""The declarative RDB-to-RDF mapping language and its auto-generator.

A mapping document binds one database block to a set of class maps, one
per table: each class map owns a subject URI pattern over the table's key
columns plus property bridges for columns (datatype properties) and
foreign keys (object properties joining to the referenced class map).
Documents are themselves Turtle files in the mapping vocabulary namespace
and serialize canonically, so generated files are byte-stable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional
from urllib.parse import quote, unquote

from .relational import (
    MASKED_PASSWORD,
    MASKED_USERNAME,
    ConnectionSpec,
    RelationalCatalog,
)
from .terms import (
    RDF,
    RDF_TYPE,
    RDFS,
    XSD,
    XSD_BOOLEAN,
    XSD_DATETIME,
    XSD_DECIMAL,
    XSD_INTEGER,
    Iri,
    Literal,
    RdfTerm,
)
from .turtle import abbreviate, parse_turtle

D2RQ = "http://www.wiwiss.fu-berlin.de/suhl/bizer/D2RQ/0.1#"
JDBC = "http://d2rq.org/terms/jdbc/"

DEFAULT_BASE_IRI = "http://localhost:2020/"
RESOURCE_SEGMENT = "resource/"


class MappingError(ValueError):
    pass


# --- model -------------------------------------------------------------------

@dataclass(frozen=True)
class ColumnSource:
    table: str
    column: str

    @property
    def qualified(self) -> str:
        return f"{self.table}.{self.column}"


@dataclass(frozen=True)
class UriJoinSource:
    target_class_map: str
    joins: tuple[tuple[str, str], ...]  # (local column, target column) pairs


@dataclass(frozen=True)
class PropertyBridge:
    name: str
    property_iri: str
    source: ColumnSource | UriJoinSource
    datatype: Optional[str] = None  # None means plain string literal


@dataclass(frozen=True)
class ClassMap:
    name: str
    table: str
    uri_pattern: str
    class_iri: str
    definition_label: Optional[str] = None
    bridges: tuple[PropertyBridge, ...] = ()

    def __post_init__(self) -> None:
        for table, _col in pattern_references(self.uri_pattern):
            if table != self.table:
                raise MappingError(
                    f"uriPattern of {self.name} references foreign table {table}"
                )
        if not pattern_references(self.uri_pattern):
            raise MappingError(f"uriPattern of {self.name} has no column references")

    def pattern_columns(self) -> list[str]:
        return [col for _t, col in pattern_references(self.uri_pattern)]

    def datatype_bridges(self) -> list[PropertyBridge]:
        return [b for b in self.bridges if isinstance(b.source, ColumnSource)]

    def object_bridges(self) -> list[PropertyBridge]:
        return [b for b in self.bridges if isinstance(b.source, UriJoinSource)]


@dataclass(frozen=True)
class DatabaseBlock:
    connection: ConnectionSpec
    driver: Optional[str] = None
    jdbc_properties: tuple[tuple[str, str], ...] = ()
    name: str = "database"


@dataclass(frozen=True)
class MappingDocument:
    database: DatabaseBlock
    class_maps: tuple[ClassMap, ...] = ()
    base_iri: str = DEFAULT_BASE_IRI
    vocab_namespace: Optional[str] = None  # defaults to base_iri + "vocab/"
    extra_prefixes: tuple[tuple[str, str], ...] = ()
    mask_credentials: bool = True
    annotations: tuple[tuple[str, str, RdfTerm], ...] = ()

    def __post_init__(self) -> None:
        tables = [cm.table for cm in self.class_maps]
        if len(set(tables)) != len(tables):
            raise MappingError("more than one class map for the same table")
        names = [cm.name for cm in self.class_maps]
        if len(set(names)) != len(names):
            raise MappingError("duplicate class map names")
        by_name = set(names)
        for cm in self.class_maps:
            for bridge in cm.object_bridges():
                target = bridge.source.target_class_map
                if target not in by_name:
                    raise MappingError(
                        f"bridge {bridge.name} joins to unknown class map {target}"
                    )

    @property
    def vocab(self) -> str:
        return self.vocab_namespace or (self.base_iri + "vocab/")

    def class_map(self, name: str) -> ClassMap:
        for cm in self.class_maps:
            if cm.name == name:
                return cm
        raise KeyError(f"no class map {name}")

    def class_map_for_table(self, table: str) -> Optional[ClassMap]:
        for cm in self.class_maps:
            if cm.table == table:
                return cm
        return None

    def subject_root(self) -> str:
        return self.base_iri + RESOURCE_SEGMENT

    def with_base(self, base_iri: str) -> "MappingDocument":
        """Rebase the document (vocab namespace follows unless customized)."""
        vocab = self.vocab_namespace
        if vocab == self.base_iri + "vocab/":
            vocab = None
        return replace(self, base_iri=base_iri, vocab_namespace=vocab)


# --- URI patterns -------------------------------------------------------------

_PATTERN_REF = re.compile(r"@@([A-Za-z0-9_]+)\.([A-Za-z0-9_]+)@@")


def pattern_references(pattern: str) -> list[tuple[str, str]]:
    return [(m.group(1), m.group(2)) for m in _PATTERN_REF.finditer(pattern)]


def fill_pattern(pattern: str, values: dict[str, object]) -> Optional[str]:
    """Substitute column values (percent-encoded); None when a value is NULL."""
    out = []
    last = 0
    for m in _PATTERN_REF.finditer(pattern):
        out.append(pattern[last : m.start()])
        value = values.get(m.group(2))
        if value is None:
            return None
        out.append(quote(str(value), safe=""))
        last = m.end()
    out.append(pattern[last:])
    return "".join(out)


def match_pattern(pattern: str, local: str) -> Optional[dict[str, str]]:
    """Invert fill_pattern on the local part of a subject IRI."""
    regex_parts = []
    columns = []
    last = 0
    for m in _PATTERN_REF.finditer(pattern):
        regex_parts.append(re.escape(pattern[last : m.start()]))
        regex_parts.append("([^/]+)")
        columns.append(m.group(2))
        last = m.end()
    regex_parts.append(re.escape(pattern[last:]))
    m = re.fullmatch("".join(regex_parts), local)
    if m is None:
        return None
    return {col: unquote(text) for col, text in zip(columns, m.groups())}


def subject_iri(doc: MappingDocument, cm: ClassMap, values: dict[str, object]) -> Optional[Iri]:
    local = fill_pattern(cm.uri_pattern, values)
    return None if local is None else Iri(doc.subject_root() + local)


def parse_subject_iri(doc: MappingDocument, iri: str) -> Optional[tuple[ClassMap, dict[str, str]]]:
    root = doc.subject_root()
    if not iri.startswith(root):
        return None
    local = iri[len(root):]
    for cm in doc.class_maps:
        values = match_pattern(cm.uri_pattern, local)
        if values is not None:
            return cm, values
    return None


# --- column value conversions --------------------------------------------------

def xsd_datatype_for(sql_type: str) -> Optional[str]:
    """Map a SQL column type to the literal datatype used by bridges."""
    t = sql_type.strip().upper()
    if t.startswith("BOOL") or t.replace(" ", "").startswith("TINYINT(1)"):
        return XSD_BOOLEAN
    if "INT" in t:
        return XSD_INTEGER
    if any(word in t for word in ("DECIMAL", "NUMERIC", "REAL", "FLOAT", "DOUBLE")):
        return XSD_DECIMAL
    if any(word in t for word in ("DATE", "TIME")):
        return XSD_DATETIME
    return None


def cell_to_lexical(value, datatype: Optional[str]) -> str:
    """Lexical form of a database cell under a bridge datatype."""
    if datatype == XSD_BOOLEAN:
        return "true" if value not in (0, "0", False, "false") else "false"
    if datatype == XSD_INTEGER:
        try:
            return str(int(value))
        except (TypeError, ValueError):
            return str(value)
    return str(value)


def lexical_to_cell(lexical: str, datatype: Optional[str]):
    """Inverse of cell_to_lexical; raises ValueError on unparseable input."""
    if datatype == XSD_INTEGER:
        return int(lexical)
    if datatype == XSD_DECIMAL:
        return float(lexical)
    if datatype == XSD_BOOLEAN:
        if lexical in ("true", "1"):
            return 1
        if lexical in ("false", "0"):
            return 0
        raise ValueError(f"invalid boolean lexical {lexical!r}")
    return lexical


def is_canonical_lexical(lexical: str, datatype: Optional[str]) -> bool:
    """A bound literal can only match when its lexical form is the one the
    engine itself would produce for the underlying cell."""
    try:
        return cell_to_lexical(lexical_to_cell(lexical, datatype), datatype) == lexical
    except (TypeError, ValueError):
        return False


def bridge_literal(value, datatype: Optional[str]) -> Literal:
    return Literal(cell_to_lexical(value, datatype), datatype or (XSD + "string"))


# --- generation ----------------------------------------------------------------

def generate_mapping(
    catalog: RelationalCatalog,
    conn: ConnectionSpec,
    base_iri: str = DEFAULT_BASE_IRI,
    vocab_namespace: Optional[str] = None,
    mask_credentials: bool = True,
) -> MappingDocument:
    """1st-level mapping: one class map per table in the default vocabulary.

    Non-foreign-key columns (the primary key included) become datatype
    bridges `vocab:<table>_<column>`; each foreign key becomes an object
    bridge joining to the referenced table's class map. Tables without a
    primary key use all columns in the subject pattern.
    """
    doc_vocab = vocab_namespace or (base_iri + "vocab/")
    class_maps = []
    for table in sorted(catalog.tables, key=lambda t: t.name):
        key_columns = list(table.primary_key) or table.column_names()
        pattern = table.name + "/" + "/".join(
            f"@@{table.name}.{col}@@" for col in key_columns
        )
        fk_columns = {col for fk in table.foreign_keys for col in fk.columns}
        bridges = []
        for column in table.columns:
            if column.name in fk_columns:
                continue
            bridges.append(
                PropertyBridge(
                    name=f"{table.name}_{column.name}",
                    property_iri=doc_vocab + f"{table.name}_{column.name}",
                    source=ColumnSource(table.name, column.name),
                    datatype=xsd_datatype_for(column.sql_type),
                )
            )
        for fk in table.foreign_keys:
            suffix = "_".join(fk.columns)
            bridges.append(
                PropertyBridge(
                    name=f"{table.name}_{suffix}",
                    property_iri=doc_vocab + f"{table.name}_{suffix}",
                    source=UriJoinSource(
                        target_class_map=fk.referenced_table,
                        joins=tuple(zip(fk.columns, fk.referenced_columns)),
                    ),
                )
            )
        bridges.sort(key=lambda b: b.property_iri)
        class_maps.append(
            ClassMap(
                name=table.name,
                table=table.name,
                uri_pattern=pattern,
                class_iri=doc_vocab + table.name,
                definition_label=table.name,
                bridges=tuple(bridges),
            )
        )
    database = DatabaseBlock(
        connection=conn,
        driver=conn.props().get("driver", conn.engine + "3" if conn.engine == "sqlite" else conn.engine),
        jdbc_properties=(
            ("autoReconnect", "true"),
            ("zeroDateTimeBehavior", "convertToNull"),
        ),
    )
    return MappingDocument(
        database=database,
        class_maps=tuple(class_maps),
        base_iri=base_iri,
        vocab_namespace=vocab_namespace,
        mask_credentials=mask_credentials,
    )


def validate_document(doc: MappingDocument, catalog: RelationalCatalog) -> None:
    """Check that every table and column the document references exists."""
    for cm in doc.class_maps:
        if not catalog.has_table(cm.table):
            raise MappingError(f"class map {cm.name} maps missing table {cm.table}")
        table = catalog.table(cm.table)
        for col in cm.pattern_columns():
            table.column(col)
        for bridge in cm.bridges:
            if isinstance(bridge.source, ColumnSource):
                if bridge.source.table != cm.table:
                    raise MappingError(
                        f"bridge {bridge.name} references foreign table {bridge.source.table}"
                    )
                table.column(bridge.source.column)
            else:
                target_cm = doc.class_map(bridge.source.target_class_map)
                target = catalog.table(target_cm.table)
                for local_col, target_col in bridge.source.joins:
                    table.column(local_col)
                    target.column(target_col)


# --- serialization ---------------------------------------------------------------

_FIXED_PREFIXES = (
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("xsd", XSD),
    ("d2rq", D2RQ),
    ("jdbc", JDBC),
)


def _doc_prefixes(doc: MappingDocument) -> dict[str, str]:
    prefixes = {
        "map": doc.base_iri + "#",
        "db": doc.base_iri,
        "vocab": doc.vocab,
    }
    for label, ns in _FIXED_PREFIXES:
        prefixes[label] = ns
    for label, ns in doc.extra_prefixes:
        prefixes[label] = ns
    return prefixes


def _prefix_block(doc: MappingDocument) -> list[str]:
    lines = [
        "@prefix map: <#> .",
        "@prefix db: <> .",
    ]
    vocab = doc.vocab
    if vocab == doc.base_iri + "vocab/":
        lines.append("@prefix vocab: <vocab/> .")
    else:
        lines.append(f"@prefix vocab: <{vocab}> .")
    for label, ns in _FIXED_PREFIXES:
        lines.append(f"@prefix {label}: <{ns}> .")
    for label, ns in doc.extra_prefixes:
        lines.append(f"@prefix {label}: <{ns}> .")
    return lines


def _iri_text(iri: str, prefixes: dict[str, str]) -> str:
    short = abbreviate(iri, prefixes)
    return short if short is not None else f"<{iri}>"


def _quote_string(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_mapping(doc: MappingDocument) -> str:
    """Canonical Turtle for a mapping document.

    The prefix block and the database/class-map statement layout mirror the
    shape the auto-generator is documented to emit, so regenerated files can
    be compared byte for byte.
    """
    prefixes = _doc_prefixes(doc)
    lines = _prefix_block(doc)
    lines.append("")
    db = doc.database
    conn = db.connection
    username = MASKED_USERNAME if doc.mask_credentials else conn.username
    password = MASKED_PASSWORD if doc.mask_credentials else conn.password
    lines.append(f"map:{db.name} a d2rq:Database;")
    if db.driver:
        lines.append(f"\td2rq:jdbcDriver {_quote_string(db.driver)};")
    lines.append(f"\td2rq:jdbcDSN {_quote_string(conn.locator)};")
    lines.append(f"\td2rq:username {_quote_string(username)};")
    lines.append(f"\td2rq:password {_quote_string(password)};")
    for key, value in db.jdbc_properties:
        lines.append(f"\tjdbc:{key} {_quote_string(value)};")
    lines.append("\t.")
    for cm in sorted(doc.class_maps, key=lambda c: c.table):
        lines.append("")
        lines.append(f"# Table {cm.table}")
        lines.append(f"map:{cm.name} a d2rq:ClassMap;")
        lines.append(f"\td2rq:dataStorage map:{db.name};")
        lines.append(f"\td2rq:uriPattern {_quote_string(cm.uri_pattern)};")
        lines.append(f"\td2rq:class {_iri_text(cm.class_iri, prefixes)};")
        if cm.definition_label is not None:
            lines.append(f"\td2rq:classDefinitionLabel {_quote_string(cm.definition_label)};")
        lines.append("\t.")
        for bridge in sorted(cm.bridges, key=lambda b: b.property_iri):
            lines.append("")
            lines.append(f"map:{bridge.name} a d2rq:PropertyBridge;")
            lines.append(f"\td2rq:belongsToClassMap map:{cm.name};")
            lines.append(f"\td2rq:property {_iri_text(bridge.property_iri, prefixes)};")
            if isinstance(bridge.source, ColumnSource):
                lines.append(f"\td2rq:column {_quote_string(bridge.source.qualified)};")
                if bridge.datatype is not None:
                    lines.append(f"\td2rq:datatype {_iri_text(bridge.datatype, prefixes)};")
            else:
                target = doc.class_map(bridge.source.target_class_map)
                lines.append(f"\td2rq:refersToClassMap map:{target.name};")
                for local_col, target_col in bridge.source.joins:
                    join_text = f"{cm.table}.{local_col} => {target.table}.{target_col}"
                    lines.append(f"\td2rq:join {_quote_string(join_text)};")
            lines.append("\t.")
    for owner, predicate, obj in doc.annotations:
        lines.append("")
        obj_text = (
            _iri_text(obj.value, prefixes) if isinstance(obj, Iri)
            else _quote_string(obj.lexical if isinstance(obj, Literal) else str(obj))
        )
        lines.append(f"map:{owner} {_iri_text(predicate, prefixes)} {obj_text} .")
    return "\n".join(lines) + "\n"


# --- parsing ----------------------------------------------------------------------

_KNOWN_DATABASE_PROPS = {
    D2RQ + "jdbcDriver",
    D2RQ + "jdbcDSN",
    D2RQ + "username",
    D2RQ + "password",
}
_KNOWN_CLASSMAP_PROPS = {
    RDF_TYPE,
    D2RQ + "dataStorage",
    D2RQ + "uriPattern",
    D2RQ + "class",
    D2RQ + "classDefinitionLabel",
}
_KNOWN_BRIDGE_PROPS = {
    RDF_TYPE,
    D2RQ + "belongsToClassMap",
    D2RQ + "property",
    D2RQ + "column",
    D2RQ + "datatype",
    D2RQ + "refersToClassMap",
    D2RQ + "join",
}


def _local_name(iri: str, namespace: str) -> Optional[str]:
    return iri[len(namespace):] if iri.startswith(namespace) else None


def parse_mapping(text: str, base_iri: str = DEFAULT_BASE_IRI) -> MappingDocument:
    """Parse a mapping file; relative namespaces resolve against base_iri."""
    g = parse_turtle(text, base=base_iri)
    map_ns = g.prefixes.get("map", base_iri + "#")
    vocab_ns = g.prefixes.get("vocab", base_iri + "vocab/")

    def typed_subjects(class_iri: str) -> list[Iri]:
        subjects = [
            t.subject for t in g.matching(predicate=Iri(RDF_TYPE), object=Iri(class_iri))
            if isinstance(t.subject, Iri)
        ]
        return sorted(subjects, key=lambda s: s.value)

    def prop(subject: Iri, predicate: str) -> Optional[RdfTerm]:
        found = g.matching(subject=subject, predicate=Iri(predicate))
        return found[0].object if found else None

    def str_prop(subject: Iri, predicate: str) -> Optional[str]:
        term = prop(subject, predicate)
        return term.lexical if isinstance(term, Literal) else None

    databases = typed_subjects(D2RQ + "Database")
    if not databases:
        raise MappingError("mapping document has no database block")
    if len(databases) > 1:
        raise MappingError("mapping document has more than one database block")
    db_subject = databases[0]
    locator = str_prop(db_subject, D2RQ + "jdbcDSN")
    if not locator:
        raise MappingError("database block has no DSN")
    username = str_prop(db_subject, D2RQ + "username") or ""
    password = str_prop(db_subject, D2RQ + "password") or ""
    masked = username == MASKED_USERNAME or password == MASKED_PASSWORD
    driver = str_prop(db_subject, D2RQ + "jdbcDriver")
    jdbc_props = []
    annotations: list[tuple[str, str, RdfTerm]] = []
    for t in g.matching(subject=db_subject):
        local = _local_name(t.predicate.value, JDBC)
        if local is not None:
            jdbc_props.append((local, t.object.lexical if isinstance(t.object, Literal) else str(t.object)))
        elif t.predicate.value not in _KNOWN_DATABASE_PROPS and t.predicate.value != RDF_TYPE:
            annotations.append(("database", t.predicate.value, t.object))
    db_name = _local_name(db_subject.value, map_ns) or "database"
    database = DatabaseBlock(
        connection=ConnectionSpec(
            locator,
            "" if masked else username,
            "" if masked else password,
        ),
        driver=driver,
        jdbc_properties=tuple(sorted(jdbc_props)),
        name=db_name,
    )

    bridge_rows = []
    for subject in typed_subjects(D2RQ + "PropertyBridge"):
        owner = prop(subject, D2RQ + "belongsToClassMap")
        property_iri = prop(subject, D2RQ + "property")
        if not isinstance(owner, Iri) or not isinstance(property_iri, Iri):
            raise MappingError(f"bridge {subject.value} lacks owner or property")
        name = _local_name(subject.value, map_ns) or subject.value
        column = str_prop(subject, D2RQ + "column")
        refers = prop(subject, D2RQ + "refersToClassMap")
        joins = [
            t.object.lexical
            for t in g.matching(subject=subject, predicate=Iri(D2RQ + "join"))
            if isinstance(t.object, Literal)
        ]
        datatype_term = prop(subject, D2RQ + "datatype")
        datatype = datatype_term.value if isinstance(datatype_term, Iri) else None
        for t in g.matching(subject=subject):
            if t.predicate.value not in _KNOWN_BRIDGE_PROPS:
                annotations.append((name, t.predicate.value, t.object))
        bridge_rows.append((name, owner, property_iri, column, refers, joins, datatype))

    class_maps = []
    classmap_names = set()
    for subject in typed_subjects(D2RQ + "ClassMap"):
        name = _local_name(subject.value, map_ns)
        if name is None:
            raise MappingError(f"class map {subject.value} outside the map namespace")
        pattern = str_prop(subject, D2RQ + "uriPattern")
        if not pattern:
            raise MappingError(f"class map {name} has no uriPattern")
        refs = pattern_references(pattern)
        if not refs:
            raise MappingError(f"class map {name} has a constant uriPattern")
        table = refs[0][0]
        class_term = prop(subject, D2RQ + "class")
        class_iri = class_term.value if isinstance(class_term, Iri) else vocab_ns + table
        for t in g.matching(subject=subject):
            if t.predicate.value not in _KNOWN_CLASSMAP_PROPS:
                annotations.append((name, t.predicate.value, t.object))
        classmap_names.add(name)
        class_maps.append(
            (name, table, pattern, class_iri, str_prop(subject, D2RQ + "classDefinitionLabel"), subject)
        )

    built = []
    for name, table, pattern, class_iri, label, subject in sorted(class_maps, key=lambda c: c[1]):
        bridges = []
        for bname, owner, property_iri, column, refers, joins, datatype in bridge_rows:
            if owner != subject:
                continue
            if column:
                if "." not in column:
                    raise MappingError(f"bridge {bname} has unqualified column {column!r}")
                col_table, col_name = column.split(".", 1)
                source: ColumnSource | UriJoinSource = ColumnSource(col_table, col_name)
            elif isinstance(refers, Iri):
                target_name = _local_name(refers.value, map_ns)
                if target_name is None or target_name not in classmap_names:
                    raise MappingError(f"bridge {bname} joins to unknown class map")
                pairs = []
                for join_text in joins:
                    pairs.append(_parse_join(join_text, table, bname))
                if not pairs:
                    raise MappingError(f"bridge {bname} has refersToClassMap but no join")
                source = UriJoinSource(target_name, tuple(pairs))
            else:
                raise MappingError(f"bridge {bname} has neither column nor join")
            bridges.append(PropertyBridge(bname, property_iri.value, source, datatype))
        bridges.sort(key=lambda b: b.property_iri)
        built.append(ClassMap(name, table, pattern, class_iri, label, tuple(bridges)))

    extra = tuple(
        (label, ns)
        for label, ns in sorted(g.prefixes.items())
        if label not in ("map", "db", "vocab")
        and (label, ns) not in _FIXED_PREFIXES
    )
    return MappingDocument(
        database=database,
        class_maps=tuple(built),
        base_iri=base_iri,
        vocab_namespace=None if vocab_ns == base_iri + "vocab/" else vocab_ns,
        extra_prefixes=extra,
        mask_credentials=masked,
        annotations=tuple(annotations),
    )


def _parse_join(join_text: str, local_table: str, bridge_name: str) -> tuple[str, str]:
    for arrow in ("=>", "<=", "="):
        if arrow in join_text:
            left, right = (part.strip() for part in join_text.split(arrow, 1))
            break
    else:
        raise MappingError(f"bridge {bridge_name} has malformed join {join_text!r}")
    try:
        left_table, left_col = left.split(".", 1)
        right_table, right_col = right.split(".", 1)
    except ValueError:
        raise MappingError(f"bridge {bridge_name} has malformed join {join_text!r}")
    if left_table == local_table:
        return (left_col, right_col)
    if right_table == local_table:
        return (right_col, left_col)
    raise MappingError(
        f"bridge {bridge_name} join {join_text!r} does not involve table {local_table}"
    )


def load_mapping(path: str | Path, base_iri: str = DEFAULT_BASE_IRI) -> tuple[MappingDocument, ConnectionSpec]:
    """Read a mapping file and resolve a relative store path beside it."""
    p = Path(path)
    doc = parse_mapping(p.read_text(encoding="utf-8"), base_iri=base_iri)
    conn = doc.database.connection.resolved_against(p.parent)
    return doc, conn


def write_mapping(doc: MappingDocument, path: str | Path) -> None:
    Path(path).write_text(serialize_mapping(doc), encoding="utf-8")
