"""Relational store access: DSN contract, schema introspection, and
read-only SQL generation/execution.

The embedded reference backend is sqlite (DSN `sqlite:<path>`, relative
paths resolved by the caller). Connections are opened in read-only mode
and every executed statement goes through a global statement log, which
the test suite audits to prove the whole stack never writes. Network
database engines can plug in behind the same DSN contract.
"""

from __future__ import annotations

import os
import sqlite3
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

MASKED_USERNAME = "XXXXXXXX"
MASKED_PASSWORD = "XXXXX"

DB_USER_ENV = "S3AI_DB_USER"
DB_PASS_ENV = "S3AI_DB_PASS"
SQL_LOG_ENV = "S3AI_SQL_LOG"


class StoreError(RuntimeError):
    """Connection failure or a statement the store rejected."""


@dataclass(frozen=True)
class ConnectionSpec:
    """Locator plus credentials; credentials never appear in repr or logs."""

    locator: str
    username: str = ""
    password: str = ""
    properties: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if not self.locator:
            raise ValueError("connection locator must be non-empty")

    def __repr__(self) -> str:
        return f"ConnectionSpec(locator={self.locator!r}, username={MASKED_USERNAME!r}, password={MASKED_PASSWORD!r})"

    @property
    def engine(self) -> str:
        return self.locator.split(":", 1)[0]

    @property
    def path(self) -> str:
        return self.locator.split(":", 1)[1] if ":" in self.locator else ""

    def props(self) -> dict[str, str]:
        return dict(self.properties)

    def resolved_against(self, directory: str | Path) -> "ConnectionSpec":
        """Resolve a relative sqlite path against a mapping file's directory."""
        if self.engine != "sqlite":
            return self
        p = Path(self.path)
        if p.is_absolute() or self.path == ":memory:":
            return self
        return ConnectionSpec(
            f"sqlite:{Path(directory) / p}", self.username, self.password, self.properties
        )


# --- catalog ----------------------------------------------------------------

@dataclass(frozen=True)
class Column:
    name: str
    sql_type: str
    nullable: bool = True


@dataclass(frozen=True)
class ForeignKey:
    columns: tuple[str, ...]
    referenced_table: str
    referenced_columns: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.columns) != len(self.referenced_columns):
            raise ValueError("foreign key endpoints must have equal arity")


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]
    primary_key: tuple[str, ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()

    def __post_init__(self) -> None:
        names = {c.name for c in self.columns}
        if len(names) != len(self.columns):
            raise ValueError(f"duplicate column names in table {self.name}")
        for pk in self.primary_key:
            if pk not in names:
                raise ValueError(f"primary key column {pk} missing from {self.name}")
        for fk in self.foreign_keys:
            for col in fk.columns:
                if col not in names:
                    raise ValueError(f"foreign key column {col} missing from {self.name}")

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(f"no column {name} in table {self.name}")

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


@dataclass(frozen=True)
class RelationalCatalog:
    tables: tuple[Table, ...] = ()

    def __post_init__(self) -> None:
        names = [t.name for t in self.tables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate table names in catalog")
        by_name = {t.name: t for t in self.tables}
        for t in self.tables:
            for fk in t.foreign_keys:
                target = by_name.get(fk.referenced_table)
                if target is None:
                    raise ValueError(
                        f"{t.name} references unknown table {fk.referenced_table}"
                    )
                target_cols = {c.name for c in target.columns}
                for col in fk.referenced_columns:
                    if col not in target_cols:
                        raise ValueError(
                            f"{t.name} references unknown column "
                            f"{fk.referenced_table}.{col}"
                        )

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(f"no table {name}")

    def has_table(self, name: str) -> bool:
        return any(t.name == name for t in self.tables)


# --- select model -----------------------------------------------------------

@dataclass(frozen=True)
class SelectColumn:
    table_alias: str
    column: str
    label: str


@dataclass(frozen=True)
class TableRef:
    table: str
    alias: str


@dataclass(frozen=True)
class ColumnEq:
    left_alias: str
    left_column: str
    right_alias: str
    right_column: str


@dataclass(frozen=True)
class Compare:
    alias: str
    column: str
    op: str  # = != < <= > >=
    value: object

    def __post_init__(self) -> None:
        if self.op not in ("=", "!=", "<", "<=", ">", ">="):
            raise ValueError(f"unsupported comparison operator {self.op!r}")


@dataclass(frozen=True)
class LikeCond:
    alias: str
    column: str
    pattern: str


@dataclass(frozen=True)
class NullCond:
    alias: str
    column: str
    is_null: bool


Condition = ColumnEq | Compare | LikeCond | NullCond


@dataclass(frozen=True)
class JoinClause:
    table: TableRef
    on: tuple[ColumnEq, ...] = ()


@dataclass(frozen=True)
class SqlSelect:
    """A read-only SELECT; the type cannot express writes or DDL."""

    columns: tuple[SelectColumn, ...]
    base: TableRef
    joins: tuple[JoinClause, ...] = ()
    where: tuple[Condition, ...] = ()
    distinct: bool = False
    limit: Optional[int] = None
    offset: Optional[int] = None

    def aliases(self) -> dict[str, str]:
        out = {self.base.alias: self.base.table}
        for j in self.joins:
            out[j.table.alias] = j.table.table
        return out


def validate_select(q: SqlSelect, catalog: RelationalCatalog) -> None:
    """Check every referenced table and column exists in the catalog."""
    aliases = q.aliases()
    for alias, table in aliases.items():
        if not catalog.has_table(table):
            raise ValueError(f"unknown table {table} (alias {alias})")

    def check(alias: str, column: str) -> None:
        if alias not in aliases:
            raise ValueError(f"unknown alias {alias}")
        catalog.table(aliases[alias]).column(column)

    for col in q.columns:
        check(col.table_alias, col.column)
    for j in q.joins:
        for eq in j.on:
            check(eq.left_alias, eq.left_column)
            check(eq.right_alias, eq.right_column)
    for cond in q.where:
        if isinstance(cond, ColumnEq):
            check(cond.left_alias, cond.left_column)
            check(cond.right_alias, cond.right_column)
        else:
            check(cond.alias, cond.column)


def _quote(identifier: str) -> str:
    return '"' + identifier.replace('"', '""') + '"'


def _qual(alias: str, column: str) -> str:
    return f"{_quote(alias)}.{_quote(column)}"


def _condition_sql(cond: Condition) -> str:
    if isinstance(cond, ColumnEq):
        return f"{_qual(cond.left_alias, cond.left_column)} = {_qual(cond.right_alias, cond.right_column)}"
    if isinstance(cond, Compare):
        op = "<>" if cond.op == "!=" else cond.op
        return f"{_qual(cond.alias, cond.column)} {op} ?"
    if isinstance(cond, LikeCond):
        return f"{_qual(cond.alias, cond.column)} LIKE ?"
    return f"{_qual(cond.alias, cond.column)} IS {'NULL' if cond.is_null else 'NOT NULL'}"


def render_sql(q: SqlSelect) -> str:
    """Deterministic ANSI SELECT text with `?` placeholders for all values."""
    cols = ", ".join(
        f"{_qual(c.table_alias, c.column)} AS {_quote(c.label)}" for c in q.columns
    ) or "1 AS " + _quote("one")
    sql = ["SELECT DISTINCT" if q.distinct else "SELECT", cols, "FROM",
           f"{_quote(q.base.table)} AS {_quote(q.base.alias)}"]
    for j in q.joins:
        ref = f"{_quote(j.table.table)} AS {_quote(j.table.alias)}"
        if j.on:
            on = " AND ".join(_condition_sql(eq) for eq in j.on)
            sql.append(f"INNER JOIN {ref} ON {on}")
        else:
            sql.append(f"CROSS JOIN {ref}")
    if q.where:
        sql.append("WHERE " + " AND ".join(_condition_sql(c) for c in q.where))
    if q.limit is not None:
        sql.append(f"LIMIT {int(q.limit)}")
        if q.offset:
            sql.append(f"OFFSET {int(q.offset)}")
    elif q.offset:
        sql.append(f"LIMIT -1 OFFSET {int(q.offset)}")
    return " ".join(sql)


def bind_params(q: SqlSelect) -> tuple:
    params = []
    for cond in q.where:
        if isinstance(cond, Compare):
            params.append(cond.value)
        elif isinstance(cond, LikeCond):
            params.append(cond.pattern)
    return tuple(params)


# --- statement log ----------------------------------------------------------

class StatementLog:
    """Append-only record of every statement the stack hands to a store."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._statements: list[str] = []

    def record(self, sql: str) -> None:
        log_path = os.environ.get(SQL_LOG_ENV)
        with self._lock:
            self._statements.append(sql)
            if log_path:
                with open(log_path, "a", encoding="utf-8") as fh:
                    fh.write(sql.replace("\n", " ") + "\n")

    def statements(self) -> list[str]:
        with self._lock:
            return list(self._statements)


STATEMENT_LOG = StatementLog()


# --- execution --------------------------------------------------------------

@dataclass
class RowSet:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)


_ZERO_DATES = {"0000-00-00", "0000-00-00 00:00:00", "0000-00-00T00:00:00"}


def _normalize_cell(value):
    # vendor quirk contract: zero dates become NULL cells
    if isinstance(value, str) and value in _ZERO_DATES:
        return None
    return value


class _SqlitePool:
    """One sqlite connection per (thread, database file), opened read-only."""

    def __init__(self) -> None:
        self._local = threading.local()

    def connection(self, spec: ConnectionSpec, timeout_ms: int = 5000) -> sqlite3.Connection:
        cache = getattr(self._local, "conns", None)
        if cache is None:
            cache = {}
            self._local.conns = cache
        key = spec.locator
        conn = cache.get(key)
        if conn is not None:
            return conn
        path = spec.path
        if not path:
            raise StoreError(f"malformed sqlite DSN {spec.locator!r}")
        if path != ":memory:" and not Path(path).exists():
            raise StoreError(f"database file not found: {path}")
        try:
            if path == ":memory:":
                conn = sqlite3.connect(path, timeout=timeout_ms / 1000.0)
            else:
                uri = f"file:{path}?mode=ro"
                conn = sqlite3.connect(uri, uri=True, timeout=timeout_ms / 1000.0)
        except sqlite3.Error as exc:
            raise StoreError(f"cannot open {spec.locator}: {exc}") from exc
        cache[key] = conn
        return conn

    def close_all(self) -> None:
        cache = getattr(self._local, "conns", None)
        if cache:
            for conn in cache.values():
                conn.close()
            cache.clear()


_POOL = _SqlitePool()


def _execute(spec: ConnectionSpec, sql: str, params: Sequence = (), timeout_ms: int = 5000):
    if spec.engine != "sqlite":
        raise StoreError(f"unsupported store engine {spec.engine!r}")
    conn = _POOL.connection(spec, timeout_ms)
    STATEMENT_LOG.record(sql)
    try:
        return conn.execute(sql, tuple(params))
    except sqlite3.Error as exc:
        raise StoreError(f"store rejected statement: {exc}") from exc


def execute_select(spec: ConnectionSpec, q: SqlSelect, timeout_ms: int = 5000) -> RowSet:
    sql = render_sql(q)
    cursor = _execute(spec, sql, bind_params(q), timeout_ms)
    columns = tuple(c.label for c in q.columns) or ("one",)
    rows = [tuple(_normalize_cell(v) for v in row) for row in cursor.fetchall()]
    return RowSet(columns, rows)


def probe(spec: ConnectionSpec, timeout_ms: int = 5000) -> None:
    """Cheap reachability check used at endpoint startup."""
    _execute(spec, "SELECT 1", (), timeout_ms).fetchall()


def introspect(spec: ConnectionSpec, timeout_ms: int = 5000) -> RelationalCatalog:
    """Read the live schema: base tables, columns, primary and foreign keys.

    Uses sqlite's table-valued pragma functions so that even introspection
    stays SELECT-only. Tables come back name-sorted; two calls on an
    unchanged store return equal catalogs.
    """
    cursor = _execute(
        spec,
        "SELECT name FROM sqlite_master WHERE type = 'table' "
        "AND name NOT LIKE 'sqlite_%' ORDER BY name",
        (),
        timeout_ms,
    )
    names = [row[0] for row in cursor.fetchall()]
    collected = []
    pk_by_table: dict[str, tuple[str, ...]] = {}
    for name in names:
        info = _execute(
            spec, "SELECT cid, name, type, \"notnull\", pk FROM pragma_table_info(?) ORDER BY cid",
            (name,), timeout_ms,
        ).fetchall()
        columns = tuple(
            Column(col_name, col_type or "TEXT", nullable=not notnull)
            for _cid, col_name, col_type, notnull, _pk in info
        )
        pk_cols = [(pk, col_name) for _cid, col_name, _t, _n, pk in info if pk]
        primary_key = tuple(col for _, col in sorted(pk_cols))
        pk_by_table[name] = primary_key
        fk_rows = _execute(
            spec,
            "SELECT id, seq, \"table\", \"from\", \"to\" FROM pragma_foreign_key_list(?) "
            "ORDER BY id, seq",
            (name,), timeout_ms,
        ).fetchall()
        fks: dict[int, dict] = {}
        for fk_id, _seq, ref_table, from_col, to_col in fk_rows:
            entry = fks.setdefault(fk_id, {"table": ref_table, "cols": [], "refs": []})
            entry["cols"].append(from_col)
            entry["refs"].append(to_col)
        collected.append((name, columns, primary_key, fks))
    tables = []
    for name, columns, primary_key, fks in collected:
        foreign_keys = []
        for _fk_id, e in sorted(fks.items()):
            refs = e["refs"]
            if any(r is None for r in refs):
                # REFERENCES without columns targets the other table's primary key
                refs = list(pk_by_table.get(e["table"], ()))
            foreign_keys.append(ForeignKey(tuple(e["cols"]), e["table"], tuple(refs)))
        tables.append(Table(name, columns, primary_key, tuple(foreign_keys)))
    return RelationalCatalog(tuple(tables))


def credentials_from_env(username: str, password: str) -> tuple[str, str]:
    """Apply the S3AI_DB_USER / S3AI_DB_PASS environment overrides."""
    return os.environ.get(DB_USER_ENV, username), os.environ.get(DB_PASS_ENV, password)
