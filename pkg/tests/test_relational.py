from __future__ import annotations

import random
import re
import sqlite3

import pytest

from s3ai.relational import (
    Compare,
    ConnectionSpec,
    JoinClause,
    LikeCond,
    NullCond,
    RelationalCatalog,
    SelectColumn,
    SqlSelect,
    StoreError,
    Table,
    TableRef,
    bind_params,
    execute_select,
    introspect,
    probe,
    render_sql,
    validate_select,
    Column,
    ColumnEq,
)


def _make_db(tmp_path, script: str) -> ConnectionSpec:
    path = tmp_path / "db.sqlite"
    con = sqlite3.connect(path)
    con.executescript(script)
    con.commit()
    con.close()
    return ConnectionSpec(f"sqlite:{path}")


def test_introspect_empty_database(tmp_path):
    spec = _make_db(tmp_path, "")
    assert introspect(spec) == RelationalCatalog(())


def test_introspect_osticket_fixture(os_site):
    _doc, conn = os_site
    catalog = introspect(conn)
    names = [t.name for t in catalog.tables]
    assert names == ["ost_ticket"]
    table = catalog.table("ost_ticket")
    assert table.primary_key == ("ticket_id",)
    columns = set(table.column_names())
    assert {"email", "status", "created", "closed"} <= columns


def test_introspect_foreign_key_arity(tmp_path):
    spec = _make_db(tmp_path, """
        CREATE TABLE departments (id INTEGER PRIMARY KEY, name TEXT);
        CREATE TABLE tickets (
            ticket_id INTEGER PRIMARY KEY,
            dept_id INTEGER REFERENCES departments(id)
        );
    """)
    catalog = introspect(spec)
    (fk,) = catalog.table("tickets").foreign_keys
    assert fk.columns == ("dept_id",)
    assert fk.referenced_table == "departments"
    assert fk.referenced_columns == ("id",)


def test_introspect_is_idempotent(tmp_path):
    spec = _make_db(tmp_path, "CREATE TABLE a (x INTEGER PRIMARY KEY, y TEXT);")
    assert introspect(spec) == introspect(spec)


def test_connection_failure(tmp_path):
    with pytest.raises(StoreError):
        probe(ConnectionSpec(f"sqlite:{tmp_path}/missing.db"))


def test_credentials_never_in_repr():
    spec = ConnectionSpec("sqlite:x.db", "alice", "s3cret")
    assert "s3cret" not in repr(spec) and "alice" not in repr(spec)


def test_render_simple_select():
    q = SqlSelect(
        columns=(SelectColumn("t", "ticket_id", "c0"),),
        base=TableRef("ost_ticket", "t"),
    )
    assert render_sql(q) == 'SELECT "t"."ticket_id" AS "c0" FROM "ost_ticket" AS "t"'


def test_render_single_placeholder_per_value():
    q = SqlSelect(
        columns=(SelectColumn("t", "ticket_id", "c0"),),
        base=TableRef("ost_ticket", "t"),
        where=(Compare("t", "status", "=", "closed"),),
    )
    sql = render_sql(q)
    assert sql.count("?") == 1
    assert bind_params(q) == ("closed",)
    assert "closed" not in sql  # values are bound, never inlined


_SQL_FORBIDDEN = re.compile(
    r"\b(INSERT|UPDATE|DELETE|DROP|CREATE|ALTER|REPLACE|ATTACH|PRAGMA|VACUUM)\b", re.I
)


def check_select_only(sql: str, params: tuple) -> None:
    """Minimal SQL checker: select-only, balanced quoting, placeholder count."""
    assert sql.startswith("SELECT "), sql
    assert _SQL_FORBIDDEN.search(sql) is None, sql
    assert sql.count('"') % 2 == 0, sql
    assert sql.count("?") == len(params), sql


def _random_select(rng: random.Random) -> SqlSelect:
    tables = ["alpha", "beta", "gamma"]
    base = TableRef(rng.choice(tables), "t0")
    joins = []
    aliases = ["t0"]
    for i in range(rng.randint(0, 2)):
        alias = f"t{i + 1}"
        on = ()
        if rng.random() < 0.8:
            on = (ColumnEq(rng.choice(aliases), "id", alias, "ref_id"),)
        joins.append(JoinClause(TableRef(rng.choice(tables), alias), on))
        aliases.append(alias)
    where = []
    for _ in range(rng.randint(0, 3)):
        roll = rng.random()
        alias = rng.choice(aliases)
        if roll < 0.5:
            where.append(Compare(alias, "name", rng.choice(["=", "<", ">="]),
                                 rng.choice(["x", 5, 2.5])))
        elif roll < 0.75:
            where.append(LikeCond(alias, "name", "%vid%"))
        else:
            where.append(NullCond(alias, "name", rng.random() < 0.5))
    columns = tuple(
        SelectColumn(rng.choice(aliases), rng.choice(["id", "name"]), f"c{i}")
        for i in range(rng.randint(1, 4))
    )
    return SqlSelect(
        columns=columns, base=base, joins=tuple(joins), where=tuple(where),
        distinct=rng.random() < 0.5,
        limit=rng.choice([None, 10]),
        offset=rng.choice([0, 5]) if rng.random() < 0.3 else None,
    )


def test_randomized_selects_pass_the_checker():
    rng = random.Random(42)
    for _ in range(300):
        q = _random_select(rng)
        check_select_only(render_sql(q), bind_params(q))


def test_select_type_cannot_express_writes():
    # the model has no statement kind other than SELECT; the only free-text
    # fields are identifiers, which are always quoted
    q = SqlSelect(
        columns=(SelectColumn('x"; DROP TABLE a; --', "id", "c0"),),
        base=TableRef('b"; DELETE FROM a; --', "t"),
    )
    sql = render_sql(q)
    assert sql.startswith("SELECT ")
    assert '""' in sql  # embedded quotes are doubled, not closed


def test_execute_select_empty_table(tmp_path):
    spec = _make_db(tmp_path, "CREATE TABLE empty_t (a INTEGER PRIMARY KEY, b TEXT);")
    q = SqlSelect(columns=(SelectColumn("t", "a", "c0"),), base=TableRef("empty_t", "t"))
    assert execute_select(spec, q).rows == []


def test_execute_select_demo_row(os_site):
    _doc, conn = os_site
    q = SqlSelect(
        columns=(SelectColumn("t", "ticket_id", "c0"), SelectColumn("t", "status", "c1")),
        base=TableRef("ost_ticket", "t"),
        where=(Compare("t", "ticket_id", "=", 1149),),
    )
    assert execute_select(conn, q).rows == [(1149, "closed")]


def test_nulls_preserved(tmp_path):
    spec = _make_db(tmp_path, """
        CREATE TABLE t (a INTEGER PRIMARY KEY, b TEXT);
        INSERT INTO t VALUES (1, NULL);
    """)
    q = SqlSelect(columns=(SelectColumn("t", "b", "c0"),), base=TableRef("t", "t"))
    assert execute_select(spec, q).rows == [(None,)]


def test_zero_dates_become_null_cells(tmp_path):
    spec = _make_db(tmp_path, """
        CREATE TABLE t (a INTEGER PRIMARY KEY, d DATETIME);
        INSERT INTO t VALUES (1, '0000-00-00 00:00:00'), (2, '2013-04-05T09:38:59');
    """)
    q = SqlSelect(columns=(SelectColumn("t", "d", "c0"),), base=TableRef("t", "t"))
    cells = execute_select(spec, q).rows
    assert set(cells) == {(None,), ("2013-04-05T09:38:59",)}


def test_full_scan_matches_store_dump(tmp_path):
    script = "CREATE TABLE t (a INTEGER PRIMARY KEY, b TEXT, c REAL);\n"
    rng = random.Random(7)
    rows = [(i, rng.choice(["x", "y", None]), rng.random()) for i in range(50)]
    for a, b, c in rows:
        b_sql = "NULL" if b is None else f"'{b}'"
        script += f"INSERT INTO t VALUES ({a}, {b_sql}, {c});\n"
    spec = _make_db(tmp_path, script)
    q = SqlSelect(
        columns=(SelectColumn("t", "a", "a"), SelectColumn("t", "b", "b"),
                 SelectColumn("t", "c", "c")),
        base=TableRef("t", "t"),
    )
    got = sorted(execute_select(spec, q).rows)
    con = sqlite3.connect(tmp_path / "db.sqlite")
    expected = sorted(con.execute("SELECT a, b, c FROM t").fetchall())
    con.close()
    assert got == expected


def test_validate_select_catches_unknown_columns():
    catalog = RelationalCatalog((Table("t", (Column("a", "INTEGER"),), ("a",)),))
    good = SqlSelect(columns=(SelectColumn("x", "a", "c0"),), base=TableRef("t", "x"))
    validate_select(good, catalog)
    bad = SqlSelect(columns=(SelectColumn("x", "nope", "c0"),), base=TableRef("t", "x"))
    with pytest.raises(Exception):
        validate_select(bad, catalog)


def test_read_only_connection_rejects_writes(os_site):
    _doc, conn = os_site
    from s3ai.relational import _POOL
    raw = _POOL.connection(conn)
    with pytest.raises(sqlite3.OperationalError):
        raw.execute("INSERT INTO ost_ticket (ticket_id) VALUES (9999)")
