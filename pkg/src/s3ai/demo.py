"""Helpdesk demo fixtures: two heterogeneous ticketing stores, the shared
helpdesk reference ontology, and the curated alignment files.

The first store mimics an osTicket installation (one wide ost_ticket
table); the second mimics a GLPI installation (tickets plus a separate
solutions table linked by a foreign key), so the two sites are genuinely
schema-heterogeneous. Generation is deterministic: the same seed yields
byte-identical database files and therefore identical query answers.
The seeded ticket 1149 ("No Video" error, closed, priority 2, Phone) is
the fixed point many golden tests look at.
"""

from __future__ import annotations

import random
import sqlite3
from dataclasses import dataclass, field, replace
from pathlib import Path

from .align import HDO_NAMESPACE, apply_alignment, load_ontology, read_alignment
from .mapping import (
    DEFAULT_BASE_IRI,
    MappingDocument,
    generate_mapping,
    serialize_mapping,
    write_mapping,
)
from .relational import ConnectionSpec, introspect

DUL = "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#"

ONTOLOGY_TURTLE = """\
@prefix hdo: <http://www.samos.gr/ontologies/helpdeskOnto.owl#> .
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix dul: <http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#> .
@prefix rov: <http://www.w3.org/ns/regorg#> .
@prefix org: <http://www.w3.org/ns/org#> .
@prefix gr: <http://purl.org/goodrelations/v1#> .
@prefix prov: <http://www.w3.org/ns/prov#> .

hdo:ItDepartment a owl:Class ;
\trdfs:label "IT department" ;
\trdfs:subClassOf rov:RegisteredOrganization, org:OrganizationalUnit .

hdo:ItSupportTicket a owl:Class ;
\trdfs:label "IT support ticket" ;
\trdfs:subClassOf dul:Diagnosis ;
\tdul:associatedWith hdo:ItSupportTask, gr:ProductOrService ;
\tprov:wasGeneratedBy hdo:ItDepartment .

hdo:ItSupportTask a owl:Class ;
\trdfs:label "IT support task" ;
\trdfs:subClassOf dul:Task .

hdo:ticketId a owl:DatatypeProperty ;
\trdfs:label "ticket id" ;
\trdfs:domain hdo:ItSupportTicket ;
\trdfs:range xsd:integer .

hdo:ticketTitle a owl:DatatypeProperty ;
\trdfs:label "ticket title" ;
\trdfs:domain hdo:ItSupportTicket ;
\trdfs:range xsd:string .

hdo:ticketStatus a owl:DatatypeProperty ;
\trdfs:label "ticket status" ;
\trdfs:domain hdo:ItSupportTicket .

hdo:solutionText a owl:DatatypeProperty ;
\trdfs:label "solution text" ;
\trdfs:domain hdo:ItSupportTask .

dul:associatedWith a rdf:Property ;
\trdfs:label "associated with" .
"""

_VOCAB = DEFAULT_BASE_IRI + "vocab/"

OSTICKET_ALIGNMENT_ROWS = (
    (_VOCAB + "ost_ticket", HDO_NAMESPACE + "ItSupportTicket", 0.3333, "manual"),
    (_VOCAB + "ost_ticket_ticket_id", HDO_NAMESPACE + "ticketId", 1.0, "lexical"),
    (_VOCAB + "ost_ticket_title", HDO_NAMESPACE + "ticketTitle", 1.0, "lexical"),
    (_VOCAB + "ost_ticket_status", HDO_NAMESPACE + "ticketStatus", 1.0, "lexical"),
)

GLPI_ALIGNMENT_ROWS = (
    (_VOCAB + "glpi_tickets", HDO_NAMESPACE + "ItSupportTicket", 1.0, "manual"),
    (_VOCAB + "glpi_tickets_id", HDO_NAMESPACE + "ticketId", 1.0, "manual"),
    (_VOCAB + "glpi_tickets_name", HDO_NAMESPACE + "ticketTitle", 1.0, "manual"),
    (_VOCAB + "glpi_tickets_status", HDO_NAMESPACE + "ticketStatus", 1.0, "manual"),
    (_VOCAB + "glpi_ticketsolutions", HDO_NAMESPACE + "ItSupportTask", 1.0, "manual"),
    (_VOCAB + "glpi_ticketsolutions_content", HDO_NAMESPACE + "solutionText", 1.0, "manual"),
    (_VOCAB + "glpi_ticketsolutions_tickets_id", DUL + "associatedWith", 1.0, "manual"),
)

NO_VIDEO_QUERY = """\
PREFIX hdo: <http://www.samos.gr/ontologies/helpdeskOnto.owl#>
SELECT ?t ?title WHERE {
  ?t a hdo:ItSupportTicket ;
     hdo:ticketTitle ?title .
  FILTER regex(?title, "No Video")
}
"""

NO_VIDEO_SOLUTIONS_QUERY = """\
PREFIX hdo: <http://www.samos.gr/ontologies/helpdeskOnto.owl#>
PREFIX dul: <http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#>
SELECT ?task ?text WHERE {
  ?task dul:associatedWith ?t ;
        hdo:solutionText ?text .
  ?t hdo:ticketTitle ?title .
  FILTER regex(?title, "No Video")
}
"""

_TITLES = (
    "printer not responding",
    "VPN drops every hour",
    "cannot open shared folder",
    "keyboard types wrong characters",
    "email stuck in outbox",
    "screen flickers under load",
    "application crashes on save",
    "password reset request",
    "slow network in records office",
    "scanner driver missing",
)
_STATUSES = ("open", "closed")
_SOURCES = ("Phone", "Email", "Web")
_NAMES = (
    "Athanasakis Iraklis", "Papadopoulou Eleni", "Georgiou Kostas",
    "Karali Maria", "Vlachos Nikos", "Stavrou Anna",
)


@dataclass(frozen=True)
class FixtureSpec:
    """Deterministic sizing of one demo deployment."""

    seed: int = 0
    extra_tickets: int = 6          # osticket rows beyond the seeded 1149
    extra_glpi_tickets: int = 5     # glpi rows beyond the seeded "No Video" one
    extra_solutions: int = 4        # glpi solution rows beyond the seeded one
    privacy_mask: tuple[str, ...] = ()  # "table.column" entries dropped from mappings


@dataclass
class DemoFixtures:
    root: Path
    os_db: Path
    glpi_db: Path
    os_mapping: Path
    glpi_mapping: Path
    os_mapping_aligned: Path
    glpi_mapping_aligned: Path
    ontology: Path
    os_alignment: Path
    glpi_alignment: Path
    registry: Path
    queries: dict[str, Path] = field(default_factory=dict)
    os_expected_triples: int = 0
    glpi_expected_triples: int = 0

    @property
    def os_conn(self) -> ConnectionSpec:
        return ConnectionSpec(f"sqlite:{self.os_db}")

    @property
    def glpi_conn(self) -> ConnectionSpec:
        return ConnectionSpec(f"sqlite:{self.glpi_db}")


def _ts(rng: random.Random, year: int = 2013) -> str:
    month = rng.randint(1, 12)
    day = rng.randint(1, 28)
    return (
        f"{year:04d}-{month:02d}-{day:02d}"
        f"T{rng.randint(0, 23):02d}:{rng.randint(0, 59):02d}:{rng.randint(0, 59):02d}"
    )


OSTICKET_DDL = """\
CREATE TABLE ost_ticket (
  ticket_id INTEGER PRIMARY KEY,
  email TEXT,
  name TEXT,
  title TEXT,
  status TEXT,
  priority_id INTEGER,
  source TEXT,
  ip_address TEXT,
  helptopic TEXT,
  phone TEXT,
  phone_ext TEXT,
  staff_id INTEGER,
  dept_id INTEGER,
  topic_id INTEGER,
  isanswered BOOLEAN,
  isoverdue BOOLEAN,
  created DATETIME,
  closed DATETIME,
  updated DATETIME,
  lastmessage DATETIME,
  lastresponse DATETIME
);
"""

SEED_TICKET_1149 = {
    "ticket_id": 1149,
    "email": "h.athanasakis@samos.gr",
    "name": "Athanasakis Iraklis",
    "title": '"No Video" error',
    "status": "closed",
    "priority_id": 2,
    "source": "Phone",
    "ip_address": "10.129.46.92",
    "helptopic": "",
    "phone": "",
    "phone_ext": "",
    "staff_id": 0,
    "dept_id": 1,
    "topic_id": 0,
    "isanswered": 1,
    "isoverdue": 0,
    "created": "2013-04-05T09:38:14",
    "closed": "2013-04-05T09:38:59",
    "updated": "2013-04-05T09:38:59",
    "lastmessage": "2013-04-05T09:38:14",
    "lastresponse": "2013-04-05T09:38:56",
}


def _insert(con: sqlite3.Connection, table: str, row: dict) -> None:
    cols = ", ".join(row)
    marks = ", ".join("?" for _ in row)
    con.execute(f"INSERT INTO {table} ({cols}) VALUES ({marks})", tuple(row.values()))


def build_osticket_store(path: Path, spec: FixtureSpec) -> int:
    """Create the osticket-like store; returns the expected triple count of
    its first-level mapping (after the privacy mask)."""
    rng = random.Random(spec.seed)
    if path.exists():
        path.unlink()
    con = sqlite3.connect(path)
    con.executescript(OSTICKET_DDL)
    masked = {c.split(".", 1)[1] for c in spec.privacy_mask if c.startswith("ost_ticket.")}
    rows = [dict(SEED_TICKET_1149)]
    for i in range(spec.extra_tickets):
        created = _ts(rng)
        closed = rng.random() < 0.5
        row = {
            "ticket_id": 1200 + i,
            "email": f"user{rng.randint(1, 40)}@samos.gr",
            "name": rng.choice(_NAMES),
            "title": rng.choice(_TITLES),
            "status": "closed" if closed else "open",
            "priority_id": rng.randint(1, 4),
            "source": rng.choice(_SOURCES),
            "ip_address": f"10.129.{rng.randint(0, 60)}.{rng.randint(1, 250)}",
            "helptopic": rng.choice(["", "hardware", "network", "software"]),
            "phone": rng.choice(["", f"22730{rng.randint(10000, 99999)}"]),
            "phone_ext": "",
            "staff_id": rng.randint(0, 5),
            "dept_id": rng.randint(1, 3),
            "topic_id": rng.randint(0, 9),
            "isanswered": int(rng.random() < 0.7),
            "isoverdue": int(rng.random() < 0.2),
            "created": created,
            "closed": created if closed else None,
            "updated": created,
            "lastmessage": created,
            "lastresponse": created if rng.random() < 0.8 else None,
        }
        rows.append(row)
    expected = 0
    for row in rows:
        _insert(con, "ost_ticket", row)
        expected += 1  # the type triple
        expected += sum(
            1 for col, v in row.items() if v is not None and col not in masked
        )
    con.commit()
    con.close()
    return expected


GLPI_DDL = """\
CREATE TABLE glpi_tickets (
  id INTEGER PRIMARY KEY,
  name TEXT,
  content TEXT,
  status TEXT,
  priority INTEGER,
  urgency INTEGER,
  cost REAL,
  requester TEXT,
  date DATETIME,
  solvedate DATETIME
);
CREATE TABLE glpi_ticketsolutions (
  id INTEGER PRIMARY KEY,
  tickets_id INTEGER REFERENCES glpi_tickets(id),
  content TEXT,
  status TEXT,
  date_creation DATETIME
);
"""

SEED_GLPI_TICKET = {
    "id": 23,
    "name": 'Monitor reports "No Video" on boot',
    "content": "Workstation powers on but the monitor shows a No Video message.",
    "status": "solved",
    "priority": 3,
    "urgency": 2,
    "cost": 42.5,
    "requester": "k.georgiou@ikaria.gr",
    "date": "2013-05-10T08:12:00",
    "solvedate": "2013-05-10T09:00:00",
}

SEED_GLPI_SOLUTION = {
    "id": 5,
    "tickets_id": 23,
    "content": "Reseated the VGA cable and replaced the display adapter.",
    "status": "approved",
    "date_creation": "2013-05-10T08:55:00",
}


def build_glpi_store(path: Path, spec: FixtureSpec) -> int:
    rng = random.Random(spec.seed + 1)
    if path.exists():
        path.unlink()
    con = sqlite3.connect(path)
    con.executescript(GLPI_DDL)
    masked = set(spec.privacy_mask)
    ticket_rows = [dict(SEED_GLPI_TICKET)]
    for i in range(spec.extra_glpi_tickets):
        opened = _ts(rng)
        solved = rng.random() < 0.6
        ticket_rows.append({
            "id": 100 + i,
            "name": rng.choice(_TITLES),
            "content": f"Reported issue {i}: {rng.choice(_TITLES)}.",
            "status": "solved" if solved else "new",
            "priority": rng.randint(1, 5),
            "urgency": rng.randint(1, 5),
            "cost": round(rng.uniform(0, 300), 2) if rng.random() < 0.8 else None,
            "requester": f"user{rng.randint(1, 30)}@ikaria.gr",
            "date": opened,
            "solvedate": opened if solved else None,
        })
    solution_rows = [dict(SEED_GLPI_SOLUTION)]
    ticket_ids = [r["id"] for r in ticket_rows]
    for i in range(spec.extra_solutions):
        solution_rows.append({
            "id": 50 + i,
            "tickets_id": rng.choice(ticket_ids),
            "content": f"Applied fix {i}: {rng.choice(_TITLES)} resolved.",
            "status": rng.choice(["approved", "pending"]),
            "date_creation": _ts(rng),
        })
    expected = 0
    for row in ticket_rows:
        _insert(con, "glpi_tickets", row)
        expected += 1 + sum(
            1 for col, v in row.items()
            if v is not None and f"glpi_tickets.{col}" not in masked
        )
    existing = set(ticket_ids)
    for row in solution_rows:
        _insert(con, "glpi_ticketsolutions", row)
        expected += 1  # type triple
        expected += sum(
            1 for col, v in row.items()
            if v is not None and col != "tickets_id"
            and f"glpi_ticketsolutions.{col}" not in masked
        )
        if row["tickets_id"] in existing:
            expected += 1  # the object triple through the foreign key
    con.commit()
    con.close()
    return expected


def drop_masked_bridges(doc: MappingDocument, mask: tuple[str, ...]) -> MappingDocument:
    """The privacy hook: remove bridges whose column is in the mask list."""
    if not mask:
        return doc
    masked = set(mask)
    new_maps = []
    for cm in doc.class_maps:
        for col in cm.pattern_columns():
            if f"{cm.table}.{col}" in masked:
                raise ValueError(f"cannot mask key column {cm.table}.{col}")
        bridges = tuple(
            b for b in cm.bridges
            if not (hasattr(b.source, "qualified") and b.source.qualified in masked)
        )
        new_maps.append(replace(cm, bridges=bridges))
    return replace(doc, class_maps=tuple(new_maps))


def _write_alignment_file(path: Path, rows) -> None:
    lines = ["# source\ttarget\tconfidence\torigin"]
    for source, target, confidence, origin in rows:
        lines.append(f"{source}\t{target}\t{confidence:g}\t{origin}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_fixtures(dest: str | Path, spec: FixtureSpec = FixtureSpec()) -> DemoFixtures:
    """Build both stores plus ontology, alignments, mappings and demo queries.

    Mapping files carry store paths relative to `dest`, so the directory is
    relocatable; endpoints resolve them against the mapping file location.
    """
    root = Path(dest)
    root.mkdir(parents=True, exist_ok=True)
    fixtures = DemoFixtures(
        root=root,
        os_db=root / "osticket.db",
        glpi_db=root / "glpi.db",
        os_mapping=root / "mappingOSTicket.ttl",
        glpi_mapping=root / "mappingGLPI.ttl",
        os_mapping_aligned=root / "mappingOSTicket.hdo.ttl",
        glpi_mapping_aligned=root / "mappingGLPI.hdo.ttl",
        ontology=root / "helpdesk_onto.ttl",
        os_alignment=root / "osticket.align",
        glpi_alignment=root / "glpi.align",
        registry=root / "registry.txt",
    )
    fixtures.os_expected_triples = build_osticket_store(fixtures.os_db, spec)
    fixtures.glpi_expected_triples = build_glpi_store(fixtures.glpi_db, spec)
    fixtures.ontology.write_text(ONTOLOGY_TURTLE, encoding="utf-8")
    _write_alignment_file(fixtures.os_alignment, OSTICKET_ALIGNMENT_ROWS)
    _write_alignment_file(fixtures.glpi_alignment, GLPI_ALIGNMENT_ROWS)

    onto = load_ontology(ONTOLOGY_TURTLE)
    for db, mapping_path, aligned_path, align_path in (
        (fixtures.os_db, fixtures.os_mapping, fixtures.os_mapping_aligned, fixtures.os_alignment),
        (fixtures.glpi_db, fixtures.glpi_mapping, fixtures.glpi_mapping_aligned, fixtures.glpi_alignment),
    ):
        catalog = introspect(ConnectionSpec(f"sqlite:{db}"))
        doc = generate_mapping(catalog, ConnectionSpec(f"sqlite:{db.name}"))
        doc = drop_masked_bridges(doc, spec.privacy_mask)
        write_mapping(doc, mapping_path)
        aligned = apply_alignment(doc, read_alignment(align_path), onto)
        write_mapping(aligned, aligned_path)

    fixtures.registry.write_text(
        "# site\tservice IRI\tactive\ttimeout ms\n"
        "samos\thttp://localhost:2020/sparql\ttrue\t10000\n"
        "ikaria\thttp://localhost:2021/sparql\ttrue\t10000\n",
        encoding="utf-8",
    )
    queries = root / "queries"
    queries.mkdir(exist_ok=True)
    (queries / "novideo.rq").write_text(NO_VIDEO_QUERY, encoding="utf-8")
    (queries / "novideo_solutions.rq").write_text(NO_VIDEO_SOLUTIONS_QUERY, encoding="utf-8")
    fixtures.queries = {
        "novideo": queries / "novideo.rq",
        "novideo_solutions": queries / "novideo_solutions.rq",
    }
    return fixtures


def sized_spec(triples_per_site: int, seed: int = 0) -> FixtureSpec:
    """Pick row counts so each site materializes about the requested number
    of triples (22 per osticket row; 14 per glpi ticket incl. solutions)."""
    os_rows = max(1, round(triples_per_site / 22))
    glpi_tickets = max(1, round(triples_per_site / 14))
    return FixtureSpec(
        seed=seed,
        extra_tickets=os_rows - 1,
        extra_glpi_tickets=glpi_tickets - 1,
        extra_solutions=max(0, glpi_tickets // 2 - 1),
    )


def serialize_for_golden(doc: MappingDocument) -> str:
    """Serialization used by golden-file comparisons (credentials masked)."""
    return serialize_mapping(replace(doc, mask_credentials=True))
