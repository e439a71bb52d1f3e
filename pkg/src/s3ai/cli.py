"""Command-line front for the whole deployment workflow.

Subcommands follow the deployment walkthrough: generate a mapping from a
live database, serve it as a SPARQL endpoint, align it with the reference
ontology, dump the virtual graph, query sites directly or federated, run
the gateway, build demo fixtures, and benchmark scalability. Exit codes:
0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import signal
import sys
import threading
from pathlib import Path

from . import bench as bench_mod
from .align import (
    AlignmentError,
    OntologyError,
    apply_alignment,
    load_ontology,
    read_alignment,
    suggest_alignment,
    write_alignment,
)
from .demo import FixtureSpec, build_fixtures, sized_spec
from .endpoint import EndpointConfig, EndpointStartupError, serve
from .federate import (
    FederationError,
    FederationOptions,
    evaluate_federated,
    load_registry,
    mediate,
    query_site,
)
from .gateway import GatewayConfig, GatewayStartupError, serve_gateway
from .mapping import (
    DEFAULT_BASE_IRI,
    MappingError,
    generate_mapping,
    load_mapping,
    parse_mapping,
    serialize_mapping,
    write_mapping,
)
from .relational import ConnectionSpec, StoreError, credentials_from_env, introspect
from .results_json import write_results_json
from .sparql import SparqlSyntaxError, UnsupportedFeatureError, parse_query
from .turtle import serialize_turtle
from .virtual import EvalError, materialize

USAGE_EXIT = 1
RUNTIME_EXIT = 2

_RUNTIME_ERRORS = (
    StoreError, MappingError, AlignmentError, OntologyError, FederationError,
    EndpointStartupError, GatewayStartupError, SparqlSyntaxError,
    UnsupportedFeatureError, EvalError, bench_mod.BenchError, OSError, ValueError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="s3ai", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("generate-mapping", help="introspect a database and emit its mapping file")
    p.add_argument("-o", dest="output", required=True, help="mapping file to write")
    p.add_argument("-u", dest="username", default="", help="database user")
    p.add_argument("-p", dest="password", default="", help="database password")
    p.add_argument("--base", default=DEFAULT_BASE_IRI, help="base IRI of the future endpoint")
    p.add_argument("--vocab", default=None, help="vocabulary namespace (default <base>vocab/)")
    p.add_argument("--unmasked", action="store_true",
                   help="store credentials in the file instead of masking them")
    p.add_argument("dsn", help="store locator, e.g. sqlite:path/to.db")

    p = sub.add_parser("serve", help="serve one mapping as a SPARQL endpoint")
    p.add_argument("-b", dest="base", required=True, help="public base IRI")
    p.add_argument("-p", dest="port", required=True, type=int)
    p.add_argument("--fast", action="store_true",
                   help="accepted for command fidelity; the engine is always on-the-fly")
    p.add_argument("--no-html", action="store_true", help="disable HTML views")
    p.add_argument("mapping", help="mapping file")

    p = sub.add_parser("align", help="suggest or apply a 2nd-level alignment")
    align_sub = p.add_subparsers(dest="align_command", metavar="suggest|apply")
    ps = align_sub.add_parser("suggest")
    ps.add_argument("-m", dest="mapping", required=True)
    ps.add_argument("-O", dest="ontology", required=True)
    ps.add_argument("-o", dest="output", required=True, help="alignment file to write")
    ps.add_argument("--threshold", type=float, default=0.5)
    pa = align_sub.add_parser("apply")
    pa.add_argument("-m", dest="mapping", required=True)
    pa.add_argument("-a", dest="alignment", required=True)
    pa.add_argument("-O", dest="ontology", required=True)
    pa.add_argument("-o", dest="output", required=True, help="rewritten mapping file")

    p = sub.add_parser("dump", help="materialize the whole virtual graph as Turtle")
    p.add_argument("--base", default=DEFAULT_BASE_IRI)
    p.add_argument("mapping")

    p = sub.add_parser("query", help="query one site, federated, or mediated")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--site", help="pass the query through to this registered site")
    mode.add_argument("--federated", action="store_true",
                      help="the query text contains SERVICE blocks")
    mode.add_argument("--mediated", action="store_true",
                      help="fan a reference-ontology query out to every active site")
    p.add_argument("--registry", required=True)
    p.add_argument("-f", dest="query_file", help="read the query from this file")
    p.add_argument("--partial", action="store_true",
                   help="tolerate unreachable sites (empty contribution plus warning)")
    p.add_argument("query", nargs="?", help="query text (alternative to -f)")

    p = sub.add_parser("serve-gateway", help="serve the federation gateway API")
    p.add_argument("--registry", required=True)
    p.add_argument("-p", dest="port", type=int, default=3030)
    p.add_argument("--static", default=None, help="directory with the browser console build")
    p.add_argument("--examples", default=None, help="JSON file with predefined queries")

    p = sub.add_parser("build-fixtures", help="build the two demo stores and support files")
    p.add_argument("--dest", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--triples", type=int, default=None,
                   help="size stores to about this many triples per site")

    p = sub.add_parser("bench", help="scalability harness over replicated sites")
    p.add_argument("--sites", default="1,2,4,8", help="comma-separated site counts")
    p.add_argument("--triples", type=int, default=bench_mod.DEFAULT_TRIPLES_PER_SITE)
    p.add_argument("--scale", type=int, default=1, help="divide the triple target by this")
    p.add_argument("--out", default=None, help="write CSV rows here")
    p.add_argument("--dest", default=None, help="scratch directory")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("-f", dest="query_files", action="append", default=[],
                   help="workload query file (repeatable)")
    return parser


def _read_query(args) -> str:
    if args.query_file:
        return Path(args.query_file).read_text(encoding="utf-8")
    if args.query:
        return args.query
    raise ValueError("no query given: pass text or -f FILE")


def _serve_until_interrupted(stop) -> None:
    done = threading.Event()

    def handler(_signum, _frame):
        done.set()

    signal.signal(signal.SIGINT, handler)
    signal.signal(signal.SIGTERM, handler)
    try:
        done.wait()
    finally:
        stop()


def _cmd_generate_mapping(args) -> int:
    username, password = credentials_from_env(args.username, args.password)
    conn = ConnectionSpec(args.dsn, username, password)
    catalog = introspect(conn)
    doc = generate_mapping(
        catalog, conn,
        base_iri=args.base,
        vocab_namespace=args.vocab,
        mask_credentials=not args.unmasked,
    )
    write_mapping(doc, args.output)
    print(f"wrote {args.output} ({len(doc.class_maps)} class maps)", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    base = args.base if args.base.endswith("/") else args.base + "/"
    handle = serve(EndpointConfig(
        base_iri=base,
        port=args.port,
        mapping_path=args.mapping,
        enable_html=not args.no_html,
    ))
    print(f"endpoint listening on port {handle.port} (base {base})", file=sys.stderr)
    _serve_until_interrupted(handle.stop)
    return 0


def _cmd_align(args) -> int:
    if args.align_command == "suggest":
        doc, _conn = load_mapping(args.mapping)
        onto = load_ontology(Path(args.ontology).read_text(encoding="utf-8"))
        alignment = suggest_alignment(
            [cm.class_iri for cm in doc.class_maps],
            [b.property_iri for cm in doc.class_maps for b in cm.bridges],
            onto,
            threshold=args.threshold,
        )
        write_alignment(alignment, args.output)
        print(f"wrote {args.output} ({len(alignment.correspondences)} suggestions); "
              "review before applying", file=sys.stderr)
        return 0
    if args.align_command == "apply":
        doc = parse_mapping(Path(args.mapping).read_text(encoding="utf-8"))
        onto = load_ontology(Path(args.ontology).read_text(encoding="utf-8"))
        rewritten = apply_alignment(doc, read_alignment(args.alignment), onto)
        write_mapping(rewritten, args.output)
        print(f"wrote {args.output}", file=sys.stderr)
        return 0
    raise ValueError("align needs 'suggest' or 'apply'")


def _cmd_dump(args) -> int:
    doc, conn = load_mapping(args.mapping, base_iri=args.base)
    sys.stdout.write(serialize_turtle(materialize(doc, conn)))
    return 0


def _cmd_query(args) -> int:
    registry = load_registry(args.registry)
    text = _read_query(args)
    if args.site:
        sys.stdout.write(query_site(registry, args.site, text))
        sys.stdout.write("\n")
        return 0
    warnings: list[str] = []
    opts = FederationOptions(partial_results=args.partial)
    ast = parse_query(text)
    if args.mediated:
        opts = FederationOptions(partial_results=args.partial, provenance_variable="site")
        ast = mediate(ast, registry, opts)
    seq = evaluate_federated(ast, registry, opts, warnings)
    sys.stdout.write(write_results_json(seq, indent=2))
    sys.stdout.write("\n")
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def _cmd_serve_gateway(args) -> int:
    handle = serve_gateway(GatewayConfig(
        registry_path=args.registry,
        port=args.port,
        static_dir=args.static,
        examples_path=args.examples,
    ))
    print(f"gateway listening on port {handle.port}", file=sys.stderr)
    _serve_until_interrupted(handle.stop)
    return 0


def _cmd_build_fixtures(args) -> int:
    spec = sized_spec(args.triples, seed=args.seed) if args.triples \
        else FixtureSpec(seed=args.seed)
    fixtures = build_fixtures(args.dest, spec)
    print(
        f"built {fixtures.root}: osticket {fixtures.os_expected_triples} triples, "
        f"glpi {fixtures.glpi_expected_triples} triples",
        file=sys.stderr,
    )
    return 0


def _cmd_bench(args) -> int:
    counts = [int(part) for part in args.sites.split(",") if part.strip()]
    workload = [Path(f).read_text(encoding="utf-8") for f in args.query_files] or None
    report = bench_mod.run_bench(
        counts,
        triples_per_site=args.triples,
        scale=args.scale,
        workload=workload,
        dest=Path(args.dest) if args.dest else None,
        repetitions=args.repetitions,
    )
    sys.stdout.write(report.table() + "\n")
    if args.out:
        Path(args.out).write_text(report.to_csv(), encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


_COMMANDS = {
    "generate-mapping": _cmd_generate_mapping,
    "serve": _cmd_serve,
    "align": _cmd_align,
    "dump": _cmd_dump,
    "query": _cmd_query,
    "serve-gateway": _cmd_serve_gateway,
    "build-fixtures": _cmd_build_fixtures,
    "bench": _cmd_bench,
}


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    if not args.command:
        parser.print_help(sys.stderr)
        return USAGE_EXIT
    handler = _COMMANDS[args.command]
    try:
        return handler(args)
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
