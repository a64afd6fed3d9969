"""Command-line entry points: serve, check, query, lower, import, export, rebuild.

Exit codes: 0 success (and no violations), 1 violations found or query
error, 2 usage or I/O error. Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from urllib.parse import unquote

from .markup import PageSource, parse_page
from .ontology import OntologyLoadError, load_ontology, validate_ontology
from .query import QuerySyntaxError, evaluate, parse_query, results_document
from .semantics import check_pages, lower_page
from .service import ServiceConfig, WikiState
from .store import QuadStore, format_quad
from .terms import Blank, Iri, Literal

EPOCH = "1970-01-01T00:00:00Z"


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(sys.argv[1:] if argv is None else argv))


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wikibridge")
    sub = parser.add_subparsers(dest="command", required=True)

    env = os.environ
    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument(
        "--data",
        type=Path,
        default=Path(env["WIKIBRIDGE_DATA"]) if "WIKIBRIDGE_DATA" in env else None,
        required="WIKIBRIDGE_DATA" not in env,
    )
    p.add_argument("--port", type=int, default=int(env.get("WIKIBRIDGE_PORT", 8731)))
    p.add_argument("--host", default=env.get("WIKIBRIDGE_HOST", "127.0.0.1"))
    p.add_argument(
        "--strict",
        action="store_true",
        default=env.get("WIKIBRIDGE_STRICT", "") in ("1", "true"),
        help="reject saves with violations by default",
    )
    p.add_argument("--token-ttl", type=float, default=float(env.get("WIKIBRIDGE_TOKEN_TTL", 86400.0)))
    p.add_argument(
        "--static",
        type=Path,
        default=Path(env["WIKIBRIDGE_STATIC"]) if "WIKIBRIDGE_STATIC" in env else None,
        help="directory of UI assets served at /ui",
    )
    p.add_argument("--init", action="store_true", help="scaffold a data directory with sample users")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("check", help="validate wiki files against an ontology")
    p.add_argument("files", nargs="+", type=Path)
    p.add_argument("--ontology", required=True, type=Path)
    p.add_argument("--data", type=Path, default=None, help="check in the context of a wiki data dir")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("query", help="evaluate a query over a wiki data dir")
    p.add_argument("--data", required=True, type=Path)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("-e", "--execute", help="query text")
    group.add_argument("-f", "--file", type=Path, help="file containing the query")
    p.add_argument("--entailment", action="store_true")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("lower", help="print the canonical N-Quads lowering of one file")
    p.add_argument("file", type=Path)
    p.add_argument("--title", required=True)
    p.add_argument("--namespace", default="Main")
    p.add_argument("--revision", type=int, default=1)
    p.add_argument("--author", default="cli")
    p.add_argument("--timestamp", default=EPOCH)
    p.set_defaults(func=cmd_lower)

    p = sub.add_parser("import", help="bulk-load .wiki files into a data dir and validate")
    p.add_argument("pages", type=Path, help="directory of .wiki files")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--namespace", default="Main")
    p.add_argument("--author", default="import")
    p.add_argument("--timestamp", default=EPOCH, help="ISO timestamp or 'now'")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("export", help="write the canonical N-Quads dump of a data dir")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("-o", "--output", type=Path, default=None, help="output file (default stdout)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("rebuild", help="re-derive the store and verify the rebuild invariant")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--write", action="store_true", help="update export.nq on drift")
    p.set_defaults(func=cmd_rebuild)

    return parser


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, hash_password, render_users

    if args.init:
        args.data.mkdir(parents=True, exist_ok=True)
        users_path = args.data / "users.auth"
        if not users_path.exists():
            users_path.write_text(
                render_users({u: hash_password(u) for u in ("admin", "alice", "bob", "carol")}),
                "utf-8",
            )
            print("wrote users.auth with sample users (password = user name)", file=sys.stderr)
        acl_path = args.data / "acl.conf"
        if not acl_path.exists():
            from .accesscontrol import DEFAULT_ACL

            acl_path.write_text(
                DEFAULT_ACL
                + "user admin groups admins\n"
                + "user alice groups specialists\n"
                + "user bob groups contributors\n"
                + "user carol groups readers\n"
                + "default read allow\n",
                "utf-8",
            )
    config = ServiceConfig(
        data_dir=args.data,
        host=args.host,
        port=args.port,
        strict_default=args.strict,
        token_ttl=args.token_ttl,
        static_dir=args.static,
    )
    state = WikiState.load(config)
    app = create_app(state)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _load_ontology_file(path: Path):
    try:
        return load_ontology(path.read_text("utf-8"))
    except OntologyLoadError as e:
        for err in e.errors:
            print(f"{path}:{err.line}: {err.kind}: {err.message}", file=sys.stderr)
        return None


def _page_source_for(path: Path, namespace: str) -> PageSource:
    return PageSource(unquote(path.stem), path.read_text("utf-8"), namespace)


def cmd_check(args) -> int:
    ont = _load_ontology_file(args.ontology)
    if ont is None:
        return 2
    for warning in validate_ontology(ont):
        print(f"ontology warning: {warning.message}", file=sys.stderr)

    context = QuadStore()
    if args.data is not None:
        state = WikiState.load(ServiceConfig(data_dir=args.data))
        context = state.store

    files = sorted(args.files)
    entries = []
    parse_failures: dict[Path, list] = {}
    for path in files:
        if not path.is_file():
            print(f"error: no such file: {path}", file=sys.stderr)
            return 2
        parsed = parse_page(_page_source_for(path, "Main"))
        if parsed.diagnostics:
            parse_failures[path] = list(parsed.diagnostics)
        lowered = lower_page(parsed, 0, "check", EPOCH)
        entries.append((path, parsed, lowered))

    reports = check_pages(
        [(parsed, lowered) for _, parsed, lowered in entries],
        ont,
        context,
        checked_at=EPOCH,
    )

    total = 0
    documents = []
    for (path, parsed, _), report in zip(entries, reports):
        diags = parse_failures.get(path, [])
        count = len(report.violations) + len(diags)
        total += count
        if args.format == "structured":
            doc = report.as_dict()
            doc["file"] = str(path)
            if diags:
                doc["diagnostics"] = [d.as_dict() for d in diags]
            documents.append(doc)
        else:
            noun = "violation" if count == 1 else "violations"
            print(f"{path}: {count} {noun}")
            for d in diags:
                print(f"  {d.kind.value} [{d.span.start}..{d.span.end}] {d.message}")
            for v in report.violations:
                where = f" [{v.span.start}..{v.span.end}]" if v.span else ""
                rule = f" ({v.rule_name})" if v.rule_name else ""
                print(f"  {v.kind.value}{rule}{where} {v.detail}")
    if args.format == "structured":
        print(json.dumps(documents, indent=2, sort_keys=True))
    return 1 if total else 0


def cmd_query(args) -> int:
    state = WikiState.load(ServiceConfig(data_dir=args.data))
    text = args.execute if args.execute is not None else args.file.read_text("utf-8")
    try:
        query = parse_query(text)
    except QuerySyntaxError as e:
        print(f"query error: {e}", file=sys.stderr)
        return 1
    result = evaluate(query, state.store, entailment=args.entailment)
    if args.format == "structured":
        print(json.dumps(results_document(result), indent=2, sort_keys=True))
        return 0
    header = [f"?{v}" for v in result.vars]
    rows = [[_render_cell(sol[v]) for v in result.vars] for sol in result.solutions]
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    print(f"({len(rows)} result{'s' if len(rows) != 1 else ''})", file=sys.stderr)
    return 0


def _render_cell(term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, Blank):
        return f"_:{term.id}"
    if isinstance(term, Literal):
        return term.lexical
    return str(term)


def cmd_lower(args) -> int:
    parsed = parse_page(
        PageSource(args.title, args.file.read_text("utf-8"), args.namespace)
    )
    if parsed.diagnostics:
        for d in parsed.diagnostics:
            print(
                f"{args.file}: {d.kind.value} [{d.span.start}..{d.span.end}] {d.message}",
                file=sys.stderr,
            )
        return 1
    lowered = lower_page(parsed, args.revision, args.author, args.timestamp)
    lines = sorted(format_quad(q) for q in lowered.quads + lowered.meta_quads)
    for line in lines:
        print(line)
    return 0


def cmd_import(args) -> int:
    if not args.pages.is_dir():
        print(f"error: not a directory: {args.pages}", file=sys.stderr)
        return 2
    files = sorted(args.pages.glob("*.wiki"))
    if not files:
        print(f"error: no .wiki files in {args.pages}", file=sys.stderr)
        return 2
    timestamp = args.timestamp
    if timestamp == "now":
        from .semantics import now_utc

        timestamp = now_utc()
    state = WikiState.load(ServiceConfig(data_dir=args.data))
    sources = []
    for path in files:
        source = _page_source_for(path, args.namespace)
        parsed = parse_page(source)
        if parsed.diagnostics:
            for d in parsed.diagnostics:
                print(
                    f"{path}: {d.kind.value} [{d.span.start}..{d.span.end}] {d.message}",
                    file=sys.stderr,
                )
            return 2
        sources.append(source)
    reports = state.bulk_import(sources, args.author, timestamp)
    total = sum(len(r.violations) for r in reports)
    flagged = sum(1 for r in reports if r.violations)
    (args.data / "export.nq").write_text(state.export_nquads(), "utf-8")
    print(
        f"imported {len(sources)} pages ({len(state.store)} quads); "
        f"{total} violations on {flagged} pages",
        file=sys.stderr,
    )
    return 1 if total else 0


def cmd_export(args) -> int:
    state = WikiState.load(ServiceConfig(data_dir=args.data))
    text = state.export_nquads()
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text, "utf-8")
        print(f"wrote {len(state.store)} quads to {args.output}", file=sys.stderr)
    return 0


def cmd_rebuild(args) -> int:
    state = WikiState.load(ServiceConfig(data_dir=args.data))
    text = state.export_nquads()
    baseline_path = args.data / "export.nq"
    if not baseline_path.exists():
        baseline_path.write_text(text, "utf-8")
        print(f"no baseline; wrote {baseline_path}", file=sys.stderr)
        return 0
    baseline = baseline_path.read_text("utf-8")
    if baseline == text:
        print(f"rebuild: zero drift ({len(state.store)} quads)", file=sys.stderr)
        return 0
    old = baseline.splitlines()
    new = text.splitlines()
    print(
        f"rebuild: drift detected ({len(old)} baseline quads, {len(new)} rebuilt)",
        file=sys.stderr,
    )
    if args.write:
        baseline_path.write_text(text, "utf-8")
        print(f"updated {baseline_path}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    main()
