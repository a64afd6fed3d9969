"""HTTP facade: revisioned page storage, validation, query, authentication.

Source of truth is the page-file tree under the data directory; the quad
store is derived from it on startup and kept in sync on every save, so it
can always be rebuilt. Writes are serialized by one lock; readers see
pre- or post-write snapshots, never an intermediate state.

Data directory layout::

    data/
      ontology.wbo     ontology DSL
      acl.conf         authorization rules and group memberships
      users.auth       user:<id> <salt>$<iterations>$<pbkdf2-sha256>
      pages/<ns>/<title>/<n>.wiki
      pages/<ns>/<title>/meta.json
      export.nq        canonical dump (written by the CLI)
"""

from __future__ import annotations

import hashlib
import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable
from urllib.parse import quote, unquote

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .accesscontrol import (
    DEFAULT_ACL,
    AclConfig,
    Action,
    Principal,
    authorize,
    load_acl,
    page_resource,
)
from .markup import PageSource, ParsedPage, is_valid_title, parse_page
from .ontology import Ontology, OntologyLoadError, load_ontology
from .query import QuerySyntaxError, evaluate, parse_query, results_document
from .semantics import (
    INFERRED_GRAPH,
    META_GRAPH,
    ValidationReport,
    check_page,
    check_pages,
    is_annotation_graph,
    lower_page,
    now_utc,
    rdfs_closure,
    revision_graph_iri,
)
from .store import Quad, QuadStore, format_quad

ANONYMOUS = "anonymous"

PBKDF2_ITERATIONS = 100_000


def hash_password(password: str, salt: bytes | None = None, iterations: int = PBKDF2_ITERATIONS) -> str:
    if salt is None:
        salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return f"{salt.hex()}${iterations}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        salt_hex, iters_s, digest_hex = stored.split("$")
        salt = bytes.fromhex(salt_hex)
        iterations = int(iters_s)
    except ValueError:
        return False
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return secrets.compare_digest(digest.hex(), digest_hex)


class ApiError(Exception):
    def __init__(self, status: int, payload: dict):
        super().__init__(payload.get("error", "error"))
        self.status = status
        self.payload = payload


@dataclass
class ServiceConfig:
    data_dir: Path
    host: str = "127.0.0.1"
    port: int = 8731
    strict_default: bool = False
    token_ttl: float = 86400.0  # idle seconds
    static_dir: Path | None = None
    clock: Callable[[], str] = now_utc  # ISO-8601 UTC timestamps


@dataclass
class RevisionRecord:
    number: int
    author: str
    timestamp: str
    text: str
    report: dict
    ontology_hash: str

    def meta(self) -> dict:
        return {
            "number": self.number,
            "author": self.author,
            "timestamp": self.timestamp,
            "violations": len(self.report.get("violations", [])),
        }


@dataclass
class PageRecord:
    namespace: str
    title: str
    revisions: list[RevisionRecord] = field(default_factory=list)

    @property
    def current(self) -> RevisionRecord:
        return self.revisions[-1]


@dataclass
class TokenInfo:
    user: str
    last_used: float


class WikiState:
    """All wiki state plus the operations the HTTP layer exposes."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.lock = threading.RLock()
        self.pages: dict[tuple[str, str], PageRecord] = {}
        self.store = QuadStore()
        self.ontology: Ontology = Ontology()
        self.ontology_text: str = ""
        self.ontology_hash: str = ""
        self.acl: AclConfig = AclConfig()
        self.users: dict[str, str] = {}
        self.tokens: dict[str, TokenInfo] = {}
        self._fresh_reports: dict[tuple[str, str], dict] = {}

    # -- loading ------------------------------------------------------------

    @classmethod
    def load(cls, config: ServiceConfig) -> "WikiState":
        state = cls(config)
        data = config.data_dir
        data.mkdir(parents=True, exist_ok=True)
        onto_path = data / "ontology.wbo"
        state.ontology_text = onto_path.read_text("utf-8") if onto_path.exists() else ""
        state.ontology = load_ontology(state.ontology_text)
        state.ontology_hash = _sha256(state.ontology_text)
        acl_path = data / "acl.conf"
        state.acl = load_acl(acl_path.read_text("utf-8")) if acl_path.exists() else load_acl(DEFAULT_ACL)
        users_path = data / "users.auth"
        if users_path.exists():
            state.users = _parse_users(users_path.read_text("utf-8"))
        state._load_pages()
        state.rebuild_store()
        return state

    def _load_pages(self) -> None:
        pages_dir = self.config.data_dir / "pages"
        if not pages_dir.is_dir():
            return
        for ns_dir in sorted(pages_dir.iterdir()):
            if not ns_dir.is_dir():
                continue
            ns = unquote(ns_dir.name)
            for page_dir in sorted(ns_dir.iterdir()):
                meta_path = page_dir / "meta.json"
                if not meta_path.is_file():
                    continue
                meta = json.loads(meta_path.read_text("utf-8"))
                record = PageRecord(meta["namespace"], meta["title"])
                for rev in meta["revisions"]:
                    text = (page_dir / f"{rev['number']}.wiki").read_text("utf-8")
                    record.revisions.append(
                        RevisionRecord(
                            rev["number"],
                            rev["author"],
                            rev["timestamp"],
                            text,
                            rev["report"],
                            rev.get("ontology_hash", ""),
                        )
                    )
                self.pages[(record.namespace, record.title)] = record

    def rebuild_store(self) -> None:
        """Re-derive the quad store from the current revisions."""
        with self.lock:
            self.store = QuadStore()
            for record in self.pages.values():
                rev = record.current
                parsed = parse_page(PageSource(record.title, rev.text, record.namespace))
                lowered = lower_page(parsed, rev.number, rev.author, rev.timestamp)
                for q in lowered.quads + lowered.meta_quads:
                    self.store.insert(q)
            self._recompute_inference()

    def _recompute_inference(self) -> None:
        self.store.drop_graph(INFERRED_GRAPH)
        annotation_quads = [q for q in self.store.quads() if is_annotation_graph(q.g)]
        for q in rdfs_closure(annotation_quads, self.ontology):
            self.store.insert(q)

    # -- persistence ----------------------------------------------------------

    def _page_dir(self, ns: str, title: str) -> Path:
        return self.config.data_dir / "pages" / quote(ns, safe="") / quote(title, safe="")

    def _persist_page(self, record: PageRecord) -> None:
        page_dir = self._page_dir(record.namespace, record.title)
        page_dir.mkdir(parents=True, exist_ok=True)
        newest = record.current
        path = page_dir / f"{newest.number}.wiki"
        if not path.exists():
            path.write_text(newest.text, "utf-8")
        meta = {
            "namespace": record.namespace,
            "title": record.title,
            "revisions": [
                {
                    "number": r.number,
                    "author": r.author,
                    "timestamp": r.timestamp,
                    "ontology_hash": r.ontology_hash,
                    "report": r.report,
                }
                for r in record.revisions
            ],
        }
        (page_dir / "meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", "utf-8"
        )

    # -- authentication -------------------------------------------------------

    def authenticate(self, user: str, password: str) -> dict:
        with self.lock:
            stored = self.users.get(user)
            if stored is None or not verify_password(password, stored):
                raise ApiError(401, {"error": "bad_credentials"})
            token = secrets.token_urlsafe(32)
            self.tokens[token] = TokenInfo(user, time.time())
            groups = sorted(self.acl.memberships.get(user, frozenset()))
            return {"token": token, "user": user, "groups": groups}

    def principal_for(self, bearer: str | None) -> Principal:
        with self.lock:
            if bearer is None:
                return self.acl.principal(ANONYMOUS)
            info = self.tokens.get(bearer)
            now = time.time()
            if info is None or now - info.last_used > self.config.token_ttl:
                self.tokens.pop(bearer, None)
                raise ApiError(401, {"error": "bad_token"})
            info.last_used = now
            return self.acl.principal(info.user)

    def _authorize(self, principal: Principal, action: Action, resource: str) -> None:
        decision = authorize(principal, action, resource, self.acl)
        if not decision.allowed:
            raise ApiError(
                403,
                {
                    "error": "forbidden",
                    "action": action.value,
                    "resource": resource,
                    "matched_rule": decision.matched_rule.render()
                    if decision.matched_rule
                    else None,
                },
            )

    # -- pages ---------------------------------------------------------------

    @staticmethod
    def _validate_name(ns: str, title: str) -> None:
        if not is_valid_title(ns) or not is_valid_title(title):
            raise ApiError(400, {"error": "bad_name", "namespace": ns, "title": title})

    def list_pages(self, principal: Principal) -> dict:
        with self.lock:
            self._authorize(principal, Action.READ, "*")
            pages = [
                {
                    "namespace": r.namespace,
                    "title": r.title,
                    "revision": r.current.number,
                }
                for r in sorted(self.pages.values(), key=lambda r: (r.namespace, r.title))
            ]
            return {"pages": pages}

    def _parse_or_400(self, ns: str, title: str, text: str) -> ParsedPage:
        try:
            parsed = parse_page(PageSource(title, text, ns))
        except ValueError as e:
            raise ApiError(400, {"error": "bad_text", "detail": str(e)}) from None
        if parsed.diagnostics:
            raise ApiError(
                400,
                {
                    "error": "parse_error",
                    "diagnostics": [d.as_dict() for d in parsed.diagnostics],
                },
            )
        return parsed

    def put_page(
        self,
        principal: Principal,
        ns: str,
        title: str,
        text: str,
        base_revision: int | None = None,
        mode: str | None = None,
    ) -> dict:
        with self.lock:
            self._validate_name(ns, title)
            resource = page_resource(ns, title)
            self._authorize(principal, Action.EDIT, resource)
            if "{{#" in text:
                self._authorize(principal, Action.ANNOTATE, resource)
            strict = (mode or ("strict" if self.config.strict_default else "lenient")) == "strict"

            record = self.pages.get((ns, title))
            current = record.current.number if record else None
            if base_revision is not None and base_revision != (current or 0):
                raise ApiError(
                    409,
                    {
                        "error": "conflict",
                        "base_revision": base_revision,
                        "current_revision": current or 0,
                    },
                )

            parsed = self._parse_or_400(ns, title, text)
            number = (current or 0) + 1
            timestamp = self.config.clock()
            lowered = lower_page(parsed, number, principal.user, timestamp)

            old_graph = revision_graph_iri(title, current) if current else None
            removed: list[Quad] = []
            if old_graph is not None:
                removed.extend(self.store.match(g=old_graph))
                removed.extend(self.store.match(s=old_graph, g=META_GRAPH))
                for q in removed:
                    self.store.remove(q)
            for q in lowered.quads + lowered.meta_quads:
                self.store.insert(q)
            self._recompute_inference()

            report = check_page(
                parsed, lowered, self.ontology, self.store, checked_at=timestamp
            )

            if strict and report.violations:
                for q in lowered.quads + lowered.meta_quads:
                    self.store.remove(q)
                for q in removed:
                    self.store.insert(q)
                self._recompute_inference()
                raise ApiError(
                    422,
                    {"error": "constraint_rejection", "report": report.as_dict()},
                )

            revision = RevisionRecord(
                number, principal.user, timestamp, text, report.as_dict(), self.ontology_hash
            )
            if record is None:
                record = PageRecord(ns, title)
                self.pages[(ns, title)] = record
            record.revisions.append(revision)
            self._persist_page(record)
            self._fresh_reports.pop((ns, title), None)
            return {"revision": revision.meta(), "report": report.as_dict()}

    def _get_record(self, ns: str, title: str) -> PageRecord:
        record = self.pages.get((ns, title))
        if record is None:
            raise ApiError(404, {"error": "unknown_page", "namespace": ns, "title": title})
        return record

    def _current_report(self, record: PageRecord) -> dict:
        """Save-time report, recomputed lazily if the ontology has changed."""
        rev = record.current
        if rev.ontology_hash == self.ontology_hash:
            return rev.report
        key = (record.namespace, record.title)
        cached = self._fresh_reports.get(key)
        if cached is not None and cached.get("_hash") == self.ontology_hash:
            return cached["report"]
        parsed = parse_page(PageSource(record.title, rev.text, record.namespace))
        lowered = lower_page(parsed, rev.number, rev.author, rev.timestamp)
        report = check_page(
            parsed, lowered, self.ontology, self.store, checked_at=self.config.clock()
        )
        self._fresh_reports[key] = {"_hash": self.ontology_hash, "report": report.as_dict()}
        return report.as_dict()

    def _annotations_payload(self, record: PageRecord) -> dict:
        graph = revision_graph_iri(record.title, record.current.number)
        lines = sorted(format_quad(q) for q in self.store.match(g=graph))
        return {
            "graph": graph.value,
            "count": len(lines),
            "nquads": "\n".join(lines) + ("\n" if lines else ""),
        }

    def get_page(self, principal: Principal, ns: str, title: str) -> dict:
        with self.lock:
            self._validate_name(ns, title)
            self._authorize(principal, Action.READ, page_resource(ns, title))
            record = self._get_record(ns, title)
            return {
                "namespace": ns,
                "title": title,
                "revision": record.current.meta(),
                "text": record.current.text,
                "annotations": self._annotations_payload(record),
                "report": self._current_report(record),
            }

    def list_revisions(self, principal: Principal, ns: str, title: str) -> dict:
        with self.lock:
            self._validate_name(ns, title)
            self._authorize(principal, Action.READ, page_resource(ns, title))
            record = self._get_record(ns, title)
            return {
                "namespace": ns,
                "title": title,
                "revisions": [r.meta() for r in reversed(record.revisions)],
            }

    def get_revision(self, principal: Principal, ns: str, title: str, number: int) -> dict:
        with self.lock:
            self._validate_name(ns, title)
            self._authorize(principal, Action.READ, page_resource(ns, title))
            record = self._get_record(ns, title)
            for rev in record.revisions:
                if rev.number == number:
                    return {
                        "namespace": ns,
                        "title": title,
                        "revision": rev.meta(),
                        "text": rev.text,
                        "report": rev.report,
                    }
            raise ApiError(
                404, {"error": "unknown_revision", "title": title, "revision": number}
            )

    def get_annotations(self, principal: Principal, ns: str, title: str) -> dict:
        with self.lock:
            self._validate_name(ns, title)
            self._authorize(principal, Action.READ, page_resource(ns, title))
            record = self._get_record(ns, title)
            return self._annotations_payload(record)

    # -- checking and querying -------------------------------------------------

    def check_body(self, principal: Principal, body: dict) -> tuple[int, dict]:
        """Stateless dry-run check of a draft text or an existing page."""
        with self.lock:
            title = body.get("title")
            ns = body.get("namespace", "Main")
            if body.get("text") is not None:
                text = body["text"]
                title = title or "Draft"
                self._authorize(principal, Action.ANNOTATE, "*")
            elif title:
                self._authorize(principal, Action.ANNOTATE, page_resource(ns, title))
                text = self._get_record(ns, title).current.text
            else:
                raise ApiError(400, {"error": "bad_request", "detail": "need text or title"})
            self._validate_name(ns, title)
            try:
                parsed = parse_page(PageSource(title, text, ns))
            except ValueError as e:
                raise ApiError(400, {"error": "bad_text", "detail": str(e)}) from None
            checked_at = self.config.clock()
            lowered = lower_page(parsed, 0, principal.user, checked_at)
            report = check_page(parsed, lowered, self.ontology, self.store, checked_at)
            payload = report.as_dict()
            if parsed.diagnostics:
                payload["diagnostics"] = [d.as_dict() for d in parsed.diagnostics]
                return 400, payload
            return 200, payload

    def sparql(self, principal: Principal, query_text: str, entailment: bool = False) -> dict:
        with self.lock:
            self._authorize(principal, Action.QUERY, "*")
            try:
                query = parse_query(query_text)
            except QuerySyntaxError as e:
                raise ApiError(
                    400,
                    {"error": "query_syntax", "message": e.message, "offset": e.offset},
                ) from None
            result = evaluate(query, self.store, entailment=entailment)
            return results_document(result)

    # -- ontology ---------------------------------------------------------------

    def get_ontology(self, principal: Principal) -> str:
        with self.lock:
            self._authorize(principal, Action.ADMIN, "*")
            return self.ontology_text

    def put_ontology(self, principal: Principal, text: str) -> dict:
        with self.lock:
            self._authorize(principal, Action.ADMIN, "*")
            try:
                ontology = load_ontology(text)
            except OntologyLoadError as e:
                raise ApiError(
                    422,
                    {"error": "ontology_errors", "errors": [err.as_dict() for err in e.errors]},
                ) from None
            self.ontology = ontology
            self.ontology_text = text
            self.ontology_hash = _sha256(text)
            self._fresh_reports.clear()
            (self.config.data_dir / "ontology.wbo").write_text(text, "utf-8")
            self._recompute_inference()
            return {
                "ok": True,
                "classes": len(ontology.classes),
                "properties": len(ontology.properties),
                "relations": len(ontology.relations),
                "rules": len(ontology.rules),
            }

    # -- bulk operations (CLI) ----------------------------------------------------

    def bulk_import(
        self, sources: list[PageSource], author: str, timestamp: str
    ) -> list[ValidationReport]:
        """Load many pages at once: one store pass, one closure, one rule pass."""
        with self.lock:
            entries = []
            for source in sources:
                parsed = parse_page(source)
                record = self.pages.get((source.namespace, source.title))
                number = (record.current.number if record else 0) + 1
                if record is not None:
                    old_graph = revision_graph_iri(source.title, record.current.number)
                    for q in self.store.match(g=old_graph) + self.store.match(
                        s=old_graph, g=META_GRAPH
                    ):
                        self.store.remove(q)
                lowered = lower_page(parsed, number, author, timestamp)
                entries.append((source, parsed, lowered, number))
            for _, _, lowered, _ in entries:
                for q in lowered.quads + lowered.meta_quads:
                    self.store.insert(q)
            self._recompute_inference()
            reports = check_pages(
                [(parsed, lowered) for _, parsed, lowered, _ in entries],
                self.ontology,
                self.store,
                checked_at=timestamp,
            )
            for (source, parsed, lowered, number), report in zip(entries, reports):
                record = self.pages.get((source.namespace, source.title))
                if record is None:
                    record = PageRecord(source.namespace, source.title)
                    self.pages[(source.namespace, source.title)] = record
                record.revisions.append(
                    RevisionRecord(
                        number, author, timestamp, source.text,
                        report.as_dict(), self.ontology_hash,
                    )
                )
                self._persist_page(record)
            return reports

    def export_nquads(self) -> str:
        with self.lock:
            return self.store.export_nquads()


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _parse_users(text: str) -> dict[str, str]:
    users: dict[str, str] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2 or not parts[0].startswith("user:"):
            raise ValueError(f"users.auth line {lineno}: expected 'user:<id> <hash>'")
        users[parts[0][5:]] = parts[1]
    return users


def render_users(users: dict[str, str]) -> str:
    return "".join(f"user:{u} {h}\n" for u, h in sorted(users.items()))


# ---------------------------------------------------------------------------
# FastAPI wiring


def create_app(state: WikiState):
    app = FastAPI(title="wikibridge", version="0.1.0")
    app.state.wiki = state

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(exc.payload, status_code=exc.status)

    def principal_of(request: Request) -> Principal:
        header = request.headers.get("authorization")
        bearer = None
        if header:
            scheme, _, token = header.partition(" ")
            if scheme.lower() != "bearer" or not token:
                raise ApiError(401, {"error": "bad_token"})
            bearer = token.strip()
        return state.principal_for(bearer)

    async def json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, {"error": "bad_request", "detail": "invalid JSON body"}) from None
        if not isinstance(body, dict):
            raise ApiError(400, {"error": "bad_request", "detail": "expected a JSON object"})
        return body

    @app.post("/api/login")
    async def login(request: Request):
        body = await json_body(request)
        user = body.get("user")
        password = body.get("password")
        if not isinstance(user, str) or not isinstance(password, str):
            raise ApiError(400, {"error": "bad_request", "detail": "need user and password"})
        return state.authenticate(user, password)

    @app.get("/api/pages")
    async def list_pages(request: Request):
        return state.list_pages(principal_of(request))

    @app.get("/api/pages/{ns}/{title}")
    async def get_page(ns: str, title: str, request: Request):
        return state.get_page(principal_of(request), ns, title)

    @app.put("/api/pages/{ns}/{title}")
    async def put_page(ns: str, title: str, request: Request):
        principal = principal_of(request)
        body = await json_body(request)
        text = body.get("text")
        if not isinstance(text, str):
            raise ApiError(400, {"error": "bad_request", "detail": "need text"})
        base = body.get("base_revision")
        if base is not None and not isinstance(base, int):
            raise ApiError(400, {"error": "bad_request", "detail": "base_revision must be an integer"})
        mode = body.get("mode")
        if mode is not None and mode not in ("strict", "lenient"):
            raise ApiError(400, {"error": "bad_request", "detail": "mode must be strict or lenient"})
        return state.put_page(principal, ns, title, text, base, mode)

    @app.get("/api/pages/{ns}/{title}/revisions")
    async def list_revisions(ns: str, title: str, request: Request):
        return state.list_revisions(principal_of(request), ns, title)

    @app.get("/api/pages/{ns}/{title}/revisions/{number}")
    async def get_revision(ns: str, title: str, number: int, request: Request):
        return state.get_revision(principal_of(request), ns, title, number)

    @app.get("/api/pages/{ns}/{title}/annotations")
    async def get_annotations(ns: str, title: str, request: Request):
        return state.get_annotations(principal_of(request), ns, title)

    @app.post("/api/check")
    async def check(request: Request):
        principal = principal_of(request)
        body = await json_body(request)
        status, payload = state.check_body(principal, body)
        return JSONResponse(payload, status_code=status)

    @app.post("/api/sparql")
    async def sparql(request: Request):
        principal = principal_of(request)
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/sparql-query"):
            query_text = (await request.body()).decode("utf-8")
            entailment = request.query_params.get("entailment") in ("1", "true")
        else:
            body = await json_body(request)
            query_text = body.get("query")
            entailment = bool(body.get("entailment", False))
            if not isinstance(query_text, str):
                raise ApiError(400, {"error": "bad_request", "detail": "need query"})
        return state.sparql(principal, query_text, entailment)

    @app.get("/api/ontology")
    async def get_ontology(request: Request):
        return PlainTextResponse(state.get_ontology(principal_of(request)))

    @app.put("/api/ontology")
    async def put_ontology(request: Request):
        principal = principal_of(request)
        text = (await request.body()).decode("utf-8")
        return state.put_ontology(principal, text)

    if state.config.static_dir is not None and Path(state.config.static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(state.config.static_dir), html=True), name="ui")

    return app
