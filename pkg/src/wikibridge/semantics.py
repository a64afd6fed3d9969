"""Lowering annotations to quads, inference closure, and conformance checking.

IRI scheme (base ``http://wikibridge.example/``):

* pages            ``wb:page/<percent-encoded title>``
* ontology terms   ``wb:onto/<name>``
* n-ary links      ``wb:rel/<RelName>``
* revision graphs  ``wb:graph/<title>/<revision>``
* bookkeeping      ``wb:graph/meta``, ``wb:graph/inferred``, ``wb:meta/*``

Lowering is deterministic: blank nodes are labelled ``a1, a2, ...`` in
document order, so identical inputs give identical quad sets. Every
annotation node that lowers to a fresh blank node also receives one
rdf:type quad (its relation name for n-ary nodes, the built-in
``wb:meta/Annotation`` marker for nested simple annotations); together
with one quad per key=value pair this fixes the quad-count law:
simple node with k pairs -> k quads, n-ary with r filled roles -> r+2,
each nested value with k inner pairs -> k+1 additional.
"""

from __future__ import annotations

import datetime
import functools
import hashlib
from dataclasses import dataclass, field
from enum import Enum
from urllib.parse import quote

from .datatypes import Datatype
from .markup import (
    AnnotationNode,
    LiteralValue,
    Nested,
    NodeKind,
    PageRef,
    Pair,
    ParsedPage,
    Span,
)
from .ontology import (
    ConstraintRule,
    Ontology,
    PropertyKind,
    RelationSchema,
)
from .store import Quad, QuadStore, Subject
from .terms import (
    Blank,
    Comparison,
    Iri,
    Literal,
    Term,
    TermCompareError,
    TriplePattern,
    Var,
    compare_terms,
    format_term,
)

BASE = "http://wikibridge.example/"
RDF_TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")

META_GRAPH = Iri(BASE + "graph/meta")
INFERRED_GRAPH = Iri(BASE + "graph/inferred")
NESTED_NODE_CLASS = Iri(BASE + "meta/Annotation")

META_FROM_PAGE = Iri(BASE + "meta/fromPage")
META_REVISION = Iri(BASE + "meta/revision")
META_AUTHOR = Iri(BASE + "meta/author")
META_TIMESTAMP = Iri(BASE + "meta/timestamp")

_ONTO_PREFIX = BASE + "onto/"
_GRAPH_PREFIX = BASE + "graph/"


def encode_title(title: str) -> str:
    return quote(title, safe="")


def page_iri(title: str) -> Iri:
    return Iri(BASE + "page/" + encode_title(title))


def onto_iri(name: str) -> Iri:
    return Iri(_ONTO_PREFIX + encode_title(name))


def rel_iri(name: str) -> Iri:
    return Iri(BASE + "rel/" + encode_title(name))


def revision_graph_iri(title: str, revision: int) -> Iri:
    return Iri(_GRAPH_PREFIX + encode_title(title) + "/" + str(revision))


def is_annotation_graph(g: Iri) -> bool:
    return (
        g.value.startswith(_GRAPH_PREFIX)
        and g != META_GRAPH
        and g != INFERRED_GRAPH
    )


def onto_name(term: Term) -> str | None:
    """The ontology-local name of a wb:onto IRI, if it is one."""
    if isinstance(term, Iri) and term.value.startswith(_ONTO_PREFIX):
        return term.value[len(_ONTO_PREFIX):]
    return None


@functools.lru_cache(maxsize=None)
def graph_scope_tag(g: Iri) -> str:
    return "g" + hashlib.sha1(g.value.encode("utf-8")).hexdigest()[:10]


def scope_blank(term: Term, g: Iri) -> Term:
    """Standardize a blank node apart when its graph is merged with others.

    Blank labels are only unique within one revision graph; any operation
    that pools triples across graphs (closure, rules, queries) must rename
    them apart or distinct anonymous nodes would co-refer.
    """
    if isinstance(term, Blank):
        return Blank(f"{graph_scope_tag(g)}_{term.id}")
    return term


def scoped_triple(q: Quad) -> Triple:
    return (scope_blank(q.s, q.g), q.p, scope_blank(q.o, q.g))


def now_utc() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------------------
# Lowering


@dataclass(frozen=True, slots=True)
class LoweringResult:
    graph: Iri
    quads: tuple[Quad, ...]  # all in `graph`
    meta_quads: tuple[Quad, ...]  # all in wb:graph/meta
    node_map: dict[Span, Subject]  # annotation node span -> subject term


class UnloweredValueError(Exception):
    """Internal invariant breach: an AST value the lowering cannot place."""


def lower_page(
    parsed: ParsedPage,
    revision: int,
    author: str,
    timestamp: str | None = None,
) -> LoweringResult:
    """Translate parsed annotations into quads for one revision graph.

    Provenance (fromPage, revision, author, timestamp) goes to the meta
    graph iff the page has at least one annotation. Pass a fixed
    ``timestamp`` for reproducible output.
    """
    title = parsed.source.title
    graph = revision_graph_iri(title, revision)
    page = page_iri(title)
    quads: list[Quad] = []
    node_map: dict[Span, Subject] = {}
    counter = 0

    def fresh() -> Blank:
        nonlocal counter
        counter += 1
        return Blank(f"a{counter}")

    def emit(s: Subject, p: Iri, o: Term) -> None:
        quads.append(Quad(s, p, o, graph))

    def lower_pairs(node: AnnotationNode, subject: Subject) -> None:
        for pair in node.pairs:
            value = pair.value
            if pair.key == "type":
                pred = RDF_TYPE
                if isinstance(value, LiteralValue):
                    emit(subject, pred, onto_iri(value.lexical))
                    continue
            else:
                pred = onto_iri(pair.key)
            if isinstance(value, LiteralValue):
                emit(subject, pred, Literal(value.lexical, value.datatype))
            elif isinstance(value, PageRef):
                emit(subject, pred, page_iri(value.title))
            elif isinstance(value, Nested):
                b = fresh()
                node_map[value.node.span] = b
                emit(subject, pred, b)
                if value.node.kind is NodeKind.NARY:
                    emit(b, RDF_TYPE, onto_iri(value.node.relation))
                else:
                    emit(b, RDF_TYPE, NESTED_NODE_CLASS)
                lower_pairs(value.node, b)
            else:
                raise UnloweredValueError(repr(value))

    for node in parsed.annotations:
        if node.kind is NodeKind.NARY:
            b = fresh()
            node_map[node.span] = b
            emit(page, rel_iri(node.relation), b)
            emit(b, RDF_TYPE, onto_iri(node.relation))
            lower_pairs(node, b)
        else:
            node_map[node.span] = page
            lower_pairs(node, page)

    meta: list[Quad] = []
    if parsed.annotations:
        ts = timestamp if timestamp is not None else now_utc()
        meta = [
            Quad(graph, META_FROM_PAGE, page, META_GRAPH),
            Quad(graph, META_REVISION, Literal(str(revision), Datatype.INTEGER), META_GRAPH),
            Quad(graph, META_AUTHOR, Literal(author), META_GRAPH),
            Quad(graph, META_TIMESTAMP, Literal(ts), META_GRAPH),
        ]
    return LoweringResult(graph, tuple(quads), tuple(meta), node_map)


# ---------------------------------------------------------------------------
# Inference closure

Triple = tuple[Subject, Iri, Term]


def closure_triples(triples: set[Triple], ont: Ontology) -> set[Triple]:
    """Subclass-transitivity type inference; returns only new triples."""
    inferred: set[Triple] = set()
    for s, p, o in triples:
        if p != RDF_TYPE:
            continue
        cname = onto_name(o)
        if cname is None or cname not in ont.classes:
            continue
        for sup in ont.ancestors(cname):
            if sup == cname:
                continue
            t = (s, RDF_TYPE, onto_iri(sup))
            if t not in triples:
                inferred.add(t)
    return inferred


def rdfs_closure(quads, ont: Ontology) -> tuple[Quad, ...]:
    """Inferred quads (graph wb:graph/inferred) for a set of annotation quads.

    Result is disjoint from the asserted triples, terminates, and is
    idempotent; order is canonical for reproducible exports. Blank subjects
    are standardized apart by source graph, so inferred types co-refer with
    their origin under the same scoping.
    """
    triples: set[Triple] = set()
    for q in quads:
        if is_annotation_graph(q.g):
            triples.add(scoped_triple(q))
        elif q.g == INFERRED_GRAPH:
            triples.add(q.triple())  # already scoped
    new = closure_triples(triples, ont)
    out = [Quad(s, p, o, INFERRED_GRAPH) for s, p, o in new]
    out.sort(key=lambda q: (format_term(q.s), format_term(q.p), format_term(q.o)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Checking


class ViolationKind(Enum):
    UNDEFINED_TERM = "UndefinedTerm"
    DOMAIN = "DomainViolation"
    RANGE = "RangeViolation"
    DATATYPE = "DatatypeViolation"
    CARDINALITY = "CardinalityViolation"
    NARY_ARITY = "NAryArity"
    RULE = "RuleViolation"


_KIND_ORDER = {k: i for i, k in enumerate(ViolationKind)}


@dataclass(frozen=True, slots=True)
class Violation:
    kind: ViolationKind
    subject: Term
    detail: str
    rule_name: str | None = None
    span: Span | None = None

    def as_dict(self) -> dict:
        d: dict = {
            "kind": self.kind.value,
            "subject": format_term(self.subject),
            "detail": self.detail,
        }
        if self.rule_name is not None:
            d["rule_name"] = self.rule_name
        if self.span is not None:
            d["span"] = self.span.as_dict()
        return d


@dataclass(slots=True)
class ValidationReport:
    page: str
    revision: int
    violations: tuple[Violation, ...]
    checked_at: str

    @property
    def conforms(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "page": self.page,
            "revision": self.revision,
            "violations": [v.as_dict() for v in self.violations],
            "checked_at": self.checked_at,
        }


def _sort_violations(violations: list[Violation]) -> tuple[Violation, ...]:
    def key(v: Violation):
        span_key = (1, 0, 0) if v.span is None else (0, v.span.start, v.span.end)
        return (span_key, _KIND_ORDER[v.kind], v.detail, format_term(v.subject))

    return tuple(sorted(violations, key=key))


class _TripleIndex:
    """Triple set with by-position lookups for rule matching."""

    __slots__ = ("triples", "by_p", "by_s")

    def __init__(self, triples: set[Triple]) -> None:
        self.triples = triples
        self.by_p: dict[Iri, list[Triple]] = {}
        self.by_s: dict[Term, list[Triple]] = {}
        for t in triples:
            self.by_p.setdefault(t[1], []).append(t)
            self.by_s.setdefault(t[0], []).append(t)

    def candidates(self, s, p) -> list[Triple]:
        if s is not None:
            return self.by_s.get(s, [])
        if p is not None:
            return self.by_p.get(p, [])
        return list(self.triples)


def _match_patterns(
    patterns: tuple[TriplePattern, ...],
    index: _TripleIndex,
    binding: dict[str, Term],
) -> list[dict[str, Term]]:
    if not patterns:
        return [binding]
    pat, rest = patterns[0], patterns[1:]

    def resolve(t):
        if isinstance(t, Var):
            return binding.get(t.name)
        return t

    s, p, o = resolve(pat.s), resolve(pat.p), resolve(pat.o)
    out: list[dict[str, Term]] = []
    for ts, tp, to in index.candidates(s, p if isinstance(p, Iri) else None):
        if s is not None and ts != s:
            continue
        if p is not None and tp != p:
            continue
        if o is not None and to != o:
            continue
        new = dict(binding)
        ok = True
        for var, val in ((pat.s, ts), (pat.p, tp), (pat.o, to)):
            if isinstance(var, Var):
                prev = new.get(var.name)
                if prev is None:
                    new[var.name] = val
                elif prev != val:
                    ok = False
                    break
        if ok:
            out.extend(_match_patterns(rest, index, new))
    return out


def _passes_filters(filters: tuple[Comparison, ...], binding: dict[str, Term]) -> bool:
    for f in filters:
        lhs = binding[f.lhs.name] if isinstance(f.lhs, Var) else f.lhs
        rhs = binding[f.rhs.name] if isinstance(f.rhs, Var) else f.rhs
        try:
            if not compare_terms(f.op, lhs, rhs):
                return False
        except TermCompareError:
            return False
    return True


def rule_body_matches(
    rule: ConstraintRule, index: _TripleIndex
) -> list[dict[str, Term]]:
    raw = _match_patterns(rule.body, index, {})
    seen: set[tuple] = set()
    out = []
    for binding in raw:
        if not _passes_filters(rule.body_filters, binding):
            continue
        key = tuple(sorted((k, format_term(v)) for k, v in binding.items()))
        if key in seen:
            continue
        seen.add(key)
        out.append(binding)
    return out


def rule_head_satisfied(
    rule: ConstraintRule, binding: dict[str, Term], index: _TripleIndex
) -> bool:
    seed = {
        k: v
        for k, v in binding.items()
        if any(
            isinstance(t, Var) and t.name == k
            for pat in rule.head
            for t in (pat.s, pat.p, pat.o)
        )
    }
    return bool(_match_patterns(rule.head, index, seed))


@dataclass(slots=True)
class _PageCheck:
    parsed: ParsedPage
    lowered: LoweringResult
    violations: list[Violation] = field(default_factory=list)

    def subject_of(self, span: Span) -> Term:
        return scope_blank(self.lowered.node_map[span], self.lowered.graph)

    def unscope(self, term: Term) -> Term:
        tag = graph_scope_tag(self.lowered.graph) + "_"
        if isinstance(term, Blank) and term.id.startswith(tag):
            return Blank(term.id[len(tag):])
        return term


def _context_triples(
    pages: list[_PageCheck], context: QuadStore | None
) -> set[Triple]:
    """Annotation triples, blanks standardized apart by graph.

    The checked pages' own lowerings are unioned in; any stored graph for
    the same title is excluded, so drafts supersede their saved revision.
    """
    own_prefixes = tuple(
        _GRAPH_PREFIX + encode_title(pc.parsed.source.title) + "/" for pc in pages
    )
    triples: set[Triple] = set()
    if context is not None:
        for q in context.quads():
            if is_annotation_graph(q.g) and not q.g.value.startswith(own_prefixes):
                triples.add(scoped_triple(q))
    for pc in pages:
        for q in pc.lowered.quads:
            triples.add(scoped_triple(q))
    return triples


def check_pages(
    pages: list[tuple[ParsedPage, LoweringResult]],
    ont: Ontology,
    context: QuadStore | None = None,
    checked_at: str | None = None,
) -> list[ValidationReport]:
    """Check several pages against one shared context in a single pass.

    The context is the full quad store (its annotation graphs are used);
    the pages' own lowerings are unioned in, so dry-run checks of
    unsaved drafts see themselves. Never mutates the store.
    """
    checks = [_PageCheck(parsed, lowered) for parsed, lowered in pages]
    asserted = _context_triples(checks, context)
    all_triples = asserted | closure_triples(asserted, ont)
    index = _TripleIndex(all_triples)

    type_cache: dict[Term, frozenset[str]] = {}

    def types_of(term: Term) -> frozenset[str]:
        cached = type_cache.get(term)
        if cached is not None:
            return cached
        names = set()
        for t in index.by_s.get(term, ()):
            if t[1] == RDF_TYPE:
                name = onto_name(t[2])
                if name is not None and name in ont.classes:
                    names.add(name)
        result = frozenset(names)
        type_cache[term] = result
        return result

    def within(types: frozenset[str], target: str) -> bool:
        return any(target in ont.ancestors(c) for c in types)

    for pc in checks:
        _check_structure(pc, ont, types_of, within)

    # Constraint rules run wiki-wide; violations are attributed to the pages
    # whose subjects occur in the binding. Bindings carry scoped blanks;
    # reports show the page-local labels.
    page_terms: list[set[Term]] = [
        {page_iri(pc.parsed.source.title)}
        | {pc.subject_of(span) for span in pc.lowered.node_map}
        for pc in checks
    ]
    span_of: list[dict[Term, Span]] = []
    for pc in checks:
        m: dict[Term, Span] = {}
        for span in pc.lowered.node_map:
            subj = pc.subject_of(span)
            if subj not in m or span.start < m[subj].start:
                m[subj] = span
        span_of.append(m)

    for rule in ont.rules:
        for binding in rule_body_matches(rule, index):
            if rule_head_satisfied(rule, binding, index):
                continue
            bound = set(binding.values())
            first_var = rule.body[0].variables()
            for i, pc in enumerate(checks):
                if not (bound & page_terms[i]):
                    continue
                subject = binding[first_var[0]] if first_var else page_iri(
                    pc.parsed.source.title
                )
                detail = "no facts satisfy the rule head; binding " + ", ".join(
                    f"?{k}={format_term(pc.unscope(v))}"
                    for k, v in sorted(binding.items())
                )
                pc.violations.append(
                    Violation(
                        ViolationKind.RULE,
                        pc.unscope(subject),
                        detail,
                        rule_name=rule.name,
                        span=span_of[i].get(subject),
                    )
                )

    ts = checked_at if checked_at is not None else now_utc()
    reports = []
    for pc in checks:
        revision = int(pc.lowered.graph.value.rsplit("/", 1)[1])
        reports.append(
            ValidationReport(
                pc.parsed.source.title,
                revision,
                _sort_violations(pc.violations),
                ts,
            )
        )
    return reports


def check_page(
    parsed: ParsedPage,
    lowered: LoweringResult,
    ont: Ontology,
    context: QuadStore | None = None,
    checked_at: str | None = None,
) -> ValidationReport:
    """Check one page; see :func:`check_pages` for context semantics."""
    return check_pages([(parsed, lowered)], ont, context, checked_at)[0]


def _check_structure(pc: _PageCheck, ont: Ontology, types_of, within) -> None:
    """Structural checks for one page; subjects are graph-scoped for lookups
    and unscoped again in the reported violations."""
    violations = pc.violations
    # (subject, property) -> pairs, for cardinality accounting over
    # simple-annotation pairs; n-ary role fills are schema territory.
    uses: dict[tuple[Term, str], list[Pair]] = {}

    def check_type_pair(pair: Pair, subject: Subject) -> None:
        v = pair.value
        if isinstance(v, LiteralValue):
            if v.lexical not in ont.classes:
                violations.append(
                    Violation(
                        ViolationKind.UNDEFINED_TERM,
                        pc.unscope(subject),
                        f"unknown class '{v.lexical}'",
                        span=pair.span,
                    )
                )
        else:
            violations.append(
                Violation(
                    ViolationKind.UNDEFINED_TERM,
                    pc.unscope(subject),
                    "the value of 'type' must name a class",
                    span=pair.span,
                )
            )

    def check_property_pair(pair: Pair, subject: Subject) -> None:
        decl = ont.properties.get(pair.key)
        if decl is None:
            violations.append(
                Violation(
                    ViolationKind.UNDEFINED_TERM,
                    pc.unscope(subject),
                    f"unknown property '{pair.key}'",
                    span=pair.span,
                )
            )
            return
        uses.setdefault((subject, pair.key), []).append(pair)
        subject_types = types_of(subject)
        if not subject_types:
            violations.append(
                Violation(
                    ViolationKind.DOMAIN,
                    pc.unscope(subject),
                    "untyped subject",
                    span=pair.span,
                )
            )
        elif not within(subject_types, decl.domain):
            violations.append(
                Violation(
                    ViolationKind.DOMAIN,
                    pc.unscope(subject),
                    f"subject of '{pair.key}' is not a {decl.domain}"
                    f" (types: {', '.join(sorted(subject_types))})",
                    span=pair.span,
                )
            )
        value = pair.value
        if decl.kind is PropertyKind.DATA:
            if not isinstance(value, LiteralValue):
                violations.append(
                    Violation(
                        ViolationKind.DATATYPE,
                        pc.unscope(subject),
                        f"'{pair.key}' expects a {decl.range} literal",
                        span=pair.span,
                    )
                )
            elif value.datatype.value != decl.range:
                violations.append(
                    Violation(
                        ViolationKind.DATATYPE,
                        pc.unscope(subject),
                        f"'{pair.key}' expects {decl.range}, got {value.datatype.value}",
                        span=pair.span,
                    )
                )
        else:
            if not isinstance(value, PageRef):
                violations.append(
                    Violation(
                        ViolationKind.RANGE,
                        pc.unscope(subject),
                        f"'{pair.key}' expects a page reference typed {decl.range}",
                        span=pair.span,
                    )
                )
            else:
                target = page_iri(value.title)
                target_types = types_of(target)
                if not target_types:
                    violations.append(
                        Violation(
                            ViolationKind.RANGE,
                            subject,
                            f"page '{value.title}' has no type; '{pair.key}' expects {decl.range}",
                            span=pair.span,
                        )
                    )
                elif not within(target_types, decl.range):
                    violations.append(
                        Violation(
                            ViolationKind.RANGE,
                            subject,
                            f"page '{value.title}' is not a {decl.range}"
                            f" (types: {', '.join(sorted(target_types))})",
                            span=pair.span,
                        )
                    )

    def check_role_pair(pair: Pair, schema: RelationSchema, subject: Subject) -> None:
        role = schema.role(pair.key)
        if role is None:
            violations.append(
                Violation(
                    ViolationKind.UNDEFINED_TERM,
                    pc.unscope(subject),
                    f"relation '{schema.name}' has no role '{pair.key}'",
                    span=pair.span,
                )
            )
            return
        value = pair.value
        if role.filler in ont.classes:
            if isinstance(value, PageRef):
                target: Term = page_iri(value.title)
            elif isinstance(value, Nested):
                target = pc.subject_of(value.node.span)
            else:
                violations.append(
                    Violation(
                        ViolationKind.RANGE,
                        pc.unscope(subject),
                        f"role '{pair.key}' expects a {role.filler}, got a literal",
                        span=pair.span,
                    )
                )
                return
            target_types = types_of(target)
            if not target_types:
                violations.append(
                    Violation(
                        ViolationKind.RANGE,
                        pc.unscope(subject),
                        f"value of role '{pair.key}' has no type; expected {role.filler}",
                        span=pair.span,
                    )
                )
            elif not within(target_types, role.filler):
                violations.append(
                    Violation(
                        ViolationKind.RANGE,
                        pc.unscope(subject),
                        f"value of role '{pair.key}' is not a {role.filler}"
                        f" (types: {', '.join(sorted(target_types))})",
                        span=pair.span,
                    )
                )
        else:  # datatype filler
            if not isinstance(value, LiteralValue):
                violations.append(
                    Violation(
                        ViolationKind.DATATYPE,
                        pc.unscope(subject),
                        f"role '{pair.key}' expects a {role.filler} literal",
                        span=pair.span,
                    )
                )
            elif value.datatype.value != role.filler:
                violations.append(
                    Violation(
                        ViolationKind.DATATYPE,
                        pc.unscope(subject),
                        f"role '{pair.key}' expects {role.filler}, got {value.datatype.value}",
                        span=pair.span,
                    )
                )

    def walk(node: AnnotationNode) -> None:
        subject = pc.subject_of(node.span)
        if node.kind is NodeKind.NARY:
            schema = ont.relations.get(node.relation)
            if schema is None:
                violations.append(
                    Violation(
                        ViolationKind.UNDEFINED_TERM,
                        pc.unscope(subject),
                        f"unknown relation '{node.relation}'",
                        span=node.span,
                    )
                )
            role_pairs = [p for p in node.pairs if p.key != "type"]
            problems = []
            if len(role_pairs) < 2:
                problems.append(
                    f"only {len(role_pairs)} filled role(s); a relation needs at least 2"
                )
            if schema is not None:
                filled = {p.key for p in role_pairs}
                missing = [r.name for r in schema.roles if r.required and r.name not in filled]
                if missing:
                    problems.append("missing required role(s): " + ", ".join(missing))
            if problems:
                violations.append(
                    Violation(
                        ViolationKind.NARY_ARITY,
                        pc.unscope(subject),
                        "; ".join(problems),
                        span=node.span,
                    )
                )
            for pair in node.pairs:
                if pair.key == "type":
                    check_type_pair(pair, subject)
                elif schema is not None:
                    check_role_pair(pair, schema, subject)
        else:
            for pair in node.pairs:
                if pair.key == "type":
                    check_type_pair(pair, subject)
                else:
                    check_property_pair(pair, subject)
        for pair in node.pairs:
            if isinstance(pair.value, Nested):
                walk(pair.value.node)

    for node in pc.parsed.annotations:
        walk(node)

    # Cardinality: counted per page, over simple-annotation property pairs.
    subjects: set[Term] = {pc.subject_of(span) for span in pc.lowered.node_map}
    subject_span: dict[Term, Span] = {}
    for span in pc.lowered.node_map:
        subj = pc.subject_of(span)
        if subj not in subject_span or span.start < subject_span[subj].start:
            subject_span[subj] = span
    for decl in ont.properties.values():
        for subject in subjects:
            pairs = uses.get((subject, decl.name), [])
            n = len(pairs)
            if decl.max_card is not None and n > decl.max_card:
                violations.append(
                    Violation(
                        ViolationKind.CARDINALITY,
                        pc.unscope(subject),
                        f"property '{decl.name}' used {n} times; max {decl.max_card}",
                        span=pairs[decl.max_card].span,
                    )
                )
            elif n < decl.min_card and within(types_of(subject), decl.domain):
                violations.append(
                    Violation(
                        ViolationKind.CARDINALITY,
                        pc.unscope(subject),
                        f"property '{decl.name}' used {n} times; min {decl.min_card}",
                        span=subject_span.get(subject),
                    )
                )
