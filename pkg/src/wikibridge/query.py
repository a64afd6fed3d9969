"""SPARQL-subset parsing and evaluation over the quad store.

Supported: PREFIX declarations, SELECT [DISTINCT] with explicit variables
or *, basic graph patterns, FILTER (comparisons, regex, &&/||/!), ORDER
BY, LIMIT, OFFSET. The prefixes wb:, rdf: and xsd: are predeclared.

Queries range over the annotation graphs, plus the inferred graph when
entailment is requested. Provenance is opt-in: a pattern whose concrete
predicate lives in the wb:meta namespace also sees the meta graph.

Results are fully deterministic: solutions are ordered by the ORDER BY
keys, ties (and the whole result set when there is no ORDER BY) by the
canonical order of the full solution tuples.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .datatypes import Datatype, datatype_by_iri, datatype_by_name
from .ontology import RDF_NS, WB_NS, XSD_NS
from .semantics import (
    INFERRED_GRAPH,
    META_GRAPH,
    is_annotation_graph,
    scoped_triple,
)
from .store import QuadStore
from .terms import (
    Comparison,
    Iri,
    Literal,
    Term,
    TermCompareError,
    TriplePattern,
    Var,
    compare_terms,
    term_sort_key,
)

PREDECLARED_PREFIXES = {"wb": WB_NS, "rdf": RDF_NS, "xsd": XSD_NS}

_META_PREFIX = WB_NS + "meta/"


class QuerySyntaxError(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.message = message
        self.offset = offset


class UnknownPrefixError(QuerySyntaxError):
    def __init__(self, prefix: str, offset: int):
        super().__init__(f"unknown prefix '{prefix}:'", offset)
        self.prefix = prefix


@dataclass(frozen=True, slots=True)
class RegexAtom:
    var: Var
    pattern: str


@dataclass(frozen=True, slots=True)
class And:
    items: tuple


@dataclass(frozen=True, slots=True)
class Or:
    items: tuple


@dataclass(frozen=True, slots=True)
class Not:
    item: object


FilterExpr = Comparison | RegexAtom | And | Or | Not


@dataclass(frozen=True)
class Query:
    prefixes: dict[str, str]
    select_vars: tuple[str, ...]
    star: bool
    distinct: bool
    patterns: tuple[TriplePattern, ...]
    filters: tuple[FilterExpr, ...] = ()
    order_by: tuple[tuple[str, bool], ...] = ()  # (var, ascending)
    limit: int | None = None
    offset: int | None = None


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>\#[^\n]*)
    | (?P<iri><[^<>\s]*>)
    | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<dtsep>\^\^)
    | (?P<number>[+-]?[0-9]+(?:\.[0-9]+)?)
    | (?P<pname>[A-Za-z_][A-Za-z0-9_\-]*:[A-Za-z0-9_%/\-]*)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op><=|>=|!=|&&|\|\||[=<>!{}().,*])
    """,
    re.VERBOSE,
)

_KEYWORDS = {
    "prefix", "select", "distinct", "where", "filter", "order", "by",
    "asc", "desc", "limit", "offset", "regex", "true", "false",
}


@dataclass(frozen=True, slots=True)
class _Tok:
    type: str
    value: str
    pos: int  # character offset


def _tokenize(text: str) -> list[_Tok]:
    tokens: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise QuerySyntaxError(
                f"unexpected character {text[pos]!r}", _byte_offset(text, pos)
            )
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Tok("eof", "", pos))
    return tokens


def _byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode("utf-8"))


# ---------------------------------------------------------------------------
# Parser


class _QueryParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.prefixes = dict(PREDECLARED_PREFIXES)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, message: str, tok: _Tok | None = None) -> QuerySyntaxError:
        tok = tok or self.peek()
        return QuerySyntaxError(message, _byte_offset(self.text, tok.pos))

    def keyword(self) -> str | None:
        t = self.peek()
        if t.type == "name" and t.value.lower() in _KEYWORDS:
            return t.value.lower()
        return None

    def expect_keyword(self, kw: str) -> None:
        if self.keyword() != kw:
            raise self.fail(f"expected '{kw.upper()}'")
        self.next()

    def expect_op(self, op: str) -> None:
        t = self.peek()
        if t.type != "op" or t.value != op:
            raise self.fail(f"expected '{op}'")
        self.next()

    def parse(self) -> Query:
        while self.keyword() == "prefix":
            self.next()
            t = self.next()
            if t.type != "pname" or not t.value.endswith(":") or t.value.count(":") != 1:
                raise self.fail("expected 'prefix:' declaration", t)
            prefix = t.value[:-1]
            iri_tok = self.next()
            if iri_tok.type != "iri":
                raise self.fail("expected <iri>", iri_tok)
            self.prefixes[prefix] = iri_tok.value[1:-1]

        self.expect_keyword("select")
        distinct = False
        if self.keyword() == "distinct":
            distinct = True
            self.next()
        star = False
        select_vars: list[str] = []
        if self.peek().type == "op" and self.peek().value == "*":
            star = True
            self.next()
        else:
            while self.peek().type == "var":
                select_vars.append(self.next().value[1:])
            if not select_vars:
                raise self.fail("expected variables or '*' after SELECT")

        self.expect_keyword("where")
        self.expect_op("{")
        patterns: list[TriplePattern] = []
        filters: list[FilterExpr] = []
        while True:
            t = self.peek()
            if t.type == "op" and t.value == "}":
                self.next()
                break
            if self.keyword() == "filter":
                self.next()
                self.expect_op("(")
                filters.append(self.parse_or())
                self.expect_op(")")
                continue
            s = self.parse_term(position="subject")
            p = self.parse_term(position="predicate")
            o = self.parse_term(position="object")
            patterns.append(TriplePattern(s, p, o))
            self.expect_op(".")
        if not patterns:
            raise self.fail("WHERE block needs at least one triple pattern")

        order_by: list[tuple[str, bool]] = []
        if self.keyword() == "order":
            self.next()
            self.expect_keyword("by")
            while True:
                kw = self.keyword()
                if kw in ("asc", "desc"):
                    self.next()
                    self.expect_op("(")
                    v = self.next()
                    if v.type != "var":
                        raise self.fail("expected variable", v)
                    self.expect_op(")")
                    order_by.append((v.value[1:], kw == "asc"))
                elif self.peek().type == "var":
                    order_by.append((self.next().value[1:], True))
                else:
                    break
            if not order_by:
                raise self.fail("ORDER BY needs at least one variable")

        limit = offset = None
        while self.keyword() in ("limit", "offset"):
            kw = self.keyword()
            self.next()
            t = self.next()
            if t.type != "number" or not re.match(r"[0-9]+\Z", t.value):
                raise self.fail(f"{kw.upper()} needs a nonnegative integer", t)
            if kw == "limit":
                limit = int(t.value)
            else:
                offset = int(t.value)

        if self.peek().type != "eof":
            raise self.fail("unexpected trailing input")

        pattern_vars: list[str] = []
        for pat in patterns:
            for name in pat.variables():
                if name not in pattern_vars:
                    pattern_vars.append(name)
        if star:
            select_vars = list(pattern_vars)
        for v in select_vars:
            if v not in pattern_vars:
                raise QuerySyntaxError(f"SELECT variable ?{v} not bound by any pattern", 0)
        for v, _ in order_by:
            if v not in pattern_vars:
                raise QuerySyntaxError(f"ORDER BY variable ?{v} not bound by any pattern", 0)
        for f in filters:
            for v in _filter_vars(f):
                if v not in pattern_vars:
                    raise QuerySyntaxError(f"FILTER variable ?{v} not bound by any pattern", 0)

        return Query(
            prefixes=self.prefixes,
            select_vars=tuple(select_vars),
            star=star,
            distinct=distinct,
            patterns=tuple(patterns),
            filters=tuple(filters),
            order_by=tuple(order_by),
            limit=limit,
            offset=offset,
        )

    def parse_term(self, position: str) -> Term | Var:
        t = self.next()
        if t.type == "var":
            return Var(t.value[1:])
        if t.type == "iri":
            try:
                return Iri(t.value[1:-1])
            except ValueError:
                raise self.fail("invalid IRI", t) from None
        if t.type == "pname":
            prefix, local = t.value.split(":", 1)
            ns = self.prefixes.get(prefix)
            if ns is None:
                raise UnknownPrefixError(prefix, _byte_offset(self.text, t.pos))
            try:
                return Iri(ns + local)
            except ValueError:
                raise self.fail("prefixed name expands to an invalid IRI", t) from None
        if t.type == "string":
            return self.finish_literal(t)
        if t.type == "number":
            if re.match(r"[+-]?[0-9]+\Z", t.value):
                return Literal(t.value, Datatype.INTEGER)
            return Literal(t.value, Datatype.DECIMAL)
        if t.type == "name" and t.value.lower() in ("true", "false"):
            return Literal(t.value.lower(), Datatype.BOOLEAN)
        raise self.fail(f"expected a term in {position} position", t)

    def finish_literal(self, t: _Tok) -> Literal:
        lex = re.sub(r"\\(.)", lambda m: m.group(1), t.value[1:-1])
        if self.peek().type == "dtsep":
            self.next()
            dt_tok = self.next()
            if dt_tok.type == "iri":
                dt = datatype_by_iri(dt_tok.value[1:-1])
            elif dt_tok.type == "pname":
                prefix, local = dt_tok.value.split(":", 1)
                ns = self.prefixes.get(prefix)
                if ns is None:
                    raise UnknownPrefixError(prefix, _byte_offset(self.text, dt_tok.pos))
                dt = datatype_by_iri(ns + local) or datatype_by_name(local)
                if ns != XSD_NS:
                    dt = None
            else:
                raise self.fail("expected datatype after '^^'", dt_tok)
            if dt is None:
                raise self.fail("unsupported datatype", dt_tok)
            return Literal(lex, dt)
        return Literal(lex)

    # filter expression grammar: or -> and -> unary -> atom
    def parse_or(self) -> FilterExpr:
        items = [self.parse_and()]
        while self.peek().type == "op" and self.peek().value == "||":
            self.next()
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def parse_and(self) -> FilterExpr:
        items = [self.parse_unary()]
        while self.peek().type == "op" and self.peek().value == "&&":
            self.next()
            items.append(self.parse_unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def parse_unary(self) -> FilterExpr:
        t = self.peek()
        if t.type == "op" and t.value == "!":
            self.next()
            return Not(self.parse_unary())
        if t.type == "op" and t.value == "(":
            self.next()
            inner = self.parse_or()
            self.expect_op(")")
            return inner
        return self.parse_atom()

    def parse_atom(self) -> FilterExpr:
        if self.keyword() == "regex":
            self.next()
            self.expect_op("(")
            v = self.next()
            if v.type != "var":
                raise self.fail("regex() needs a variable", v)
            self.expect_op(",")
            s = self.next()
            if s.type != "string":
                raise self.fail("regex() needs a pattern string", s)
            pattern = re.sub(r"\\(.)", lambda m: m.group(1), s.value[1:-1])
            try:
                re.compile(pattern)
            except re.error as e:
                raise self.fail(f"bad regex: {e}", s) from None
            self.expect_op(")")
            return RegexAtom(Var(v.value[1:]), pattern)
        lhs = self.parse_operand()
        op_tok = self.next()
        if op_tok.type != "op" or op_tok.value not in ("=", "!=", "<", "<=", ">", ">="):
            raise self.fail("expected comparison operator", op_tok)
        rhs = self.parse_operand()
        return Comparison(op_tok.value, lhs, rhs)

    def parse_operand(self) -> Var | Literal:
        t = self.peek()
        if t.type == "var":
            self.next()
            return Var(t.value[1:])
        if t.type == "string":
            self.next()
            return self.finish_literal(t)
        if t.type == "number":
            self.next()
            if re.match(r"[+-]?[0-9]+\Z", t.value):
                return Literal(t.value, Datatype.INTEGER)
            return Literal(t.value, Datatype.DECIMAL)
        if t.type == "name" and t.value.lower() in ("true", "false"):
            self.next()
            return Literal(t.value.lower(), Datatype.BOOLEAN)
        raise self.fail("filter operands are variables or literals", t)


def _filter_vars(expr: FilterExpr) -> set[str]:
    if isinstance(expr, Comparison):
        return {t.name for t in (expr.lhs, expr.rhs) if isinstance(t, Var)}
    if isinstance(expr, RegexAtom):
        return {expr.var.name}
    if isinstance(expr, Not):
        return _filter_vars(expr.item)
    if isinstance(expr, (And, Or)):
        out: set[str] = set()
        for item in expr.items:
            out |= _filter_vars(item)
        return out
    raise TypeError(repr(expr))


def parse_query(text: str) -> Query:
    """Parse a query; QuerySyntaxError carries a byte offset."""
    return _QueryParser(text).parse()


# ---------------------------------------------------------------------------
# Evaluation


@dataclass(slots=True)
class QueryResult:
    vars: tuple[str, ...]
    solutions: tuple[dict[str, Term], ...]
    dropped: int = 0  # solutions lost to filter type errors


class _TripleView:
    """Triple set with per-position indexes, built on first use."""

    __slots__ = ("triples", "_indexes")

    def __init__(self, triples: set) -> None:
        self.triples = triples
        self._indexes: dict[int, dict] = {}

    def _index(self, position: int) -> dict:
        index = self._indexes.get(position)
        if index is None:
            index = {}
            for t in self.triples:
                index.setdefault(t[position], []).append(t)
            self._indexes[position] = index
        return index

    def candidates(self, s, p, o):
        if s is not None:
            return self._index(0).get(s, ())
        if o is not None:
            return self._index(2).get(o, ())
        if p is not None:
            return self._index(1).get(p, ())
        return self.triples


def _build_views(store: QuadStore, entailment: bool) -> tuple[_TripleView, _TripleView]:
    # Blank labels are only unique per graph; standardize them apart so
    # anonymous nodes from different pages never join. Inferred-graph
    # triples are already scoped by the closure.
    base: set = set()
    meta_extra: set = set()
    for q in store.quads():
        if is_annotation_graph(q.g):
            base.add(scoped_triple(q))
        elif entailment and q.g == INFERRED_GRAPH:
            base.add(q.triple())
        elif q.g == META_GRAPH:
            meta_extra.add(q.triple())
    return _TripleView(base), _TripleView(base | meta_extra)


def _pattern_view(pat: TriplePattern, default: _TripleView, with_meta: _TripleView):
    if isinstance(pat.p, Iri) and pat.p.value.startswith(_META_PREFIX):
        return with_meta
    return default


class FilterTypeError(Exception):
    pass


def _eval_filter(expr: FilterExpr, binding: dict[str, Term]) -> bool:
    if isinstance(expr, Comparison):
        lhs = binding[expr.lhs.name] if isinstance(expr.lhs, Var) else expr.lhs
        rhs = binding[expr.rhs.name] if isinstance(expr.rhs, Var) else expr.rhs
        try:
            return compare_terms(expr.op, lhs, rhs)
        except TermCompareError as e:
            raise FilterTypeError(str(e)) from None
    if isinstance(expr, RegexAtom):
        value = binding[expr.var.name]
        if isinstance(value, Literal):
            subject = value.lexical
        elif isinstance(value, Iri):
            subject = value.value
        else:
            raise FilterTypeError("regex over a blank node")
        return re.search(expr.pattern, subject) is not None
    if isinstance(expr, Not):
        return not _eval_filter(expr.item, binding)
    if isinstance(expr, And):
        return all(_eval_filter(item, binding) for item in expr.items)
    if isinstance(expr, Or):
        return any(_eval_filter(item, binding) for item in expr.items)
    raise TypeError(repr(expr))


def evaluate(query: Query, store: QuadStore, entailment: bool = False) -> QueryResult:
    """Join the patterns, filter, order, project, page. Deterministic."""
    default_view, meta_view = _build_views(store, entailment)

    solutions: list[dict[str, Term]] = [{}]
    for pat in query.patterns:
        view = _pattern_view(pat, default_view, meta_view)
        next_solutions: list[dict[str, Term]] = []
        for binding in solutions:
            s = binding.get(pat.s.name) if isinstance(pat.s, Var) else pat.s
            p = binding.get(pat.p.name) if isinstance(pat.p, Var) else pat.p
            o = binding.get(pat.o.name) if isinstance(pat.o, Var) else pat.o
            for ts, tp, to in view.candidates(s, p, o):
                if s is not None and ts != s:
                    continue
                if p is not None and tp != p:
                    continue
                if o is not None and to != o:
                    continue
                new = dict(binding)
                ok = True
                for term, val in ((pat.s, ts), (pat.p, tp), (pat.o, to)):
                    if isinstance(term, Var):
                        prev = new.get(term.name)
                        if prev is None:
                            new[term.name] = val
                        elif prev != val:
                            ok = False
                            break
                if ok:
                    next_solutions.append(new)
        solutions = next_solutions
        if not solutions:
            break

    dropped = 0
    if query.filters:
        kept = []
        for binding in solutions:
            try:
                if all(_eval_filter(f, binding) for f in query.filters):
                    kept.append(binding)
            except FilterTypeError:
                dropped += 1
        solutions = kept

    all_vars = sorted({v for b in solutions for v in b} | set(query.select_vars))

    def full_key(binding: dict[str, Term]):
        return tuple(term_sort_key(binding[v]) for v in all_vars)

    if query.order_by:
        # Sort by the last key first so earlier keys dominate (stable sort).
        solutions.sort(key=full_key)
        for var, ascending in reversed(query.order_by):
            solutions.sort(key=lambda b: term_sort_key(b[var]), reverse=not ascending)
    else:
        solutions.sort(key=full_key)

    rows = [{v: b[v] for v in query.select_vars} for b in solutions]
    if query.distinct:
        seen = set()
        unique = []
        for row in rows:
            key = tuple(term_sort_key(row[v]) for v in query.select_vars)
            if key not in seen:
                seen.add(key)
                unique.append(row)
        rows = unique
    if query.offset:
        rows = rows[query.offset:]
    if query.limit is not None:
        rows = rows[: query.limit]
    return QueryResult(query.select_vars, tuple(rows), dropped)


def term_to_json(term: Term) -> dict:
    if isinstance(term, Iri):
        return {"type": "uri", "value": term.value}
    if isinstance(term, Literal):
        out = {"type": "literal", "value": term.lexical}
        if term.datatype is not Datatype.STRING:
            out["datatype"] = term.datatype.xsd_iri
        return out
    return {"type": "bnode", "value": term.id}


def results_document(result: QueryResult) -> dict:
    """W3C-style SELECT results document."""
    doc = {
        "head": {"vars": list(result.vars)},
        "results": {
            "bindings": [
                {v: term_to_json(row[v]) for v in result.vars}
                for row in result.solutions
            ]
        },
    }
    if result.dropped:
        doc["diagnostics"] = {"dropped_solutions": result.dropped}
    return doc
