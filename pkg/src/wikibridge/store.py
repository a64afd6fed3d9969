"""Indexed quad store with named graphs, plus N-Quads import/export.

Set semantics throughout: a quad is identified by all four positions.
Three nested-dict indexes (SPO, POS, OSP, each keyed down to the graph
set) plus a per-graph index give every single-wildcard pattern an
index-backed access path. The store itself is a rebuildable derived
structure; durable truth lives in page files and the ontology.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .datatypes import Datatype, datatype_by_iri
from .terms import Blank, Iri, Literal, Term, format_term

Subject = Iri | Blank


@dataclass(frozen=True, slots=True)
class Quad:
    s: Subject
    p: Iri
    o: Term
    g: Iri

    def __post_init__(self) -> None:
        if not isinstance(self.s, (Iri, Blank)):
            raise TypeError(f"subject must be an IRI or blank node: {self.s!r}")
        if not isinstance(self.p, Iri):
            raise TypeError(f"predicate must be an IRI: {self.p!r}")
        if not isinstance(self.o, (Iri, Blank, Literal)):
            raise TypeError(f"object must be a term: {self.o!r}")
        if not isinstance(self.g, Iri):
            raise TypeError(f"graph name must be an IRI: {self.g!r}")

    def triple(self) -> tuple[Subject, Iri, Term]:
        return (self.s, self.p, self.o)


@dataclass(frozen=True, slots=True)
class QuadPattern:
    """Concrete terms or None wildcards, one per position."""

    s: Subject | None = None
    p: Iri | None = None
    o: Term | None = None
    g: Iri | None = None


def format_quad(q: Quad) -> str:
    return f"{format_term(q.s)} {format_term(q.p)} {format_term(q.o)} {format_term(q.g)} ."


class QuadStore:
    """In-memory quad set with SPO/POS/OSP and graph indexes."""

    __slots__ = ("_quads", "_spo", "_pos", "_osp", "_graphs")

    def __init__(self, quads: Iterable[Quad] = ()) -> None:
        self._quads: set[Quad] = set()
        self._spo: dict = {}
        self._pos: dict = {}
        self._osp: dict = {}
        self._graphs: dict[Iri, set[Quad]] = {}
        for q in quads:
            self.insert(q)

    def __len__(self) -> int:
        return len(self._quads)

    def __contains__(self, q: Quad) -> bool:
        return q in self._quads

    def quads(self) -> Iterator[Quad]:
        return iter(self._quads)

    def graphs(self) -> list[Iri]:
        return list(self._graphs)

    def graph_size(self, g: Iri) -> int:
        return len(self._graphs.get(g, ()))

    def copy(self) -> "QuadStore":
        return QuadStore(self._quads)

    def insert(self, q: Quad) -> bool:
        """Add a quad; duplicate inserts are no-ops returning False."""
        if q in self._quads:
            return False
        self._quads.add(q)
        self._spo.setdefault(q.s, {}).setdefault(q.p, {}).setdefault(q.o, set()).add(q.g)
        self._pos.setdefault(q.p, {}).setdefault(q.o, {}).setdefault(q.s, set()).add(q.g)
        self._osp.setdefault(q.o, {}).setdefault(q.s, {}).setdefault(q.p, set()).add(q.g)
        self._graphs.setdefault(q.g, set()).add(q)
        return True

    def remove(self, q: Quad) -> bool:
        if q not in self._quads:
            return False
        self._quads.discard(q)
        self._prune(self._spo, q.s, q.p, q.o, q.g)
        self._prune(self._pos, q.p, q.o, q.s, q.g)
        self._prune(self._osp, q.o, q.s, q.p, q.g)
        bucket = self._graphs[q.g]
        bucket.discard(q)
        if not bucket:
            del self._graphs[q.g]
        return True

    @staticmethod
    def _prune(index: dict, a, b, c, g) -> None:
        la = index[a]
        lb = la[b]
        lc = lb[c]
        lc.discard(g)
        if not lc:
            del lb[c]
            if not lb:
                del la[b]
                if not la:
                    del index[a]

    def drop_graph(self, g: Iri) -> int:
        """Remove every quad in graph ``g``; other graphs are untouched."""
        doomed = list(self._graphs.get(g, ()))
        for q in doomed:
            self.remove(q)
        return len(doomed)

    def match(
        self,
        s: Subject | None = None,
        p: Iri | None = None,
        o: Term | None = None,
        g: Iri | None = None,
    ) -> list[Quad]:
        """All quads matching the concrete positions; wildcards are None."""
        out: list[Quad] = []
        if s is not None:
            by_p = self._spo.get(s)
            if not by_p:
                return out
            p_items = [(p, by_p.get(p))] if p is not None else list(by_p.items())
            for pv, by_o in p_items:
                if not by_o:
                    continue
                o_items = [(o, by_o.get(o))] if o is not None else list(by_o.items())
                for ov, graphs in o_items:
                    if not graphs:
                        continue
                    for gv in graphs if g is None else ((g,) if g in graphs else ()):
                        out.append(Quad(s, pv, ov, gv))
        elif p is not None:
            by_o = self._pos.get(p)
            if not by_o:
                return out
            o_items = [(o, by_o.get(o))] if o is not None else list(by_o.items())
            for ov, by_s in o_items:
                if not by_s:
                    continue
                for sv, graphs in by_s.items():
                    for gv in graphs if g is None else ((g,) if g in graphs else ()):
                        out.append(Quad(sv, p, ov, gv))
        elif o is not None:
            by_s = self._osp.get(o)
            if not by_s:
                return out
            for sv, by_p in by_s.items():
                for pv, graphs in by_p.items():
                    for gv in graphs if g is None else ((g,) if g in graphs else ()):
                        out.append(Quad(sv, pv, o, gv))
        elif g is not None:
            out.extend(self._graphs.get(g, ()))
        else:
            out.extend(self._quads)
        return out

    def match_pattern(self, pattern: QuadPattern) -> list[Quad]:
        return self.match(pattern.s, pattern.p, pattern.o, pattern.g)

    def export_nquads(self) -> str:
        """Canonical N-Quads: one quad per line, sorted by (g, s, p, o)."""
        lines = sorted(
            (format_term(q.g), format_term(q.s), format_term(q.p), format_term(q.o))
            for q in self._quads
        )
        if not lines:
            return ""
        return "\n".join(f"{s} {p} {o} {g} ." for g, s, p, o in lines) + "\n"


class NQuadsSyntaxError(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


_IRI_TOKEN = re.compile(r"<([^\x00-\x20<>\"{}|^`\\]*)>")
_BLANK_TOKEN = re.compile(r"_:([A-Za-z0-9_]+)")
_STRING_TOKEN = re.compile(r'"((?:[^"\\\n\r]|\\.)*)"')
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _unescape(s: str, line: int) -> str:
    out: list[str] = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(s):
            raise NQuadsSyntaxError(line, "dangling backslash in literal")
        nxt = s[i + 1]
        if nxt in _UNESCAPES:
            out.append(_UNESCAPES[nxt])
            i += 2
        elif nxt == "u" and i + 6 <= len(s):
            out.append(chr(int(s[i + 2 : i + 6], 16)))
            i += 6
        elif nxt == "U" and i + 10 <= len(s):
            out.append(chr(int(s[i + 2 : i + 10], 16)))
            i += 10
        else:
            raise NQuadsSyntaxError(line, f"unknown escape \\{nxt}")
    return "".join(out)


def _parse_term(text: str, pos: int, line: int) -> tuple[Term, int]:
    while pos < len(text) and text[pos] in " \t":
        pos += 1
    if pos >= len(text):
        raise NQuadsSyntaxError(line, "unexpected end of line")
    if text[pos] == "<":
        m = _IRI_TOKEN.match(text, pos)
        if not m:
            raise NQuadsSyntaxError(line, "malformed IRI")
        try:
            return Iri(m.group(1)), m.end()
        except ValueError as e:
            raise NQuadsSyntaxError(line, str(e)) from None
    if text.startswith("_:", pos):
        m = _BLANK_TOKEN.match(text, pos)
        if not m:
            raise NQuadsSyntaxError(line, "malformed blank node label")
        return Blank(m.group(1)), m.end()
    if text[pos] == '"':
        m = _STRING_TOKEN.match(text, pos)
        if not m:
            raise NQuadsSyntaxError(line, "malformed string literal")
        lex = _unescape(m.group(1), line)
        end = m.end()
        datatype = Datatype.STRING
        if text.startswith("^^", end):
            m2 = _IRI_TOKEN.match(text, end + 2)
            if not m2:
                raise NQuadsSyntaxError(line, "malformed datatype IRI")
            dt = datatype_by_iri(m2.group(1))
            if dt is None:
                raise NQuadsSyntaxError(line, f"unsupported datatype <{m2.group(1)}>")
            datatype = dt
            end = m2.end()
        return Literal(lex, datatype), end
    raise NQuadsSyntaxError(line, f"unexpected character {text[pos]!r}")


def import_nquads(text: str) -> QuadStore:
    """Parse N-Quads text into a fresh store; duplicate lines collapse."""
    store = QuadStore()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        s, pos = _parse_term(line, 0, lineno)
        p, pos = _parse_term(line, pos, lineno)
        o, pos = _parse_term(line, pos, lineno)
        g, pos = _parse_term(line, pos, lineno)
        rest = line[pos:].strip()
        if rest != ".":
            raise NQuadsSyntaxError(lineno, "expected terminating '.'")
        if not isinstance(s, (Iri, Blank)):
            raise NQuadsSyntaxError(lineno, "subject must be an IRI or blank node")
        if not isinstance(p, Iri):
            raise NQuadsSyntaxError(lineno, "predicate must be an IRI")
        if not isinstance(g, Iri):
            raise NQuadsSyntaxError(lineno, "graph name must be an IRI")
        store.insert(Quad(s, p, o, g))
    return store
