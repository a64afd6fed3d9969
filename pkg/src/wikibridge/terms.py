"""RDF-style terms, variables, triple patterns, and term-level operations.

Everything downstream (quad store, lowering, rules, queries) shares these
value types. Terms are immutable and hashable.
"""

from __future__ import annotations

import decimal
import re
from dataclasses import dataclass

from .datatypes import Datatype

# N-Quads IRIREF charset: no space, no angle brackets/quotes/braces, no control.
_IRI_RE = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:[^\x00-\x20<>\"{}|^`\\]*\Z")
_BLANK_ID_RE = re.compile(r"[A-Za-z0-9_]+\Z")


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self) -> None:
        if not _IRI_RE.match(self.value):
            raise ValueError(f"not a valid absolute IRI: {self.value!r}")


@dataclass(frozen=True, slots=True)
class Blank:
    id: str

    def __post_init__(self) -> None:
        if not _BLANK_ID_RE.match(self.id):
            raise ValueError(f"not a valid blank node id: {self.id!r}")


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: Datatype = Datatype.STRING


Term = Iri | Blank | Literal


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class TriplePattern:
    """Triple of terms or variables; the graph position stays implicit."""

    s: Term | Var
    p: Term | Var
    o: Term | Var

    def variables(self) -> tuple[str, ...]:
        out = []
        for t in (self.s, self.p, self.o):
            if isinstance(t, Var) and t.name not in out:
                out.append(t.name)
        return tuple(out)


@dataclass(frozen=True, slots=True)
class Comparison:
    """A single comparison atom; operands are variables or literals."""

    op: str  # one of = != < <= > >=
    lhs: Var | Literal
    rhs: Var | Literal


def escape_literal(s: str) -> str:
    out = []
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def format_term(t: Term) -> str:
    """Canonical N-Quads form of a term."""
    if isinstance(t, Iri):
        return f"<{t.value}>"
    if isinstance(t, Blank):
        return f"_:{t.id}"
    if isinstance(t, Literal):
        lex = escape_literal(t.lexical)
        if t.datatype is Datatype.STRING:
            return f'"{lex}"'
        return f'"{lex}"^^<{t.datatype.xsd_iri}>'
    raise TypeError(f"not a term: {t!r}")


_TERM_RANK = {Blank: 0, Iri: 1, Literal: 2}


def term_sort_key(t: Term) -> tuple[int, str]:
    """Total order over terms: Blank < Iri < Literal, then lexicographic."""
    return (_TERM_RANK[type(t)], format_term(t))


class TermCompareError(Exception):
    """Raised when an ordered comparison between two terms is undefined."""


_NUMERIC = (Datatype.INTEGER, Datatype.DECIMAL)


def _numeric(lit: Literal) -> decimal.Decimal:
    return decimal.Decimal(lit.lexical)


def compare_terms(op: str, a: Term, b: Term) -> bool:
    """Evaluate ``a op b``.

    Equality is structural, except that integer/decimal literals compare by
    numeric value. Ordered comparisons require two literals of comparable
    datatypes: numeric against numeric, otherwise the same datatype
    (lexicographic); anything else raises TermCompareError.
    """
    both_lit = isinstance(a, Literal) and isinstance(b, Literal)
    numeric = both_lit and a.datatype in _NUMERIC and b.datatype in _NUMERIC
    if op in ("=", "!="):
        if numeric:
            eq = _numeric(a) == _numeric(b)
        else:
            eq = a == b
        return eq if op == "=" else not eq
    if not both_lit:
        raise TermCompareError(
            f"ordered comparison needs literals: {format_term(a)} {op} {format_term(b)}"
        )
    if numeric:
        x, y = _numeric(a), _numeric(b)
    elif a.datatype == b.datatype:
        # ISO dates and booleans ("false" < "true") order correctly as strings.
        x, y = a.lexical, b.lexical
    else:
        raise TermCompareError(
            f"cannot order {a.datatype.value} against {b.datatype.value}"
        )
    if op == "<":
        return x < y
    if op == "<=":
        return x <= y
    if op == ">":
        return x > y
    if op == ">=":
        return x >= y
    raise ValueError(f"unknown comparison operator {op!r}")
