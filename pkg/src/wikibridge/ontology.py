"""The explicitly stored conceptual model and its plain-text DSL.

One declaration per line, ``#`` comments::

    class Church subclassof Building
    datatype property height domain Building range decimal max 1
    object property adjacentTo domain Structure range Structure
    relation Dating
      role method : string required
      role year : integer
    rule "dated-needs-year" when { (?d, rdf:type, wb:onto/Dating) } expect { (?d, wb:onto/year, ?y) }

Rules may span lines until their braces balance. A bare ``property``
declaration infers its kind from the range: built-in datatype names make
a datatype property, anything else must be a declared class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .datatypes import DATATYPE_NAMES, Datatype, datatype_by_name, lexical_is_valid
from .terms import Comparison, Iri, Literal, TriplePattern, Var

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
WB_NS = "http://wikibridge.example/"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

DSL_PREFIXES = {"rdf": RDF_NS, "wb": WB_NS, "xsd": XSD_NS}


class PropertyKind(Enum):
    DATA = "datatype"
    OBJECT = "object"


@dataclass(frozen=True, slots=True)
class PropertyDecl:
    name: str
    kind: PropertyKind
    domain: str
    range: str  # class name (object) or datatype name (data)
    min_card: int = 0
    max_card: int | None = None  # None = unbounded


@dataclass(frozen=True, slots=True)
class Role:
    name: str
    filler: str  # class name or datatype name
    required: bool = False


@dataclass(frozen=True, slots=True)
class RelationSchema:
    name: str
    roles: tuple[Role, ...]

    def role(self, name: str) -> Role | None:
        for r in self.roles:
            if r.name == name:
                return r
        return None


@dataclass(frozen=True, slots=True)
class ConstraintRule:
    name: str
    body: tuple[TriplePattern, ...]
    body_filters: tuple[Comparison, ...]
    head: tuple[TriplePattern, ...]


@dataclass(frozen=True, slots=True)
class ClassRef:
    name: str


@dataclass(frozen=True, slots=True)
class OntologyError:
    kind: str  # SyntaxError | UndefinedReference | DuplicateDeclaration | BadCardinality
    message: str
    line: int
    name: str | None = None

    def as_dict(self) -> dict:
        d = {"kind": self.kind, "message": self.message, "line": self.line}
        if self.name is not None:
            d["name"] = self.name
        return d


class OntologyLoadError(Exception):
    def __init__(self, errors: list[OntologyError]):
        super().__init__(f"{len(errors)} ontology error(s): {errors[0].message}")
        self.errors = errors


class UnknownClassError(Exception):
    pass


@dataclass(frozen=True, slots=True)
class OntologyWarning:
    kind: str  # CycleWarning | UnusedClass
    message: str
    names: frozenset[str]


@dataclass(eq=True)
class Ontology:
    classes: frozenset[str] = frozenset()
    subclass_edges: frozenset[tuple[str, str]] = frozenset()
    properties: dict[str, PropertyDecl] = field(default_factory=dict)
    relations: dict[str, RelationSchema] = field(default_factory=dict)
    rules: tuple[ConstraintRule, ...] = ()
    _ancestors: dict[str, frozenset[str]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def ancestors(self, name: str) -> frozenset[str]:
        """All classes reachable from ``name`` via subclass edges, itself included."""
        cached = self._ancestors.get(name)
        if cached is not None:
            return cached
        if name not in self.classes:
            raise UnknownClassError(name)
        seen = {name}
        frontier = [name]
        while frontier:
            cur = frontier.pop()
            for sub, sup in self.subclass_edges:
                if sub == cur and sup not in seen:
                    seen.add(sup)
                    frontier.append(sup)
        result = frozenset(seen)
        self._ancestors[name] = result
        return result


def is_subclass_of(ont: Ontology, a: str, b: str) -> bool:
    """Reflexive-transitive subclass reachability; cycles are fine."""
    if a not in ont.classes:
        raise UnknownClassError(a)
    if b not in ont.classes:
        raise UnknownClassError(b)
    return b in ont.ancestors(a)


def lookup(ont: Ontology, name: str) -> ClassRef | PropertyDecl | RelationSchema | None:
    if name in ont.classes:
        return ClassRef(name)
    if name in ont.properties:
        return ont.properties[name]
    if name in ont.relations:
        return ont.relations[name]
    return None


# ---------------------------------------------------------------------------
# DSL loading


def _strip_comment(line: str) -> str:
    out = []
    in_string = False
    i = 0
    while i < len(line):
        ch = line[i]
        if in_string:
            if ch == "\\" and i + 1 < len(line):
                out.append(line[i : i + 2])
                i += 2
                continue
            if ch == '"':
                in_string = False
        else:
            if ch == "#":
                break
            if ch == '"':
                in_string = True
        out.append(ch)
        i += 1
    return "".join(out)


def _brace_delta(line: str) -> int:
    delta = 0
    in_string = False
    i = 0
    while i < len(line):
        ch = line[i]
        if in_string:
            if ch == "\\":
                i += 2
                continue
            if ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "{":
            delta += 1
        elif ch == "}":
            delta -= 1
        i += 1
    return delta


class _Loader:
    def __init__(self) -> None:
        self.errors: list[OntologyError] = []
        self.classes: dict[str, int] = {}  # name -> line
        self.edges: list[tuple[str, str, int]] = []
        self.properties: dict[str, PropertyDecl] = {}
        self.prop_lines: dict[str, int] = {}
        self.relations: dict[str, list[Role]] = {}
        self.rel_lines: dict[str, int] = {}
        self.rules: list[ConstraintRule] = []
        self.rule_names: dict[str, int] = {}
        self._current_relation: str | None = None

    def err(self, kind: str, message: str, line: int, name: str | None = None) -> None:
        self.errors.append(OntologyError(kind, message, line, name))

    def _declare(self, name: str, line: int) -> bool:
        """Class/property/relation names share one namespace."""
        if not NAME_RE.match(name):
            self.err("SyntaxError", f"invalid name {name!r}", line)
            return False
        if name in DATATYPE_NAMES:
            self.err(
                "DuplicateDeclaration",
                f"{name!r} collides with a built-in datatype",
                line,
                name,
            )
            return False
        for table in (self.classes, self.prop_lines, self.rel_lines):
            if name in table:
                self.err(
                    "DuplicateDeclaration", f"{name!r} already declared", line, name
                )
                return False
        return True

    def load(self, text: str) -> Ontology:
        lines = text.split("\n")
        i = 0
        while i < len(lines):
            lineno = i + 1
            stripped = _strip_comment(lines[i]).strip()
            i += 1
            if not stripped:
                continue
            head = stripped.split(None, 1)[0]
            if head == "class":
                self._current_relation = None
                self._parse_class(stripped, lineno)
            elif head in ("property", "object", "datatype"):
                self._current_relation = None
                self._parse_property(stripped, lineno)
            elif head == "relation":
                self._parse_relation(stripped, lineno)
            elif head == "role":
                self._parse_role(stripped, lineno)
            elif head == "rule":
                chunk = stripped
                depth = _brace_delta(stripped)
                while (depth > 0 or "{" not in chunk) and i < len(lines):
                    nxt = _strip_comment(lines[i])
                    i += 1
                    chunk += " " + nxt.strip()
                    depth += _brace_delta(nxt)
                if depth != 0:
                    self.err("SyntaxError", "unbalanced braces in rule", lineno)
                else:
                    self._parse_rule(chunk, lineno)
                self._current_relation = None
            else:
                self.err("SyntaxError", f"unknown declaration {head!r}", lineno)
                self._current_relation = None
        return self._resolve()

    def _parse_class(self, decl: str, line: int) -> None:
        m = re.match(r"class\s+(\S+)(?:\s+subclassof\s+(.+))?\s*\Z", decl)
        if not m:
            self.err("SyntaxError", "expected: class NAME [subclassof A, B]", line)
            return
        name = m.group(1)
        if not self._declare(name, line):
            return
        self.classes[name] = line
        if m.group(2):
            for sup in re.split(r"\s*,\s*", m.group(2).strip()):
                if not NAME_RE.match(sup):
                    self.err("SyntaxError", f"invalid class name {sup!r}", line)
                    continue
                self.edges.append((name, sup, line))

    def _parse_property(self, decl: str, line: int) -> None:
        m = re.match(
            r"(?:(object|datatype)\s+)?property\s+(\S+)\s+domain\s+(\S+)\s+range\s+(\S+)"
            r"(?:\s+min\s+(\S+))?(?:\s+max\s+(\S+))?\s*\Z",
            decl,
        )
        if not m:
            self.err(
                "SyntaxError",
                "expected: [object|datatype] property NAME domain C range R [min k] [max k]",
                line,
            )
            return
        kind_word, name, domain, rng, min_s, max_s = m.groups()
        if not self._declare(name, line):
            return
        min_card = 0
        max_card: int | None = None
        if min_s is not None:
            if not min_s.isdigit():
                self.err("BadCardinality", f"min must be a nonnegative integer, got {min_s!r}", line)
                return
            min_card = int(min_s)
        if max_s is not None and max_s != "unbounded":
            if not max_s.isdigit() or int(max_s) < 1:
                self.err("BadCardinality", f"max must be a positive integer or 'unbounded', got {max_s!r}", line)
                return
            max_card = int(max_s)
        if max_card is not None and min_card > max_card:
            self.err("BadCardinality", f"min {min_card} exceeds max {max_card}", line)
            return
        if kind_word == "object":
            kind = PropertyKind.OBJECT
        elif kind_word == "datatype":
            kind = PropertyKind.DATA
        else:
            kind = PropertyKind.DATA if rng in DATATYPE_NAMES else PropertyKind.OBJECT
        if kind is PropertyKind.OBJECT and rng in DATATYPE_NAMES:
            self.err("SyntaxError", f"object property range must be a class, got datatype {rng!r}", line)
            return
        self.properties[name] = PropertyDecl(name, kind, domain, rng, min_card, max_card)
        self.prop_lines[name] = line

    def _parse_relation(self, decl: str, line: int) -> None:
        m = re.match(r"relation\s+(\S+)(?:\s+(role\s+.+))?\s*\Z", decl)
        if not m:
            self.err("SyntaxError", "expected: relation NAME", line)
            return
        name = m.group(1)
        if not self._declare(name, line):
            return
        self.relations[name] = []
        self.rel_lines[name] = line
        self._current_relation = name
        if m.group(2):
            self._parse_role(m.group(2), line)

    def _parse_role(self, decl: str, line: int) -> None:
        if self._current_relation is None:
            self.err("SyntaxError", "role line outside a relation declaration", line)
            return
        m = re.match(r"role\s+(\S+)\s*:\s*(\S+)(\s+required)?\s*\Z", decl)
        if not m:
            self.err("SyntaxError", "expected: role NAME : FILLER [required]", line)
            return
        name, filler, required = m.group(1), m.group(2), bool(m.group(3))
        if not NAME_RE.match(name):
            self.err("SyntaxError", f"invalid role name {name!r}", line)
            return
        if name == "type":
            self.err("SyntaxError", "role name 'type' is reserved", line)
            return
        roles = self.relations[self._current_relation]
        if any(r.name == name for r in roles):
            self.err(
                "DuplicateDeclaration",
                f"role {name!r} declared twice in relation {self._current_relation!r}",
                line,
                name,
            )
            return
        roles.append(Role(name, filler, required))

    # -- rule parsing ------------------------------------------------------

    def _parse_rule(self, chunk: str, line: int) -> None:
        m = re.match(
            r'rule\s+"((?:[^"\\]|\\.)*)"\s+when\s*\{(.*)\}\s*expect\s*\{(.*)\}\s*\Z',
            chunk,
            re.DOTALL,
        )
        if not m:
            self.err("SyntaxError", 'expected: rule "name" when { ... } expect { ... }', line)
            return
        name = m.group(1).replace('\\"', '"').replace("\\\\", "\\")
        if name in self.rule_names:
            self.err("DuplicateDeclaration", f"rule {name!r} already declared", line, name)
            return
        body, body_filters = self._parse_pattern_block(m.group(2), line, allow_filters=True)
        head, _ = self._parse_pattern_block(m.group(3), line, allow_filters=False)
        if body is None or head is None:
            return
        if not body:
            self.err("SyntaxError", f"rule {name!r} has an empty body", line)
            return
        if not head:
            self.err("SyntaxError", f"rule {name!r} has an empty head", line)
            return
        body_vars = {v for p in body for v in p.variables()}
        for f in body_filters:
            for operand in (f.lhs, f.rhs):
                if isinstance(operand, Var) and operand.name not in body_vars:
                    self.err(
                        "SyntaxError",
                        f"filter variable ?{operand.name} does not occur in rule body",
                        line,
                    )
                    return
        head_vars = {v for p in head for v in p.variables()}
        if not (head_vars & body_vars):
            self.err("SyntaxError", f"rule {name!r} head shares no variable with body", line)
            return
        self.rule_names[name] = line
        self.rules.append(
            ConstraintRule(name, tuple(body), tuple(body_filters), tuple(head))
        )

    def _parse_pattern_block(
        self, text: str, line: int, allow_filters: bool
    ) -> tuple[list[TriplePattern] | None, list[Comparison]]:
        patterns: list[TriplePattern] = []
        filters: list[Comparison] = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            if text.startswith("filter", pos):
                if not allow_filters:
                    self.err("SyntaxError", "filters are not allowed in rule heads", line)
                    return None, []
                cmp_, pos = self._parse_filter(text, pos, line)
                if cmp_ is None:
                    return None, []
                filters.append(cmp_)
            elif text[pos] == "(":
                pat, pos = self._parse_triple(text, pos, line)
                if pat is None:
                    return None, []
                patterns.append(pat)
            else:
                self.err("SyntaxError", f"expected '(' or 'filter' at {text[pos:pos + 10]!r}", line)
                return None, []
        return patterns, filters

    def _parse_triple(self, text: str, pos: int, line: int) -> tuple[TriplePattern | None, int]:
        end = self._find_close(text, pos)
        if end < 0:
            self.err("SyntaxError", "unbalanced '(' in rule pattern", line)
            return None, len(text)
        inner = text[pos + 1 : end]
        parts = self._split_commas(inner)
        if len(parts) != 3:
            self.err("SyntaxError", f"pattern needs 3 comma-separated terms: ({inner})", line)
            return None, end + 1
        terms = []
        for part in parts:
            t = self._parse_rule_term(part.strip(), line)
            if t is None:
                return None, end + 1
            terms.append(t)
        return TriplePattern(*terms), end + 1

    def _parse_filter(self, text: str, pos: int, line: int) -> tuple[Comparison | None, int]:
        open_ = text.find("(", pos)
        if open_ < 0:
            self.err("SyntaxError", "expected '(' after filter", line)
            return None, len(text)
        end = self._find_close(text, open_)
        if end < 0:
            self.err("SyntaxError", "unbalanced '(' in filter", line)
            return None, len(text)
        inner = text[open_ + 1 : end].strip()
        m = re.match(r"(.+?)\s*(<=|>=|!=|=|<|>)\s*(.+)\Z", inner)
        if not m:
            self.err("SyntaxError", f"cannot parse filter expression {inner!r}", line)
            return None, end + 1
        lhs = self._parse_rule_term(m.group(1).strip(), line)
        rhs = self._parse_rule_term(m.group(3).strip(), line)
        if lhs is None or rhs is None:
            return None, end + 1
        for t in (lhs, rhs):
            if not isinstance(t, (Var, Literal)):
                self.err("SyntaxError", "filter operands must be variables or literals", line)
                return None, end + 1
        return Comparison(m.group(2), lhs, rhs), end + 1

    @staticmethod
    def _find_close(text: str, open_pos: int) -> int:
        in_string = False
        i = open_pos
        while i < len(text):
            ch = text[i]
            if in_string:
                if ch == "\\":
                    i += 2
                    continue
                if ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == ")" :
                return i
            i += 1
        return -1

    @staticmethod
    def _split_commas(text: str) -> list[str]:
        parts = []
        buf = []
        in_string = False
        i = 0
        while i < len(text):
            ch = text[i]
            if in_string:
                if ch == "\\" and i + 1 < len(text):
                    buf.append(text[i : i + 2])
                    i += 2
                    continue
                if ch == '"':
                    in_string = False
                buf.append(ch)
            elif ch == '"':
                in_string = True
                buf.append(ch)
            elif ch == ",":
                parts.append("".join(buf))
                buf = []
            else:
                buf.append(ch)
            i += 1
        parts.append("".join(buf))
        return parts

    def _parse_rule_term(self, token: str, line: int):
        if not token:
            self.err("SyntaxError", "empty term in rule", line)
            return None
        if token.startswith("?"):
            name = token[1:]
            if not NAME_RE.match(name):
                self.err("SyntaxError", f"invalid variable {token!r}", line)
                return None
            return Var(name)
        if token.startswith("<") and token.endswith(">"):
            try:
                return Iri(token[1:-1])
            except ValueError as e:
                self.err("SyntaxError", str(e), line)
                return None
        if token.startswith('"'):
            m = re.match(r'"((?:[^"\\]|\\.)*)"(?:\^\^([A-Za-z]+))?\Z', token)
            if not m:
                self.err("SyntaxError", f"cannot parse literal {token!r}", line)
                return None
            lex = m.group(1).replace('\\"', '"').replace("\\\\", "\\")
            dt = Datatype.STRING
            if m.group(2):
                found = datatype_by_name(m.group(2))
                if found is None:
                    self.err("SyntaxError", f"unknown datatype {m.group(2)!r}", line)
                    return None
                dt = found
                if not lexical_is_valid(dt, lex):
                    self.err("SyntaxError", f"{lex!r} is not a valid {dt.value}", line)
                    return None
            return Literal(lex, dt)
        if re.match(r"[+-]?[0-9]+\Z", token):
            return Literal(token, Datatype.INTEGER)
        if re.match(r"[+-]?[0-9]+\.[0-9]+\Z", token):
            return Literal(token, Datatype.DECIMAL)
        if token in ("true", "false"):
            return Literal(token, Datatype.BOOLEAN)
        if re.match(r"[0-9]{4}-[0-9]{2}-[0-9]{2}\Z", token):
            return Literal(token, Datatype.DATE)
        m = re.match(r"([A-Za-z_][A-Za-z0-9_]*):([A-Za-z0-9_%./\-]+)\Z", token)
        if m:
            ns = DSL_PREFIXES.get(m.group(1))
            if ns is None:
                self.err("SyntaxError", f"unknown prefix {m.group(1)!r} in rule term", line)
                return None
            return Iri(ns + m.group(2))
        self.err("SyntaxError", f"cannot parse rule term {token!r}", line)
        return None

    # -- reference resolution ----------------------------------------------

    def _resolve(self) -> Ontology:
        classes = set(self.classes)
        edges: set[tuple[str, str]] = set()
        for sub, sup, line in self.edges:
            if sup not in classes:
                self.err("UndefinedReference", f"unknown class {sup!r}", line, sup)
                continue
            edges.add((sub, sup))
        for name, decl in self.properties.items():
            line = self.prop_lines[name]
            if decl.domain not in classes:
                self.err("UndefinedReference", f"unknown domain class {decl.domain!r}", line, decl.domain)
            if decl.kind is PropertyKind.OBJECT:
                if decl.range not in classes:
                    self.err("UndefinedReference", f"unknown range class {decl.range!r}", line, decl.range)
            elif decl.range not in DATATYPE_NAMES:
                self.err("UndefinedReference", f"unknown datatype {decl.range!r}", line, decl.range)
        for name, roles in self.relations.items():
            line = self.rel_lines[name]
            if len(roles) < 2:
                self.err(
                    "SyntaxError",
                    f"relation {name!r} declares {len(roles)} role(s); at least 2 required",
                    line,
                )
            for role in roles:
                if role.filler not in classes and role.filler not in DATATYPE_NAMES:
                    self.err(
                        "UndefinedReference",
                        f"unknown role filler {role.filler!r}",
                        line,
                        role.filler,
                    )
        if self.errors:
            raise OntologyLoadError(self.errors)
        return Ontology(
            classes=frozenset(classes),
            subclass_edges=frozenset(edges),
            properties=dict(self.properties),
            relations={
                name: RelationSchema(name, tuple(roles))
                for name, roles in self.relations.items()
            },
            rules=tuple(self.rules),
        )


def load_ontology(text: str) -> Ontology:
    """Load the DSL; raises :class:`OntologyLoadError` with all errors found."""
    return _Loader().load(text)


# ---------------------------------------------------------------------------
# Rendering (the loader's inverse, used for canonical dumps and round-trips)


def _render_rule_term(t) -> str:
    if isinstance(t, Var):
        return f"?{t.name}"
    if isinstance(t, Iri):
        for prefix, ns in DSL_PREFIXES.items():
            if t.value.startswith(ns):
                local = t.value[len(ns):]
                if re.match(r"[A-Za-z0-9_%./\-]+\Z", local):
                    return f"{prefix}:{local}"
        return f"<{t.value}>"
    if isinstance(t, Literal):
        lex = t.lexical.replace("\\", "\\\\").replace('"', '\\"')
        if t.datatype is Datatype.STRING:
            return f'"{lex}"'
        return f'"{lex}"^^{t.datatype.value}'
    raise TypeError(repr(t))


def render_ontology(ont: Ontology) -> str:
    """Deterministic DSL text; loading it back reproduces the ontology."""
    lines: list[str] = []
    supers: dict[str, list[str]] = {}
    for sub, sup in ont.subclass_edges:
        supers.setdefault(sub, []).append(sup)
    for c in sorted(ont.classes):
        if c in supers:
            lines.append(f"class {c} subclassof {', '.join(sorted(supers[c]))}")
        else:
            lines.append(f"class {c}")
    for name in sorted(ont.properties):
        d = ont.properties[name]
        parts = [d.kind.value, "property", name, "domain", d.domain, "range", d.range]
        if d.min_card:
            parts += ["min", str(d.min_card)]
        if d.max_card is not None:
            parts += ["max", str(d.max_card)]
        lines.append(" ".join(parts))
    for name in sorted(ont.relations):
        schema = ont.relations[name]
        lines.append(f"relation {name}")
        for role in schema.roles:
            suffix = " required" if role.required else ""
            lines.append(f"  role {role.name} : {role.filler}{suffix}")
    for rule in ont.rules:
        name = rule.name.replace("\\", "\\\\").replace('"', '\\"')
        body = " ".join(
            f"({_render_rule_term(p.s)}, {_render_rule_term(p.p)}, {_render_rule_term(p.o)})"
            for p in rule.body
        )
        for f in rule.body_filters:
            body += f" filter({_render_rule_term(f.lhs)} {f.op} {_render_rule_term(f.rhs)})"
        head = " ".join(
            f"({_render_rule_term(p.s)}, {_render_rule_term(p.p)}, {_render_rule_term(p.o)})"
            for p in rule.head
        )
        lines.append(f'rule "{name}" when {{ {body} }} expect {{ {head} }}')
    return "\n".join(lines) + ("\n" if lines else "")


def validate_ontology(ont: Ontology) -> list[OntologyWarning]:
    """Load-time hygiene: subclass cycles and unused classes, as warnings."""
    warnings: list[OntologyWarning] = []
    cycles: list[frozenset[str]] = []
    assigned: set[str] = set()
    for c in sorted(ont.classes):
        if c in assigned:
            continue
        anc = ont.ancestors(c)
        group = frozenset(
            d for d in anc if d != c and c in ont.ancestors(d)
        ) | {c}
        strict_cycle = len(group) > 1 or (c, c) in ont.subclass_edges
        if strict_cycle:
            cycles.append(group)
            assigned |= group
    for group in cycles:
        warnings.append(
            OntologyWarning(
                "CycleWarning",
                "subclass cycle (classes are mutually equivalent): "
                + ", ".join(sorted(group)),
                group,
            )
        )
    referenced: set[str] = set()
    for sub, sup in ont.subclass_edges:
        referenced.add(sub)
        referenced.add(sup)
    for d in ont.properties.values():
        referenced.add(d.domain)
        if d.kind is PropertyKind.OBJECT:
            referenced.add(d.range)
    for schema in ont.relations.values():
        for role in schema.roles:
            referenced.add(role.filler)
    onto_prefix = WB_NS + "onto/"
    for rule in ont.rules:
        for pat in rule.body + rule.head:
            for t in (pat.s, pat.p, pat.o):
                if isinstance(t, Iri) and t.value.startswith(onto_prefix):
                    referenced.add(t.value[len(onto_prefix):])
    for c in sorted(ont.classes - referenced):
        warnings.append(
            OntologyWarning("UnusedClass", f"class {c!r} is never referenced", frozenset([c]))
        )
    return warnings
