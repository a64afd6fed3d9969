"""Rule-based authorization: stratified specificity with deny-overrides.

``acl.conf`` is line-oriented (``#`` comments)::

    user alice groups specialists,editors
    default read allow
    allow group:editors edit namespace:Main
    deny user:bob edit page:Main:Secret

Decision procedure: among matching rules, the highest resource-specificity
stratum (page=2 > namespace=1 > *=0) decides; within a stratum deny wins
over allow; with no matching rule the default policy applies, which is
deny unless a ``default <action> allow`` line says otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class Action(Enum):
    READ = "read"
    EDIT = "edit"
    ANNOTATE = "annotate"
    QUERY = "query"
    ADMIN = "admin"


_ACTIONS = {a.value: a for a in Action}

ANY_RESOURCE = "*"


@dataclass(frozen=True, slots=True)
class Principal:
    user: str
    groups: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.user:
            raise ValueError("user id must be nonempty")


@dataclass(frozen=True, slots=True)
class AclRule:
    effect: str  # "allow" | "deny"
    who: str  # "user:<id>" | "group:<name>" | "*"
    action: Action
    resource: str  # "page:<ns>:<title>" | "namespace:<ns>" | "*"
    line: int = 0

    @property
    def specificity(self) -> int:
        if self.resource.startswith("page:"):
            return 2
        if self.resource.startswith("namespace:"):
            return 1
        return 0

    def matches_principal(self, p: Principal) -> bool:
        if self.who == "*":
            return True
        if self.who.startswith("user:"):
            return self.who[5:] == p.user
        if self.who.startswith("group:"):
            return self.who[6:] in p.groups
        return False

    def matches_resource(self, resource: str) -> bool:
        if self.resource == "*":
            return True
        if self.resource == resource:
            return True
        if self.resource.startswith("namespace:") and resource.startswith("page:"):
            ns = resource.split(":", 2)[1]
            return self.resource[10:] == ns
        return False

    def render(self) -> str:
        return f"{self.effect} {self.who} {self.action.value} {self.resource}"


@dataclass(slots=True)
class AclConfig:
    rules: list[AclRule] = field(default_factory=list)
    memberships: dict[str, frozenset[str]] = field(default_factory=dict)
    defaults: dict[Action, bool] = field(default_factory=dict)  # action -> allow

    def principal(self, user: str) -> Principal:
        return Principal(user, self.memberships.get(user, frozenset()))


@dataclass(frozen=True, slots=True)
class Decision:
    allowed: bool
    matched_rule: AclRule | None = None
    default_applied: bool = False


class AclSyntaxError(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownActionError(AclSyntaxError):
    def __init__(self, line: int, action: str):
        super().__init__(line, f"unknown action {action!r}")
        self.action = action


_WHO_RE = re.compile(r"(?:\*|user:\S+|group:\S+)\Z")
_RESOURCE_RE = re.compile(r"(?:\*|namespace:[^\s:]+|page:[^\s:]+:[^\s:]+)\Z")


def page_resource(namespace: str, title: str) -> str:
    return f"page:{namespace}:{title}"


def load_acl(text: str) -> AclConfig:
    """Parse acl.conf; raises AclSyntaxError with the offending line number."""
    config = AclConfig()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "user":
            if len(parts) != 4 or parts[2] != "groups":
                raise AclSyntaxError(lineno, "expected: user <id> groups a,b")
            groups = frozenset(g for g in parts[3].split(",") if g)
            config.memberships[parts[1]] = groups
            continue
        if parts[0] == "default":
            if len(parts) != 3 or parts[2] not in ("allow", "deny"):
                raise AclSyntaxError(lineno, "expected: default <action> allow|deny")
            action = _ACTIONS.get(parts[1])
            if action is None:
                raise UnknownActionError(lineno, parts[1])
            config.defaults[action] = parts[2] == "allow"
            continue
        if parts[0] in ("allow", "deny"):
            if len(parts) != 4:
                raise AclSyntaxError(lineno, "expected: allow|deny <who> <action> <resource>")
            effect, who, action_s, resource = parts
            if not _WHO_RE.match(who):
                raise AclSyntaxError(lineno, f"bad principal selector {who!r}")
            action = _ACTIONS.get(action_s)
            if action is None:
                raise UnknownActionError(lineno, action_s)
            if not _RESOURCE_RE.match(resource):
                raise AclSyntaxError(lineno, f"bad resource selector {resource!r}")
            config.rules.append(AclRule(effect, who, action, resource, lineno))
            continue
        raise AclSyntaxError(lineno, f"unknown effect keyword {parts[0]!r}")
    return config


def authorize(
    principal: Principal,
    action: Action,
    resource: str,
    config: AclConfig,
) -> Decision:
    """Pure decision over (principal, action, resource, rules)."""
    matching = [
        r
        for r in config.rules
        if r.action is action
        and r.matches_principal(principal)
        and r.matches_resource(resource)
    ]
    if matching:
        top = max(r.specificity for r in matching)
        stratum = [r for r in matching if r.specificity == top]
        denies = [r for r in stratum if r.effect == "deny"]
        if denies:
            return Decision(False, denies[0])
        return Decision(True, stratum[0])
    return Decision(config.defaults.get(action, False), None, default_applied=True)


DEFAULT_ACL = """\
# Role presets: readers, contributors, specialists, admins.
allow group:readers read *
allow group:contributors read *
allow group:contributors edit *
allow group:contributors annotate *
allow group:specialists read *
allow group:specialists edit *
allow group:specialists annotate *
allow group:specialists query *
allow group:admins read *
allow group:admins edit *
allow group:admins annotate *
allow group:admins query *
allow group:admins admin *
"""
