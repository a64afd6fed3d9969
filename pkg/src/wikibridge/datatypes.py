"""The five built-in literal datatypes and their lexical spaces."""

from __future__ import annotations

import datetime
import re
from enum import Enum

XSD = "http://www.w3.org/2001/XMLSchema#"


class Datatype(Enum):
    STRING = "string"
    INTEGER = "integer"
    DECIMAL = "decimal"
    BOOLEAN = "boolean"
    DATE = "date"

    @property
    def xsd_iri(self) -> str:
        return XSD + self.value


DATATYPE_NAMES = frozenset(d.value for d in Datatype)

_BY_NAME = {d.value: d for d in Datatype}
_BY_IRI = {d.xsd_iri: d for d in Datatype}

INTEGER_RE = re.compile(r"[+-]?[0-9]+\Z")
# One optional point; a pointless lexical like "12" is still a valid decimal.
DECIMAL_RE = re.compile(r"[+-]?[0-9]+(?:\.[0-9]+)?\Z")
DECIMAL_POINT_RE = re.compile(r"[+-]?[0-9]+\.[0-9]+\Z")
DATE_RE = re.compile(r"([0-9]{4})-([0-9]{2})-([0-9]{2})\Z")


def datatype_by_name(name: str) -> Datatype | None:
    return _BY_NAME.get(name)


def datatype_by_iri(iri: str) -> Datatype | None:
    return _BY_IRI.get(iri)


def is_calendar_date(lexical: str) -> bool:
    m = DATE_RE.match(lexical)
    if not m:
        return False
    try:
        datetime.date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    except ValueError:
        return False
    return True


def lexical_is_valid(datatype: Datatype, lexical: str) -> bool:
    """True iff ``lexical`` is in the lexical space of ``datatype``."""
    if datatype is Datatype.STRING:
        return True
    if datatype is Datatype.INTEGER:
        return INTEGER_RE.match(lexical) is not None
    if datatype is Datatype.DECIMAL:
        return DECIMAL_RE.match(lexical) is not None
    if datatype is Datatype.BOOLEAN:
        return lexical in ("true", "false")
    if datatype is Datatype.DATE:
        return is_calendar_date(lexical)
    raise AssertionError(datatype)
