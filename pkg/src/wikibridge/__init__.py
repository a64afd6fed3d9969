"""wikibridge: a self-contained semantic wiki engine.

Pages are plain wikitext with embedded annotation blocks. Annotations are
lowered to RDF-style quads kept in named graphs separate from the page
text, validated against an explicitly stored ontology, and queried through
a SPARQL subset. An HTTP service with ACL authorization and a CLI drive
the whole stack.
"""

from .datatypes import Datatype
from .markup import (
    AnnotationNode,
    PageSource,
    ParsedPage,
    parse_page,
    serialize_page,
    strip_annotations,
)
from .ontology import Ontology, load_ontology
from .query import evaluate, parse_query
from .semantics import check_page, lower_page, rdfs_closure
from .store import Quad, QuadStore
from .terms import Blank, Iri, Literal

__version__ = "0.1.0"

__all__ = [
    "AnnotationNode",
    "Blank",
    "Datatype",
    "Iri",
    "Literal",
    "Ontology",
    "PageSource",
    "ParsedPage",
    "Quad",
    "QuadStore",
    "check_page",
    "evaluate",
    "load_ontology",
    "lower_page",
    "parse_page",
    "parse_query",
    "rdfs_closure",
    "serialize_page",
    "strip_annotations",
]
