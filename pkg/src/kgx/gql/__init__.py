"""Read-only graph query language: lexer, parser, and executor."""

from .ast import Query, canonical_print
from .executor import BINDING_CAP, NodeRef, ResultTable, execute
from .parser import MAX_HOPS, parse

__all__ = [
    "BINDING_CAP",
    "MAX_HOPS",
    "NodeRef",
    "Query",
    "ResultTable",
    "canonical_print",
    "execute",
    "parse",
]
