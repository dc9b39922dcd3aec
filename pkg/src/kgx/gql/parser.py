"""Recursive-descent parser and schema validator for graph queries.

Errors use the four published machine codes: SYNTAX (with line/column),
UNBOUND (variable not bound by MATCH), SCHEMA (unknown label/edge type or
an un-orderable key), BUDGET (hop range beyond the cap).
"""

from __future__ import annotations

from ..errors import (
    QueryBudgetError,
    QuerySchemaError,
    QuerySyntaxError,
    UnboundVariableError,
)
from ..graph import EDGE_TYPES, NODE_LABELS
from .ast import (
    AndExpr,
    Comparison,
    CountItem,
    EdgePattern,
    Expr,
    Literal,
    NodePattern,
    NotExpr,
    OrderBy,
    OrExpr,
    PathPattern,
    PropItem,
    PropRef,
    Query,
    ReturnItem,
    VarItem,
)
from .lexer import Token, tokenize_query

_COMPARISON_OPS = {"=", "<>", "<", "<=", ">", ">="}

MAX_HOPS = 4


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers --

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> QuerySyntaxError:
        tok = tok or self.peek()
        return QuerySyntaxError(message, tok.line, tok.column)

    def expect_punct(self, text: str) -> Token:
        tok = self.advance()
        if not tok.is_punct(text):
            raise self.error(f"expected {text!r}", tok)
        return tok

    def expect_keyword(self, word: str) -> Token:
        tok = self.advance()
        if not tok.is_keyword(word):
            raise self.error(f"expected {word}", tok)
        return tok

    def expect_ident(self, what: str) -> str:
        tok = self.advance()
        if tok.kind != "IDENT":
            raise self.error(f"expected {what}", tok)
        return str(tok.value)

    # -- grammar --

    def parse_query(self) -> Query:
        self.expect_keyword("MATCH")
        patterns = [self.parse_pattern()]
        while self.peek().is_punct(","):
            self.advance()
            patterns.append(self.parse_pattern())

        where = None
        if self.peek().is_keyword("WHERE"):
            self.advance()
            where = self.parse_or_expr()

        self.expect_keyword("RETURN")
        distinct = False
        if self.peek().is_keyword("DISTINCT"):
            self.advance()
            distinct = True
        items = [self.parse_return_item()]
        while self.peek().is_punct(","):
            self.advance()
            items.append(self.parse_return_item())

        order_by = None
        if self.peek().is_keyword("ORDER"):
            self.advance()
            self.expect_keyword("BY")
            item = self.parse_return_item()
            descending = False
            if self.peek().is_keyword("ASC"):
                self.advance()
            elif self.peek().is_keyword("DESC"):
                self.advance()
                descending = True
            order_by = OrderBy(item=item, descending=descending)

        limit = None
        if self.peek().is_keyword("LIMIT"):
            self.advance()
            tok = self.advance()
            if tok.kind != "INT":
                raise self.error("expected integer after LIMIT", tok)
            if tok.value < 1:
                raise self.error("LIMIT must be >= 1", tok)
            limit = int(tok.value)

        tok = self.peek()
        if tok.kind != "EOF":
            raise self.error(f"unexpected trailing input {tok.value!r}", tok)

        return Query(
            patterns=tuple(patterns),
            where=where,
            distinct=distinct,
            items=tuple(items),
            order_by=order_by,
            limit=limit,
        )

    def parse_pattern(self) -> PathPattern:
        nodes = [self.parse_node()]
        edges: list[EdgePattern] = []
        while self.peek().is_punct("-") or self.peek().is_punct("<-"):
            edges.append(self.parse_edge())
            nodes.append(self.parse_node())
        return PathPattern(nodes=tuple(nodes), edges=tuple(edges))

    def parse_node(self) -> NodePattern:
        self.expect_punct("(")
        var = None
        label = None
        if self.peek().kind == "IDENT":
            var = str(self.advance().value)
        if self.peek().is_punct(":"):
            self.advance()
            label = self.expect_ident("node label")
        self.expect_punct(")")
        return NodePattern(var=var, label=label)

    def parse_edge(self) -> EdgePattern:
        tok = self.advance()
        if tok.is_punct("<-"):
            if self.peek().is_punct("["):
                etype, min_hops, max_hops = self.parse_edge_body()
                self.expect_punct("-")
            elif self.peek().is_punct("-"):  # "<--" sugar
                self.advance()
                etype, min_hops, max_hops = None, 1, 1
            else:
                raise self.error("expected '[' or '-' after '<-'")
            return EdgePattern("left", etype, min_hops, max_hops)
        if tok.is_punct("-"):
            if self.peek().is_punct("["):
                etype, min_hops, max_hops = self.parse_edge_body()
                tail = self.advance()
                if tail.is_punct("->"):
                    direction = "right"
                elif tail.is_punct("-"):
                    direction = "undirected"
                else:
                    raise self.error("expected '->' or '-' after edge body", tail)
                return EdgePattern(direction, etype, min_hops, max_hops)
            if self.peek().is_punct("->"):  # "-->" sugar
                self.advance()
                return EdgePattern("right")
            if self.peek().is_punct("-"):  # "--" sugar
                self.advance()
                return EdgePattern("undirected")
            raise self.error("expected '[', '->' or '-' in edge pattern")
        raise self.error("expected edge pattern", tok)

    def parse_edge_body(self) -> tuple[str | None, int, int]:
        self.expect_punct("[")
        etype = None
        min_hops, max_hops = 1, 1
        if self.peek().is_punct(":"):
            self.advance()
            etype = self.expect_ident("edge type")
        if self.peek().is_punct("*"):
            star = self.advance()
            lo = self.advance()
            if lo.kind != "INT":
                raise self.error("expected integer hop bound", lo)
            self.expect_punct("..")
            hi = self.advance()
            if hi.kind != "INT":
                raise self.error("expected integer hop bound", hi)
            min_hops, max_hops = int(lo.value), int(hi.value)
            if min_hops < 1 or min_hops > max_hops:
                raise self.error("hop range must satisfy 1 <= min <= max", star)
            if max_hops > MAX_HOPS:
                raise QueryBudgetError(
                    f"hop bound {max_hops} exceeds the maximum of {MAX_HOPS}"
                )
        self.expect_punct("]")
        return etype, min_hops, max_hops

    def parse_or_expr(self) -> Expr:
        expr = self.parse_and_expr()
        while self.peek().is_keyword("OR"):
            self.advance()
            expr = OrExpr(expr, self.parse_and_expr())
        return expr

    def parse_and_expr(self) -> Expr:
        expr = self.parse_not_expr()
        while self.peek().is_keyword("AND"):
            self.advance()
            expr = AndExpr(expr, self.parse_not_expr())
        return expr

    def parse_not_expr(self) -> Expr:
        if self.peek().is_keyword("NOT"):
            self.advance()
            return NotExpr(self.parse_not_expr())
        if self.peek().is_punct("("):
            self.advance()
            expr = self.parse_or_expr()
            self.expect_punct(")")
            return expr
        return self.parse_comparison()

    def parse_comparison(self) -> Comparison:
        left = self.parse_operand()
        tok = self.advance()
        if tok.is_keyword("CONTAINS"):
            op = "CONTAINS"
        elif tok.kind == "PUNCT" and tok.value in _COMPARISON_OPS:
            op = str(tok.value)
        else:
            raise self.error("expected comparison operator", tok)
        right = self.parse_operand()
        return Comparison(left=left, op=op, right=right)

    def parse_operand(self) -> PropRef | Literal:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.is_keyword("TRUE"):
            self.advance()
            return Literal(True)
        if tok.kind == "IDENT" and tok.is_keyword("FALSE"):
            self.advance()
            return Literal(False)
        if tok.kind == "IDENT":
            var = str(self.advance().value)
            self.expect_punct(".")
            prop = self.expect_ident("property name")
            return PropRef(var=var, prop=prop)
        if tok.kind == "STRING":
            self.advance()
            return Literal(str(tok.value))
        if tok.kind in ("INT", "FLOAT"):
            self.advance()
            return Literal(tok.value)
        if tok.is_punct("-"):
            self.advance()
            num = self.advance()
            if num.kind not in ("INT", "FLOAT"):
                raise self.error("expected number after '-'", num)
            return Literal(-num.value)
        raise self.error("expected property reference or literal", tok)

    def parse_return_item(self) -> ReturnItem:
        tok = self.advance()
        if tok.kind != "IDENT":
            raise self.error("expected return item", tok)
        name = str(tok.value)
        if name.upper() == "COUNT" and self.peek().is_punct("("):
            self.advance()
            distinct = False
            if self.peek().is_keyword("DISTINCT"):
                self.advance()
                distinct = True
            var = self.expect_ident("variable in COUNT")
            self.expect_punct(")")
            return CountItem(var=var, distinct=distinct)
        if self.peek().is_punct("."):
            self.advance()
            prop = self.expect_ident("property name")
            return PropItem(var=name, prop=prop)
        return VarItem(var=name)


def _iter_operands(expr: Expr):
    if isinstance(expr, Comparison):
        yield expr.left
        yield expr.right
    elif isinstance(expr, NotExpr):
        yield from _iter_operands(expr.operand)
    elif isinstance(expr, (AndExpr, OrExpr)):
        yield from _iter_operands(expr.left)
        yield from _iter_operands(expr.right)


def validate(query: Query) -> None:
    """Check schema names, variable bindings, and orderability."""
    bound = set(query.bound_vars())

    for pattern in query.patterns:
        for node in pattern.nodes:
            if node.label is not None and node.label not in NODE_LABELS:
                raise QuerySchemaError(f"unknown node label {node.label!r}")
        for edge in pattern.edges:
            if edge.etype is not None and edge.etype not in EDGE_TYPES:
                raise QuerySchemaError(f"unknown edge type {edge.etype!r}")

    def check_var(var: str) -> None:
        if var not in bound:
            raise UnboundVariableError(f"variable {var!r} is not bound by MATCH")

    if query.where is not None:
        for operand in _iter_operands(query.where):
            if isinstance(operand, PropRef):
                check_var(operand.var)

    for item in query.items:
        check_var(item.var)

    if query.order_by is not None:
        check_var(query.order_by.item.var)
        has_agg = any(isinstance(i, CountItem) for i in query.items)
        if (has_agg or query.distinct) and query.order_by.item not in query.items:
            raise QuerySchemaError(
                "ORDER BY key must be a returned item when DISTINCT or COUNT is used"
            )


def parse(text: str) -> Query:
    """Parse and validate query text into an AST."""
    if not text or not text.strip():
        raise QuerySyntaxError("empty query", 1, 1)
    query = _Parser(tokenize_query(text)).parse_query()
    validate(query)
    return query
