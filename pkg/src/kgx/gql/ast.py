"""Query AST and its canonical single-line text form.

The canonical form is the round-trip anchor: parsing the printed text of any
valid AST yields a structurally identical AST. WHERE trees print fully
parenthesized so the tree shape survives re-parsing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class NodePattern:
    var: str | None = None
    label: str | None = None


@dataclass(frozen=True)
class EdgePattern:
    direction: str  # "right" | "left" | "undirected", read left to right
    etype: str | None = None
    min_hops: int = 1
    max_hops: int = 1

    @property
    def variable_length(self) -> bool:
        return (self.min_hops, self.max_hops) != (1, 1)


@dataclass(frozen=True)
class PathPattern:
    nodes: tuple[NodePattern, ...]
    edges: tuple[EdgePattern, ...]


@dataclass(frozen=True)
class PropRef:
    var: str
    prop: str


@dataclass(frozen=True, eq=False)
class Literal:
    """Scalar literal with type-strict equality (1 is not true, 1 is not 1.0)."""

    value: Union[str, int, float, bool]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Literal)
            and type(self.value) is type(other.value)
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((type(self.value).__name__, self.value))


Operand = Union[PropRef, Literal]


@dataclass(frozen=True)
class Comparison:
    left: Operand
    op: str  # = <> < <= > >= CONTAINS
    right: Operand


@dataclass(frozen=True)
class NotExpr:
    operand: "Expr"


@dataclass(frozen=True)
class AndExpr:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class OrExpr:
    left: "Expr"
    right: "Expr"


Expr = Union[Comparison, NotExpr, AndExpr, OrExpr]


@dataclass(frozen=True)
class VarItem:
    var: str


@dataclass(frozen=True)
class PropItem:
    var: str
    prop: str


@dataclass(frozen=True)
class CountItem:
    var: str
    distinct: bool = False


ReturnItem = Union[VarItem, PropItem, CountItem]


@dataclass(frozen=True)
class OrderBy:
    item: ReturnItem
    descending: bool = False


@dataclass(frozen=True)
class Query:
    patterns: tuple[PathPattern, ...]
    where: Expr | None
    distinct: bool
    items: tuple[ReturnItem, ...]
    order_by: OrderBy | None = None
    limit: int | None = None

    def bound_vars(self) -> list[str]:
        """Variables bound by MATCH, in first-appearance order."""
        seen: list[str] = []
        for pattern in self.patterns:
            for node in pattern.nodes:
                if node.var is not None and node.var not in seen:
                    seen.append(node.var)
        return seen


# -- canonical printing ---------------------------------------------------------

def _print_literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{escaped}'"
    return repr(value)


def _print_operand(operand: Operand) -> str:
    if isinstance(operand, PropRef):
        return f"{operand.var}.{operand.prop}"
    return _print_literal(operand.value)


def _print_expr(expr: Expr) -> str:
    if isinstance(expr, Comparison):
        return f"{_print_operand(expr.left)} {expr.op} {_print_operand(expr.right)}"
    if isinstance(expr, NotExpr):
        return f"NOT ({_print_expr(expr.operand)})"
    if isinstance(expr, AndExpr):
        return f"({_print_expr(expr.left)} AND {_print_expr(expr.right)})"
    if isinstance(expr, OrExpr):
        return f"({_print_expr(expr.left)} OR {_print_expr(expr.right)})"
    raise TypeError(f"not an expression: {expr!r}")


def _print_node(node: NodePattern) -> str:
    inner = node.var or ""
    if node.label is not None:
        inner += f":{node.label}"
    return f"({inner})"


def _print_edge(edge: EdgePattern) -> str:
    body = f":{edge.etype}" if edge.etype is not None else ""
    if edge.variable_length:
        body += f"*{edge.min_hops}..{edge.max_hops}"
    if edge.direction == "right":
        return f"-[{body}]->"
    if edge.direction == "left":
        return f"<-[{body}]-"
    return f"-[{body}]-"


def _print_pattern(pattern: PathPattern) -> str:
    parts = [_print_node(pattern.nodes[0])]
    for edge, node in zip(pattern.edges, pattern.nodes[1:]):
        parts.append(_print_edge(edge))
        parts.append(_print_node(node))
    return "".join(parts)


def print_item(item: ReturnItem) -> str:
    if isinstance(item, VarItem):
        return item.var
    if isinstance(item, PropItem):
        return f"{item.var}.{item.prop}"
    if isinstance(item, CountItem):
        return f"COUNT(DISTINCT {item.var})" if item.distinct else f"COUNT({item.var})"
    raise TypeError(f"not a return item: {item!r}")


def canonical_print(query: Query) -> str:
    """Render a query as canonical single-line text; parse() inverts this."""
    parts = ["MATCH ", ", ".join(_print_pattern(p) for p in query.patterns)]
    if query.where is not None:
        parts.append(f" WHERE {_print_expr(query.where)}")
    parts.append(" RETURN ")
    if query.distinct:
        parts.append("DISTINCT ")
    parts.append(", ".join(print_item(i) for i in query.items))
    if query.order_by is not None:
        direction = "DESC" if query.order_by.descending else "ASC"
        parts.append(f" ORDER BY {print_item(query.order_by.item)} {direction}")
    if query.limit is not None:
        parts.append(f" LIMIT {query.limit}")
    return "".join(parts)
