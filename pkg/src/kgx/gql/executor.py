"""Query evaluation over a property graph.

Pattern matching is homomorphic (variables may repeat nodes) with one
restriction: all edges used within a single match of one path pattern must
be distinct.  Variable-length segments enumerate distinct edge paths, so an
endpoint reachable two ways yields two bindings.

Comparisons involving a missing property evaluate to false, for every
operator.  There is no three-valued logic: NOT flips the boolean outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

from ..errors import QueryBudgetError
from ..graph import PropertyGraph
from .ast import (
    AndExpr,
    Comparison,
    CountItem,
    EdgePattern,
    Expr,
    Literal,
    NodePattern,
    NotExpr,
    OrExpr,
    PathPattern,
    PropItem,
    PropRef,
    Query,
    ReturnItem,
    VarItem,
    print_item,
)

BINDING_CAP = 100_000

Binding = dict[str, str]


@dataclass(frozen=True)
class NodeRef:
    """A node-valued result cell; carries the id, not a snapshot of props."""

    node_id: str


Cell = Any  # None | bool | int | float | str | NodeRef


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    rows: list[tuple[Cell, ...]] = field(default_factory=list)

    @property
    def row_count(self) -> int:
        return len(self.rows)


class _Budget:
    def __init__(self, cap: int):
        self.cap = cap
        self.produced = 0

    def tick(self) -> None:
        self.produced += 1
        if self.produced > self.cap:
            raise QueryBudgetError(
                f"intermediate binding count exceeded the cap of {self.cap}"
            )


def _neighbors(
    graph: PropertyGraph, node_id: str, edge: EdgePattern
) -> Iterator[tuple[str, tuple[str, str, str]]]:
    """Yield (far node id, edge key) pairs reachable over one hop."""
    if edge.direction in ("right", "undirected"):
        for e in graph.out_edges(node_id, edge.etype):
            yield e.dst, e.key
    if edge.direction in ("left", "undirected"):
        for e in graph.in_edges(node_id, edge.etype):
            yield e.src, e.key


def _expand(
    graph: PropertyGraph,
    start: str,
    edge: EdgePattern,
    used: frozenset,
) -> Iterator[tuple[str, frozenset]]:
    """Enumerate endpoints of the edge pattern, one per distinct edge path."""
    if not edge.variable_length:
        for far, key in _neighbors(graph, start, edge):
            if key not in used:
                yield far, used | {key}
        return

    def walk(current: str, depth: int, seen: frozenset) -> Iterator[tuple[str, frozenset]]:
        if depth >= edge.min_hops:
            yield current, seen
        if depth == edge.max_hops:
            return
        for far, key in _neighbors(graph, current, edge):
            if key not in seen:
                yield from walk(far, depth + 1, seen | {key})

    yield from walk(start, 0, used)


def _label_ok(graph: PropertyGraph, node: NodePattern, node_id: str) -> bool:
    return node.label is None or graph.node(node_id).label == node.label


def _match_pattern(
    graph: PropertyGraph,
    pattern: PathPattern,
    base: Binding,
    budget: _Budget,
) -> Iterator[Binding]:
    nodes, edges = pattern.nodes, pattern.edges

    def seeds() -> Iterator[str]:
        head = nodes[0]
        if head.var is not None and head.var in base:
            candidate = base[head.var]
            if _label_ok(graph, head, candidate):
                yield candidate
            return
        if head.label is not None:
            yield from graph.nodes_with_label(head.label)
        else:
            yield from graph.node_ids()

    def extend(
        idx: int, current: str, binding: Binding, used: frozenset
    ) -> Iterator[Binding]:
        if idx == len(edges):
            budget.tick()
            yield dict(binding)
            return
        target = nodes[idx + 1]
        for far, next_used in _expand(graph, current, edges[idx], used):
            if not _label_ok(graph, target, far):
                continue
            if target.var is not None:
                bound = binding.get(target.var)
                if bound is not None and bound != far:
                    continue
                if bound is None:
                    binding[target.var] = far
                    yield from extend(idx + 1, far, binding, next_used)
                    del binding[target.var]
                    continue
            yield from extend(idx + 1, far, binding, next_used)

    head = nodes[0]
    for seed in seeds():
        binding = dict(base)
        if head.var is not None:
            binding[head.var] = seed
        yield from extend(0, seed, binding, frozenset())


# -- WHERE evaluation --


def _operand_value(graph: PropertyGraph, binding: Binding, op: PropRef | Literal):
    if isinstance(op, Literal):
        return op.value
    return graph.node(binding[op.var]).props.get(op.prop)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _values_equal(left: Any, right: Any) -> bool:
    if _is_number(left) and _is_number(right):
        return left == right
    if type(left) is not type(right):
        return False
    return left == right


def _compare(left: Any, op: str, right: Any) -> bool:
    if left is None or right is None:
        return False
    if op == "=":
        return _values_equal(left, right)
    if op == "<>":
        return not _values_equal(left, right)
    if op == "CONTAINS":
        if not isinstance(left, str) or not isinstance(right, str):
            return False
        return right.lower() in left.lower()
    comparable = (_is_number(left) and _is_number(right)) or (
        isinstance(left, str) and isinstance(right, str)
    )
    if not comparable:
        return False
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise AssertionError(f"unhandled operator {op!r}")


def _eval_where(graph: PropertyGraph, binding: Binding, expr: Expr) -> bool:
    if isinstance(expr, Comparison):
        left = _operand_value(graph, binding, expr.left)
        right = _operand_value(graph, binding, expr.right)
        return _compare(left, expr.op, right)
    if isinstance(expr, NotExpr):
        return not _eval_where(graph, binding, expr.operand)
    if isinstance(expr, AndExpr):
        return _eval_where(graph, binding, expr.left) and _eval_where(
            graph, binding, expr.right
        )
    if isinstance(expr, OrExpr):
        return _eval_where(graph, binding, expr.left) or _eval_where(
            graph, binding, expr.right
        )
    raise AssertionError(f"unhandled expression {expr!r}")


# -- projection and ordering --


def _project_item(graph: PropertyGraph, binding: Binding, item: ReturnItem) -> Cell:
    if isinstance(item, PropItem):
        return graph.node(binding[item.var]).props.get(item.prop)
    if isinstance(item, VarItem):
        return NodeRef(binding[item.var])
    raise AssertionError("aggregates are not projected per binding")


def _cell_sort_key(value: Cell):
    if value is None:
        return (0, 0)
    if isinstance(value, bool):
        return (1, value)
    if isinstance(value, (int, float)):
        return (2, value)
    if isinstance(value, str):
        return (3, value)
    if isinstance(value, NodeRef):
        return (4, value.node_id)
    # List-valued properties: order elementwise by the same ranking.
    return (5, tuple(_cell_sort_key(v) for v in value))


def _strict_key(value: Cell):
    if isinstance(value, NodeRef):
        return ("node", value.node_id)
    if isinstance(value, list):
        return ("list", tuple(_strict_key(v) for v in value))
    return (type(value).__name__, value)


def execute(
    graph: PropertyGraph, query: Query, *, binding_cap: int = BINDING_CAP
) -> ResultTable:
    """Run a validated query and return an ordered result table."""
    budget = _Budget(binding_cap)
    bindings: list[Binding] = [{}]
    for pattern in query.patterns:
        folded: list[Binding] = []
        for base in bindings:
            folded.extend(_match_pattern(graph, pattern, base, budget))
        bindings = folded

    if query.where is not None:
        bindings = [b for b in bindings if _eval_where(graph, b, query.where)]

    # Deterministic base order: bound node ids, variables in first-use order.
    var_order = query.bound_vars()
    bindings.sort(key=lambda b: tuple(b[v] for v in var_order))

    columns = tuple(print_item(item) for item in query.items)
    has_agg = any(isinstance(item, CountItem) for item in query.items)

    rows: list[tuple[Cell, ...]]
    row_bindings: list[Binding] | None = None

    if has_agg:
        group_items = [
            (pos, item)
            for pos, item in enumerate(query.items)
            if not isinstance(item, CountItem)
        ]
        groups: dict[tuple, tuple[tuple[Cell, ...], list[Binding]]] = {}
        for binding in bindings:
            cells = tuple(_project_item(graph, binding, item) for _, item in group_items)
            key = tuple(_strict_key(c) for c in cells)
            if key not in groups:
                groups[key] = (cells, [])
            groups[key][1].append(binding)
        if not group_items and not groups:
            groups[()] = ((), [])
        rows = []
        for cells, members in groups.values():
            row: list[Cell] = []
            group_pos = 0
            for item in query.items:
                if isinstance(item, CountItem):
                    if item.distinct:
                        row.append(len({m[item.var] for m in members}))
                    else:
                        row.append(len(members))
                else:
                    row.append(cells[group_pos])
                    group_pos += 1
            rows.append(tuple(row))
        rows.sort(key=lambda r: tuple(_cell_sort_key(c) for c in r))
    else:
        rows = [
            tuple(_project_item(graph, binding, item) for item in query.items)
            for binding in bindings
        ]
        row_bindings = bindings

    if query.distinct:
        seen: set = set()
        deduped: list[tuple[Cell, ...]] = []
        for row in rows:
            key = tuple(_strict_key(c) for c in row)
            if key not in seen:
                seen.add(key)
                deduped.append(row)
        rows = deduped
        row_bindings = None

    if query.order_by is not None:
        item = query.order_by.item
        if item in query.items:
            idx = query.items.index(item)
            keyed = [(r[idx], r) for r in rows]
        else:
            # Validation guarantees this path only runs with live bindings.
            assert row_bindings is not None
            keyed = [
                (_project_item(graph, b, item), r)
                for b, r in zip(row_bindings, rows)
            ]
        keyed.sort(
            key=lambda pair: _cell_sort_key(pair[0]),
            reverse=query.order_by.descending,
        )
        rows = [r for _, r in keyed]

    if query.limit is not None:
        rows = rows[: query.limit]

    return ResultTable(columns=columns, rows=rows)
