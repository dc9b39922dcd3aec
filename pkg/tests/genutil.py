"""Random graph and query generators shared by executor and acceptance tests.

Generation goes through plain dict/list structures first so the naive oracle
never touches PropertyGraph internals; the engine-side graph is built from
the same plain data.
"""

from __future__ import annotations

import random

from kgx.gql.ast import (
    AndExpr,
    Comparison,
    CountItem,
    EdgePattern,
    Literal,
    NodePattern,
    NotExpr,
    OrExpr,
    PathPattern,
    PropItem,
    PropRef,
    Query,
    VarItem,
)
from kgx.graph import EDGE_TYPES, NODE_LABELS, PropertyGraph

WORDS = ["alpha", "beta", "gamma", "delta", "omega", "zeta"]
PROPS = ["name", "year", "citations_count", "open_access", "title"]


def random_plain_graph(
    rng: random.Random, max_nodes: int = 200
) -> tuple[dict[str, tuple[str, dict]], list[tuple[str, str, str]]]:
    # Cubic skew keeps the sweep median small while still reaching max_nodes.
    n_nodes = 1 + int(rng.random() ** 3 * (max_nodes - 1))
    labels = sorted(NODE_LABELS)
    nodes: dict[str, tuple[str, dict]] = {}
    for i in range(n_nodes):
        props: dict = {}
        if rng.random() < 0.8:
            props["name"] = rng.choice(WORDS)
        if rng.random() < 0.6:
            props["year"] = rng.randint(1995, 2025)
        if rng.random() < 0.5:
            props["citations_count"] = rng.randint(0, 40)
        if rng.random() < 0.4:
            props["open_access"] = rng.random() < 0.5
        if rng.random() < 0.3:
            props["title"] = f"{rng.choice(WORDS)} {rng.choice(WORDS)}"
        nodes[f"n{i}"] = (rng.choice(labels), props)

    by_label: dict[str, list[str]] = {}
    for node_id, (label, _) in nodes.items():
        by_label.setdefault(label, []).append(node_id)

    edges: set[tuple[str, str, str]] = set()
    target = int(n_nodes * rng.uniform(0.5, 1.8))
    etypes = sorted(EDGE_TYPES)
    for _ in range(target * 2):
        if len(edges) >= target:
            break
        etype = rng.choice(etypes)
        src_label, dst_label = EDGE_TYPES[etype]
        src_pool = by_label.get(src_label)
        dst_pool = by_label.get(dst_label)
        if not src_pool or not dst_pool:
            continue
        edges.add((rng.choice(src_pool), rng.choice(dst_pool), etype))
    return nodes, sorted(edges)


def build_property_graph(
    nodes: dict[str, tuple[str, dict]],
    edges: list[tuple[str, str, str]],
    *,
    freeze: bool = True,
) -> PropertyGraph:
    graph = PropertyGraph()
    for node_id in sorted(nodes):
        label, props = nodes[node_id]
        graph.add_node(label, node_id, dict(props))
    for src, dst, etype in edges:
        graph.add_edge(src, dst, etype)
    if freeze:
        graph.freeze()
    return graph


def _random_literal(rng: random.Random) -> Literal:
    roll = rng.random()
    if roll < 0.4:
        return Literal(rng.choice(WORDS + ["al", "ta", "nope"]))
    if roll < 0.7:
        return Literal(rng.randint(1990, 2030) if rng.random() < 0.5 else rng.randint(0, 40))
    if roll < 0.85:
        return Literal(rng.random() < 0.5)
    return Literal(round(rng.uniform(0.0, 50.0), 2))


def _random_comparison(rng: random.Random, variables: list[str]) -> Comparison:
    left = PropRef(rng.choice(variables), rng.choice(PROPS))
    if rng.random() < 0.15:
        right = PropRef(rng.choice(variables), rng.choice(PROPS))
    else:
        right = _random_literal(rng)
    op = rng.choice(["=", "<>", "<", "<=", ">", ">=", "CONTAINS"])
    return Comparison(left, op, right)


def _random_where(rng: random.Random, variables: list[str]):
    expr = _random_comparison(rng, variables)
    while rng.random() < 0.35:
        other = _random_comparison(rng, variables)
        combiner = AndExpr if rng.random() < 0.5 else OrExpr
        expr = combiner(expr, other)
    if rng.random() < 0.2:
        expr = NotExpr(expr)
    return expr


def random_query(rng: random.Random) -> Query:
    """Random valid query without ORDER BY / LIMIT (oracle compares multisets)."""
    var_pool = ["a", "b", "c", "d", "e"]
    labels = sorted(NODE_LABELS)
    etypes = sorted(EDGE_TYPES)

    patterns = []
    used_vars: list[str] = []
    n_patterns = 1 if rng.random() < 0.8 else 2
    next_var = 0
    for _ in range(n_patterns):
        n_nodes = rng.choice([1, 2, 2, 3])
        nodes = []
        edges = []
        for pos in range(n_nodes):
            # Reusing an old variable creates joins; anonymous nodes are rare.
            roll = rng.random()
            if used_vars and roll < 0.25:
                var = rng.choice(used_vars)
            elif roll < 0.9 and next_var < len(var_pool):
                var = var_pool[next_var]
                next_var += 1
                used_vars.append(var)
            else:
                var = None
            label = rng.choice(labels) if rng.random() < 0.7 else None
            nodes.append(NodePattern(var=var, label=label))
            if pos < n_nodes - 1:
                direction = rng.choice(["right", "left", "undirected"])
                etype = rng.choice(etypes) if rng.random() < 0.75 else None
                if rng.random() < 0.2:
                    min_hops = rng.randint(1, 2)
                    max_hops = rng.randint(min_hops, 3)
                else:
                    min_hops = max_hops = 1
                edges.append(
                    EdgePattern(
                        direction=direction,
                        etype=etype,
                        min_hops=min_hops,
                        max_hops=max_hops,
                    )
                )
        patterns.append(PathPattern(nodes=tuple(nodes), edges=tuple(edges)))

    if not used_vars:
        # Guarantee at least one bound variable to return.
        patterns[0] = PathPattern(
            nodes=(NodePattern(var="a", label=patterns[0].nodes[0].label),)
            + patterns[0].nodes[1:],
            edges=patterns[0].edges,
        )
        used_vars.append("a")

    where = _random_where(rng, used_vars) if rng.random() < 0.55 else None

    items: list = []
    for _ in range(rng.choice([1, 1, 2, 3])):
        var = rng.choice(used_vars)
        if rng.random() < 0.6:
            items.append(VarItem(var))
        else:
            items.append(PropItem(var, rng.choice(PROPS)))
    if rng.random() < 0.15:
        items[rng.randrange(len(items))] = CountItem(
            rng.choice(used_vars), distinct=rng.random() < 0.5
        )
    distinct = rng.random() < 0.2

    return Query(
        patterns=tuple(patterns),
        where=where,
        distinct=distinct,
        items=tuple(items),
        order_by=None,
        limit=None,
    )
