"""In-memory directed property graph.

Eleven closed node labels, eleven closed edge types with an endpoint-label
matrix enforced at insertion. The store is mutable during an exclusive
ingestion phase and frozen afterwards; all read paths are safe for
concurrent use once frozen.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import (
    DepthExceededError,
    DuplicateIdError,
    LabelConstraintError,
    MissingEndpointError,
    StoreFrozenError,
    UnknownEdgeTypeError,
    UnknownLabelError,
    UnknownNodeError,
)

# Closed label set. Order is presentation order for reports.
NODE_LABELS: tuple[str, ...] = (
    "Author",
    "Keyword",
    "Publication",
    "Software",
    "Concept",
    "Journal",
    "Project",
    "Domain",
    "ResearchUnit",
    "Dataset",
    "Region",
)

# Endpoint-label matrix: edge type -> (source label, destination label).
# This is the engine's closed relationship schema; endpoint constraints are
# checked on every insertion.
EDGE_TYPES: dict[str, tuple[str, str]] = {
    "AUTHORED": ("Author", "Publication"),
    "HAS_KEYWORD": ("Publication", "Keyword"),
    "MENTIONS_CONCEPT": ("Publication", "Concept"),
    "PUBLISHED_IN": ("Publication", "Journal"),
    "FUNDED_BY": ("Publication", "Project"),
    "DESCRIBES": ("Project", "Concept"),
    "AFFILIATED_WITH": ("Author", "ResearchUnit"),
    "LOCATED_IN": ("ResearchUnit", "Region"),
    "IN_DOMAIN": ("Concept", "Domain"),
    "USES_SOFTWARE": ("Publication", "Software"),
    "USES_DATASET": ("Publication", "Dataset"),
}

PropertyValue = str | int | float | bool | list


@dataclass
class Node:
    id: str
    label: str
    props: dict[str, PropertyValue] = field(default_factory=dict)


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    etype: str

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.src, self.dst, self.etype)


@dataclass
class Subgraph:
    """A slice of the graph: node set plus the edges connecting it."""

    nodes: list[Node]
    edges: list[Edge]


class PropertyGraph:
    """Adjacency-list property graph indexed by (node, direction, edge type)."""

    def __init__(self, max_depth: int = 4):
        self.max_depth = max_depth
        self._nodes: dict[str, Node] = {}
        self._by_label: dict[str, list[str]] = {label: [] for label in NODE_LABELS}
        self._out: dict[str, dict[str, list[Edge]]] = {}
        self._in: dict[str, dict[str, list[Edge]]] = {}
        self._edge_keys: set[tuple[str, str, str]] = set()
        self._frozen = False

    # -- mutation (ingestion phase only) --

    def add_node(self, label: str, node_id: str, props: dict | None = None) -> Node:
        self._check_mutable()
        if label not in NODE_LABELS:
            raise UnknownLabelError(f"unknown node label {label!r}")
        if not node_id:
            raise ValueError("node id must be non-empty")
        if node_id in self._nodes:
            raise DuplicateIdError(f"node id {node_id!r} already present")
        props = dict(props or {})
        if any(not k for k in props):
            raise ValueError(f"node {node_id!r} has an empty property name")
        node = Node(id=node_id, label=label, props=props)
        self._nodes[node_id] = node
        self._by_label[label].append(node_id)
        self._out[node_id] = {}
        self._in[node_id] = {}
        return node

    def add_edge(self, src: str, dst: str, etype: str) -> Edge:
        """Insert a directed edge; duplicate (src, dst, etype) triples are no-ops."""
        self._check_mutable()
        if etype not in EDGE_TYPES:
            raise UnknownEdgeTypeError(f"unknown edge type {etype!r}")
        if src not in self._nodes:
            raise MissingEndpointError(f"source node {src!r} does not exist")
        if dst not in self._nodes:
            raise MissingEndpointError(f"destination node {dst!r} does not exist")
        want_src, want_dst = EDGE_TYPES[etype]
        got_src, got_dst = self._nodes[src].label, self._nodes[dst].label
        if (got_src, got_dst) != (want_src, want_dst):
            raise LabelConstraintError(
                f"{etype} requires {want_src}->{want_dst}, got {got_src}->{got_dst}"
            )
        edge = Edge(src=src, dst=dst, etype=etype)
        if edge.key in self._edge_keys:
            return edge
        self._edge_keys.add(edge.key)
        self._out[src].setdefault(etype, []).append(edge)
        self._in[dst].setdefault(etype, []).append(edge)
        return edge

    def freeze(self) -> None:
        """End the ingestion phase; further mutation raises."""
        self._frozen = True

    def _check_mutable(self) -> None:
        if self._frozen:
            raise StoreFrozenError("graph is frozen after ingestion commit")

    # -- reads --

    @property
    def frozen(self) -> bool:
        return self._frozen

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id!r}") from None

    def node_count(self) -> int:
        return len(self._nodes)

    def edge_count(self) -> int:
        return len(self._edge_keys)

    def node_ids(self) -> list[str]:
        return sorted(self._nodes)

    def nodes_with_label(self, label: str) -> list[str]:
        if label not in NODE_LABELS:
            raise UnknownLabelError(f"unknown node label {label!r}")
        return sorted(self._by_label[label])

    def edges(self) -> Iterator[Edge]:
        for bucket in self._out.values():
            for lst in bucket.values():
                yield from lst

    def out_edges(self, node_id: str, etype: str | None = None) -> list[Edge]:
        bucket = self._out.get(node_id, {})
        if etype is not None:
            return list(bucket.get(etype, ()))
        return [e for lst in bucket.values() for e in lst]

    def in_edges(self, node_id: str, etype: str | None = None) -> list[Edge]:
        bucket = self._in.get(node_id, {})
        if etype is not None:
            return list(bucket.get(etype, ()))
        return [e for lst in bucket.values() for e in lst]

    def edge_type_counts(self) -> dict[str, int]:
        counts = {etype: 0 for etype in EDGE_TYPES}
        for key in self._edge_keys:
            counts[key[2]] += 1
        return counts

    # -- traversal --

    def neighborhood(
        self,
        node_id: str,
        depth: int,
        etype_filter: Iterable[str] | None = None,
    ) -> Subgraph:
        """Exhaustive undirected BFS ball of radius `depth` around a node.

        Returns every node reachable within `depth` hops through permitted
        edge types plus all permitted-type edges connecting the returned
        nodes (the induced subgraph, so edges between two frontier nodes
        are included even if BFS never walked them).
        """
        if node_id not in self._nodes:
            raise UnknownNodeError(f"unknown node {node_id!r}")
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if depth > self.max_depth:
            raise DepthExceededError(f"depth {depth} exceeds maximum {self.max_depth}")
        allowed: set[str] | None = None
        if etype_filter is not None:
            allowed = set(etype_filter)
            for etype in allowed:
                if etype not in EDGE_TYPES:
                    raise UnknownEdgeTypeError(f"unknown edge type {etype!r}")

        seen = {node_id}
        frontier = deque([(node_id, 0)])
        while frontier:
            current, dist = frontier.popleft()
            if dist == depth:
                continue
            for edge in self.out_edges(current) + self.in_edges(current):
                if allowed is not None and edge.etype not in allowed:
                    continue
                nxt = edge.dst if edge.src == current else edge.src
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append((nxt, dist + 1))

        nodes = [self._nodes[nid] for nid in sorted(seen)]
        edges = sorted(
            (
                e
                for nid in seen
                for e in self.out_edges(nid)
                if e.dst in seen and (allowed is None or e.etype in allowed)
            ),
            key=lambda e: e.key,
        )
        return Subgraph(nodes=nodes, edges=edges)

    # -- statistics --

    def label_distribution(self) -> list[tuple[str, int, float]]:
        """Per-label (label, count, percentage) rows, count-descending.

        Percentages are round(100 * count / total, 1); an empty graph yields
        an empty list.
        """
        return distribution_from_counts(
            {label: len(ids) for label, ids in self._by_label.items()}
        )


def distribution_from_counts(
    counts: Mapping[str, int],
) -> list[tuple[str, int, float]]:
    """(label, count, round(100*count/total, 1)) rows, count-desc then label.

    Zero-count labels are dropped; all-zero input yields an empty list.
    """
    rows = [(label, count) for label, count in counts.items() if count > 0]
    total = sum(count for _, count in rows)
    if total == 0:
        return []
    rows.sort(key=lambda r: (-r[1], r[0]))
    return [(label, count, round(100.0 * count / total, 1)) for label, count in rows]
