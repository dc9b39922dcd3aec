"""The four agent-facing tools behind one call/result contract.

Every failure a tool can produce — bad arguments, query errors, empty
retrieval — comes back as an error ToolResult with a machine-readable
code.  Nothing here raises past dispatch(), so a misbehaving policy can
never crash a session.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from . import gql
from .errors import (
    ArgSchemaError,
    KgxError,
    NoRelevantPublicationsError,
    UnknownToolError,
)
from .graph import Node, PropertyGraph
from .retrieval import (
    DenseIndex,
    RankedHit,
    RerankScorer,
    SparseIndex,
    fuse,
    rerank,
    tokenize,
)
from .snapshot import Chunk

TOOL_NAMES = (
    "SearchGraph",
    "SearchPublications",
    "SearchConceptsKeywords",
    "IdentifyExperts",
)

EXPERT_METRIC_NAMES = (
    "mean_relevance",
    "top_decile_count",
    "relevant_pub_count",
    "citation_sum",
    "activity_span_years",
    "recency_years",
)

DEFAULT_EXPERT_WEIGHTS = (0.25, 0.15, 0.20, 0.20, 0.10, 0.10)


@dataclass(frozen=True)
class ToolCall:
    tool_name: str
    args: dict[str, Any]
    call_id: str

    def to_dict(self) -> dict[str, Any]:
        return {"tool_name": self.tool_name, "args": self.args, "call_id": self.call_id}


@dataclass
class ToolResult:
    call_id: str
    status: str  # ok | error
    payload: Any = None
    truncated: bool = False
    elapsed: float = 0.0
    error: dict[str, str] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "call_id": self.call_id,
            "status": self.status,
            "payload": self.payload,
            "truncated": self.truncated,
            "elapsed": self.elapsed,
            "error": self.error,
        }


@dataclass(frozen=True)
class ExpertScoreBreakdown:
    author_id: str
    metrics: tuple[float, float, float, float, float, float]
    normalized: tuple[float, float, float, float, float, float]
    weights: tuple[float, float, float, float, float, float]
    composite: float


def validate_weights(weights: Sequence[float]) -> tuple[float, ...]:
    values = tuple(float(w) for w in weights)
    if len(values) != 6:
        raise ValueError(f"expected 6 expert weights, got {len(values)}")
    if any(w < 0 for w in values):
        raise ValueError("expert weights must be non-negative")
    if abs(sum(values) - 1.0) > 1e-9:
        raise ValueError(f"expert weights must sum to 1, got {sum(values)}")
    return values


def score_experts(
    metrics_by_author: Mapping[str, tuple[float, float, float, float, float, float]],
    weights: Sequence[float] = DEFAULT_EXPERT_WEIGHTS,
) -> list[ExpertScoreBreakdown]:
    """Min–max normalize six metrics and rank by the weighted composite.

    Metric order: mean relevance, top-decile count, retrieved count,
    citation sum, activity span, recency (years since last activity —
    inverted during normalization so newer means larger).  A metric that
    is constant across candidates normalizes to 0.5 for everyone.  Ties on
    the composite break by author_id ascending.
    """
    validated = validate_weights(weights)
    authors = sorted(metrics_by_author)
    if not authors:
        return []

    columns: list[list[float]] = [
        [float(metrics_by_author[a][i]) for a in authors] for i in range(6)
    ]
    normalized_columns: list[list[float]] = []
    for i, column in enumerate(columns):
        lo, hi = min(column), max(column)
        if hi > lo:
            norms = [(v - lo) / (hi - lo) for v in column]
        else:
            norms = [0.5 for _ in column]
        if i == 5:  # recency: fewer years since last activity is better
            norms = [1.0 - n for n in norms]
        normalized_columns.append(norms)

    breakdowns = []
    for pos, author_id in enumerate(authors):
        norms = tuple(normalized_columns[i][pos] for i in range(6))
        composite = sum(w * n for w, n in zip(validated, norms))
        breakdowns.append(
            ExpertScoreBreakdown(
                author_id=author_id,
                metrics=tuple(columns[i][pos] for i in range(6)),
                normalized=norms,
                weights=validated,
                composite=composite,
            )
        )
    breakdowns.sort(key=lambda b: (-b.composite, b.author_id))
    return breakdowns


def node_display_name(node: Node) -> str | None:
    for key in ("name", "title", "label"):
        value = node.props.get(key)
        if isinstance(value, str) and value:
            return value
    return None


# Argument schemas double as the manifest sent to LLM policies verbatim.
_SCHEMAS: dict[str, dict[str, Any]] = {
    "SearchGraph": {
        "description": (
            "Run a read-only graph query (Cypher-like MATCH/WHERE/RETURN) "
            "against the knowledge graph."
        ),
        "args": [
            {"name": "query", "type": "string", "required": True},
        ],
    },
    "SearchPublications": {
        "description": (
            "Hybrid full-text search over publication chunks: BM25 and "
            "dense cosine fused by reciprocal rank, then reranked."
        ),
        "args": [
            {"name": "query", "type": "string", "required": True},
            {
                "name": "k",
                "type": "integer",
                "required": False,
                "default": 10,
                "minimum": 1,
                "maximum": 100,
            },
        ],
    },
    "SearchConceptsKeywords": {
        "description": (
            "Find graph entry points: Concept and Keyword nodes whose "
            "labels match the query."
        ),
        "args": [
            {"name": "query", "type": "string", "required": True},
            {
                "name": "k",
                "type": "integer",
                "required": False,
                "default": 10,
                "minimum": 1,
                "maximum": 100,
            },
        ],
    },
    "IdentifyExperts": {
        "description": (
            "Rank authors by a six-metric composite over the publications "
            "retrieved for a topic."
        ),
        "args": [
            {"name": "topic", "type": "string", "required": True},
            {
                "name": "k",
                "type": "integer",
                "required": False,
                "default": 10,
                "minimum": 1,
                "maximum": 50,
            },
            {
                "name": "reference_year",
                "type": "integer",
                "required": True,
                "minimum": 1900,
                "maximum": 2100,
            },
        ],
    },
}


def _validate_args(tool_name: str, args: Mapping[str, Any]) -> dict[str, Any]:
    schema = _SCHEMAS[tool_name]["args"]
    known = {spec["name"] for spec in schema}
    for name in args:
        if name not in known:
            raise ArgSchemaError(f"{tool_name}: unknown argument {name!r}")
    resolved: dict[str, Any] = {}
    for spec in schema:
        name = spec["name"]
        if name not in args:
            if spec["required"]:
                raise ArgSchemaError(f"{tool_name}: missing required argument {name!r}")
            if "default" in spec:
                resolved[name] = spec["default"]
            continue
        value = args[name]
        if spec["type"] == "string":
            if not isinstance(value, str):
                raise ArgSchemaError(f"{tool_name}: {name!r} must be a string")
        elif spec["type"] == "integer":
            if not isinstance(value, int) or isinstance(value, bool):
                raise ArgSchemaError(f"{tool_name}: {name!r} must be an integer")
            if "minimum" in spec and value < spec["minimum"]:
                raise ArgSchemaError(
                    f"{tool_name}: {name!r} must be >= {spec['minimum']}"
                )
            if "maximum" in spec and value > spec["maximum"]:
                raise ArgSchemaError(
                    f"{tool_name}: {name!r} must be <= {spec['maximum']}"
                )
        resolved[name] = value
    return resolved


@dataclass
class ToolSettings:
    fuse_pool: int = 50
    rerank_pool: int = 50
    rrf_k: int = 60
    graph_row_budget: int = 500
    binding_cap: int = gql.BINDING_CAP
    weak_results_threshold: float = 0.05
    excerpt_chars: int = 300
    expert_pool: int = 100
    expert_weights: tuple[float, ...] = DEFAULT_EXPERT_WEIGHTS


class ToolRunner:
    """Stateless dispatcher over an immutable graph + indexes."""

    def __init__(
        self,
        graph: PropertyGraph,
        chunks: Mapping[str, Chunk],
        sparse: SparseIndex,
        dense: DenseIndex,
        *,
        settings: ToolSettings | None = None,
        reranker: RerankScorer | None = None,
    ):
        self.graph = graph
        self.chunks = chunks
        self.sparse = sparse
        self.dense = dense
        self.settings = settings or ToolSettings()
        self.reranker = reranker
        validate_weights(self.settings.expert_weights)
        self._texts = {cid: chunk.text for cid, chunk in chunks.items()}

    def manifest(self) -> list[dict[str, Any]]:
        return [
            {"name": name, **_SCHEMAS[name]}
            for name in TOOL_NAMES
        ]

    def dispatch(self, call: ToolCall) -> ToolResult:
        started = time.perf_counter()
        try:
            if call.tool_name not in TOOL_NAMES:
                raise UnknownToolError(f"unknown tool {call.tool_name!r}")
            args = _validate_args(call.tool_name, call.args)
            handler = {
                "SearchGraph": self._search_graph,
                "SearchPublications": self._search_publications,
                "SearchConceptsKeywords": self._search_concepts_keywords,
                "IdentifyExperts": self._identify_experts,
            }[call.tool_name]
            payload, truncated = handler(args)
        except KgxError as exc:
            return ToolResult(
                call_id=call.call_id,
                status="error",
                truncated=False,
                elapsed=time.perf_counter() - started,
                error={"code": exc.code, "message": exc.message},
            )
        return ToolResult(
            call_id=call.call_id,
            status="ok",
            payload=payload,
            truncated=truncated,
            elapsed=time.perf_counter() - started,
        )

    # -- SearchGraph --

    def _render_cell(self, cell: Any) -> Any:
        if isinstance(cell, gql.NodeRef):
            node = self.graph.node(cell.node_id)
            return {
                "id": node.id,
                "label": node.label,
                "name": node_display_name(node),
            }
        return cell

    def _search_graph(self, args: dict[str, Any]) -> tuple[dict[str, Any], bool]:
        query = gql.parse(args["query"])
        table = gql.execute(
            self.graph, query, binding_cap=self.settings.binding_cap
        )
        budget = self.settings.graph_row_budget
        truncated = table.row_count > budget
        rows = [
            [self._render_cell(cell) for cell in row] for row in table.rows[:budget]
        ]
        payload = {
            "columns": list(table.columns),
            "rows": rows,
            "row_count": table.row_count,
        }
        return payload, truncated

    # -- SearchPublications --

    def _hybrid_hits(self, query: str, k: int) -> tuple[list[RankedHit], bool]:
        settings = self.settings
        depth = max(k, settings.fuse_pool, settings.rerank_pool)
        sparse_hits = self.sparse.search(query, depth)
        dense_hits = self.dense.search(query, depth)
        fused = fuse(sparse_hits, dense_hits, depth, rrf_k=settings.rrf_k)
        pool = fused[: max(k, settings.rerank_pool)]
        return rerank(query, pool, self._texts, k, scorer=self.reranker)

    def _search_publications(self, args: dict[str, Any]) -> tuple[dict[str, Any], bool]:
        hits, used_fallback = self._hybrid_hits(args["query"], args["k"])
        excerpt_chars = self.settings.excerpt_chars
        rows = []
        for hit in hits:
            node = self.graph.node(hit.chunk_id)
            rows.append(
                {
                    "id": hit.chunk_id,
                    "title": node.props.get("title"),
                    "score": hit.score,
                    "rank": hit.rank,
                    "excerpt": self._texts[hit.chunk_id][:excerpt_chars],
                }
            )
        weak = not hits or hits[0].score < self.settings.weak_results_threshold
        payload = {
            "hits": rows,
            "weak_results": weak,
            "reranker_fallback": used_fallback,
        }
        return payload, False

    # -- SearchConceptsKeywords --

    @staticmethod
    def _label_match_score(query: str, labels: Sequence[str]) -> float:
        query_lower = query.lower()
        query_tokens = set(tokenize(query))
        best = 0.0
        for label in labels:
            label_lower = label.lower()
            if label_lower == query_lower:
                score = 1.0
            elif label_lower.startswith(query_lower):
                score = 0.8
            else:
                label_tokens = set(tokenize(label))
                union = query_tokens | label_tokens
                score = len(query_tokens & label_tokens) / len(union) if union else 0.0
            best = max(best, score)
        return best

    def _search_concepts_keywords(
        self, args: dict[str, Any]
    ) -> tuple[dict[str, Any], bool]:
        query = args["query"]
        scored: list[tuple[float, int, str, str, str]] = []
        for kind, rank in (("Concept", 0), ("Keyword", 1)):
            for node_id in self.graph.nodes_with_label(kind):
                node = self.graph.node(node_id)
                labels = [node.props.get("label", "")]
                labels.extend(node.props.get("alternate_labels", []))
                score = self._label_match_score(query, [l for l in labels if l])
                if score > 0.0:
                    scored.append((score, rank, node.props.get("label", ""), node_id, kind))
        scored.sort(key=lambda t: (-t[0], t[1], t[2], t[3]))
        matches = [
            {"id": node_id, "label": label, "kind": kind, "score": score}
            for score, _, label, node_id, kind in scored[: args["k"]]
        ]
        return {"matches": matches}, False

    # -- IdentifyExperts --

    def _identify_experts(self, args: dict[str, Any]) -> tuple[dict[str, Any], bool]:
        settings = self.settings
        pool = settings.expert_pool
        hits, used_fallback = self._hybrid_hits(args["topic"], pool)
        relevant = [h for h in hits if h.score > 0.0]
        if not relevant:
            raise NoRelevantPublicationsError(
                f"no relevant publications for topic {args['topic']!r}"
            )

        top_cut = math.ceil(0.1 * pool)
        by_author: dict[str, list[RankedHit]] = {}
        for hit in relevant:
            for edge in self.graph.in_edges(hit.chunk_id, "AUTHORED"):
                by_author.setdefault(edge.src, []).append(hit)

        reference_year = args["reference_year"]
        metrics: dict[str, tuple[float, float, float, float, float, float]] = {}
        for author_id, author_hits in by_author.items():
            years = []
            citations = 0
            for hit in author_hits:
                props = self.graph.node(hit.chunk_id).props
                years.append(int(props.get("year", reference_year)))
                citations += int(props.get("citations_count", 0))
            first_year, last_year = min(years), max(years)
            metrics[author_id] = (
                sum(h.score for h in author_hits) / len(author_hits),
                float(sum(1 for h in author_hits if h.rank <= top_cut)),
                float(len(author_hits)),
                float(citations),
                float(last_year - first_year + 1),
                float(reference_year - last_year),
            )

        breakdowns = score_experts(metrics, settings.expert_weights)[: args["k"]]
        experts = []
        for b in breakdowns:
            author = self.graph.node(b.author_id)
            experts.append(
                {
                    "author_id": b.author_id,
                    "name": author.props.get("name"),
                    "metrics": list(b.metrics),
                    "normalized": list(b.normalized),
                    "weights": list(b.weights),
                    "composite": b.composite,
                }
            )
        payload = {
            "experts": experts,
            "metric_names": list(EXPERT_METRIC_NAMES),
            "pool_size": pool,
            "reference_year": reference_year,
            "reranker_fallback": used_fallback,
        }
        return payload, False
