"""Engine aggregate: one immutable snapshot's graph, chunks, and indexes,
wired to the tool dispatcher and agent loop.

Indexes are rebuilt deterministically from chunk data at load, so a
snapshot file is the single artifact of an ingest.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .agent import AgentLoop, ExternalPolicy, Policy, ScriptedPolicy
from .config import Config
from .graph import PropertyGraph
from .ingest import (
    IngestReport,
    PublicationRecord,
    Thesaurus,
    load_corpus,
    load_thesaurus,
    populate,
)
from .retrieval import (
    DenseIndex,
    Embedder,
    ExternalEmbedder,
    ExternalReranker,
    HashingEmbedder,
    RerankScorer,
    SparseIndex,
)
from .snapshot import Chunk, load_snapshot, save_snapshot
from .tools import ToolRunner, ToolSettings


def _make_embedder(config: Config) -> Embedder:
    if config.embedder == "hashing":
        return HashingEmbedder(config.embedding_dim)
    base_url = config.embedder.removeprefix("external:")
    return ExternalEmbedder(
        base_url,
        dimension=config.embedding_dim,
        timeout=config.transport_timeout_s,
    )


def _make_reranker(config: Config) -> RerankScorer | None:
    if config.reranker == "overlap":
        return None  # ToolRunner falls back to the deterministic overlap scorer
    base_url = config.reranker.removeprefix("external:")
    return ExternalReranker(base_url, timeout=config.transport_timeout_s)


def _tool_settings(config: Config) -> ToolSettings:
    return ToolSettings(
        fuse_pool=config.fuse_pool,
        rerank_pool=config.rerank_pool,
        rrf_k=config.rrf_k,
        graph_row_budget=config.graph_row_budget,
        binding_cap=config.binding_cap,
        weak_results_threshold=config.weak_results_threshold,
        excerpt_chars=config.excerpt_chars,
        expert_pool=config.expert_pool,
        expert_weights=tuple(config.expert_weights),
    )


@dataclass
class Engine:
    graph: PropertyGraph
    chunks: Mapping[str, Chunk]
    sparse: SparseIndex
    dense: DenseIndex
    runner: ToolRunner
    loop: AgentLoop
    config: Config

    @classmethod
    def _assemble(
        cls, graph: PropertyGraph, chunks: Mapping[str, Chunk], config: Config
    ) -> "Engine":
        ordered = [chunks[cid] for cid in sorted(chunks)]
        sparse = SparseIndex.build(ordered, k1=config.bm25_k1, b=config.bm25_b)
        dense = DenseIndex.build(ordered, _make_embedder(config))
        runner = ToolRunner(
            graph,
            chunks,
            sparse,
            dense,
            settings=_tool_settings(config),
            reranker=_make_reranker(config),
        )
        loop = AgentLoop(
            runner,
            max_steps=config.max_steps,
            policy_timeout_s=config.policy_timeout_s,
            result_char_budget=config.result_char_budget,
        )
        return cls(
            graph=graph,
            chunks=chunks,
            sparse=sparse,
            dense=dense,
            runner=runner,
            loop=loop,
            config=config,
        )

    @classmethod
    def build(
        cls,
        records: Sequence[PublicationRecord],
        thesaurus: Thesaurus | None,
        config: Config | None = None,
    ) -> tuple["Engine", IngestReport]:
        config = config or Config().validate()
        graph = PropertyGraph(max_depth=config.max_depth)
        report = populate(graph, records, thesaurus)
        graph.freeze()
        return cls._assemble(graph, report.chunks, config), report

    @classmethod
    def from_snapshot(cls, path: str | Path, config: Config | None = None) -> "Engine":
        config = config or Config().validate()
        graph, chunks = load_snapshot(path, max_depth=config.max_depth)
        return cls._assemble(graph, chunks, config)

    def save(self, path: str | Path) -> None:
        save_snapshot(path, self.graph, dict(self.chunks))

    def make_policy(self, spec: str) -> Policy:
        if spec.startswith("scripted:"):
            return ScriptedPolicy.from_file(spec.removeprefix("scripted:"))
        if spec.startswith("external:"):
            return ExternalPolicy(
                spec.removeprefix("external:"),
                timeout=self.config.transport_timeout_s,
                result_char_budget=self.config.result_char_budget,
            )
        raise ValueError(f"unknown policy kind in {spec!r}")


def ingest_files(
    corpus_path: str | Path,
    thesaurus_path: str | Path | None,
    config: Config | None = None,
    *,
    year_window: tuple[int, int] | None = None,
) -> tuple[Engine, IngestReport]:
    """Full pipeline: parse files, populate a fresh graph, build indexes."""
    records, load_errors = load_corpus(corpus_path, year_window=year_window)
    thesaurus = load_thesaurus(thesaurus_path) if thesaurus_path is not None else None
    engine, report = Engine.build(records, thesaurus, config)
    report.errors = load_errors + report.errors
    return engine, report
