"""End-to-end acceptance checks, one test per contract item.

Each test prints a single `[acceptance] <name>: PASS (<elapsed>s)` line so a
plain `pytest -v -s` run reads as a checklist.  Tolerances and time budgets
are asserted, not advisory.
"""

from __future__ import annotations

import json
import math
import random
import time
from collections import Counter

import pytest

from kgx.agent import ScriptedPolicy, render_answer, session_to_json
from kgx.engine import ingest_files
from kgx.gql import execute
from kgx.gql.executor import NodeRef
from kgx.graph import distribution_from_counts
from kgx.retrieval import RankedHit, SparseIndex, fuse, tokenize
from kgx.snapshot import Chunk
from kgx.tools import score_experts, validate_weights
from kgx.errors import QueryBudgetError

from conftest import CORPUS, SCENARIO, THESAURUS
from genutil import build_property_graph, random_plain_graph, random_query
from oracles import bm25_reference, gql_reference, rrf_reference


def report(name: str, started: float, budget_s: float) -> None:
    elapsed = time.perf_counter() - started
    assert elapsed < budget_s, f"{name} took {elapsed:.2f}s, budget {budget_s}s"
    print(f"[acceptance] {name}: PASS ({elapsed:.2f}s)")


def test_a1_label_distribution_reproduces_reference_shares():
    started = time.perf_counter()
    counts = {
        "Author": 233_728,
        "Keyword": 96_588,
        "Publication": 38_791,
        "Software": 21_617,
        "Concept": 13_591,
        "Journal": 5_563,
        "Project": 3_999,
        "Domain": 2_595,
        "ResearchUnit": 299,
        "Dataset": 240,
        "Region": 19,
    }
    assert sum(counts.values()) == 417_030
    rows = distribution_from_counts(counts)
    assert [label for label, _, _ in rows] == list(counts)  # count-descending
    assert [pct for _, _, pct in rows] == [
        56.0, 23.2, 9.3, 5.2, 3.3, 1.3, 1.0, 0.6, 0.1, 0.1, 0.0,
    ]
    report("label-distribution", started, budget_s=1.0)


def test_a2_bm25_matches_formula_oracle():
    started = time.perf_counter()
    rng = random.Random(101)
    vocabulary = [f"w{i}" for i in range(60)]
    chunks = []
    for i in range(100):
        tokens = [rng.choice(vocabulary) for _ in range(rng.randint(4, 80))]
        chunks.append(Chunk(f"d{i:03d}", " ".join(tokens), len(tokens)))
    docs = {c.chunk_id: tokenize(c.text) for c in chunks}
    index = SparseIndex.build(chunks)

    comparisons = 0
    for _ in range(200):
        query = [rng.choice(vocabulary) for _ in range(rng.randint(1, 6))]
        for chunk_id in docs:
            expected = bm25_reference(docs, query, chunk_id)
            assert index.score(query, chunk_id) == pytest.approx(expected, abs=1e-9)
            comparisons += 1
    assert comparisons == 20_000
    report("bm25-oracle", started, budget_s=10.0)


def test_a3_query_rows_match_naive_enumeration():
    started = time.perf_counter()

    def cell_key(cell):
        if isinstance(cell, NodeRef):
            return ("node", cell.node_id)
        if isinstance(cell, list):
            return ("list", tuple(cell_key(c) for c in cell))
        return (type(cell).__name__, cell)

    rng = random.Random(2024)
    checked = skipped = 0
    for _ in range(100):
        nodes, edges = random_plain_graph(rng, max_nodes=200)
        graph = build_property_graph(nodes, edges)
        for _ in range(50):
            query = random_query(rng)
            try:
                table = execute(graph, query)
            except QueryBudgetError:
                skipped += 1
                continue
            got = Counter(tuple(cell_key(c) for c in row) for row in table.rows)
            assert got == gql_reference(nodes, edges, query)
            checked += 1
    assert checked + skipped == 5000
    assert checked >= 4900  # budget aborts must stay the rare exception
    report("query-oracle", started, budget_s=60.0)


def test_a4_fusion_matches_formula_and_ignores_score_scale():
    started = time.perf_counter()
    rng = random.Random(77)
    universe = [f"c{i}" for i in range(40)]

    def as_hits(ids, channel, score_fn):
        return [
            RankedHit(cid, score_fn(rank), rank, channel)
            for rank, cid in enumerate(ids, start=1)
        ]

    for _ in range(100):
        sparse_ids = rng.sample(universe, rng.randint(0, 25))
        dense_ids = rng.sample(universe, rng.randint(0, 25))
        base_score = lambda rank: 1000.0 / rank
        fused = fuse(
            as_hits(sparse_ids, "sparse", base_score),
            as_hits(dense_ids, "dense", base_score),
            len(universe),
        )
        expected = rrf_reference([sparse_ids, dense_ids])
        assert len(fused) == len(expected)
        for hit in fused:
            assert hit.score == pytest.approx(expected[hit.chunk_id], abs=1e-12)

        # Any strictly monotone rescaling of the input scores leaves both
        # the fused ordering and the fused scores untouched.
        for transform in (lambda s: 3.5 * s + 7.0, lambda s: math.exp(s / 2000.0)):
            rescaled = fuse(
                as_hits(sparse_ids, "sparse", lambda r: transform(base_score(r))),
                as_hits(dense_ids, "dense", lambda r: transform(base_score(r))),
                len(universe),
            )
            assert [h.chunk_id for h in rescaled] == [h.chunk_id for h in fused]
            assert [h.score for h in rescaled] == [h.score for h in fused]
    report("rank-fusion", started, budget_s=5.0)


def test_a5_scripted_exploration_recovers_funding_chain(engine):
    started = time.perf_counter()
    question = (
        "Who works on climate change adaptation and which funded projects "
        "cover which concepts?"
    )

    transcripts = set()
    answers = set()
    for _ in range(5):
        session = engine.loop.run(
            question, ScriptedPolicy.from_file(SCENARIO), session_id="acceptance"
        )
        assert session.status == "done"
        transcripts.add(session_to_json(session, canonical=True))
        document = render_answer(session)
        answers.add(json.dumps(document, sort_keys=True))

        chain = document["chain"]
        assert chain["stages"] == ["Author", "Publication", "Project", "Concept"]
        assert [n["id"] for n in chain["nodes"]] == [
            "alice", "bob", "carol",
            "p_cc1", "p_cc2",
            "proj_adapt", "proj_resil",
            "c_cca", "c_drought", "c_irrig", "c_soil",
        ]
        edges = {(e["source"], e["etype"], e["target"]) for e in chain["edges"]}
        assert ("alice", "AUTHORED", "p_cc1") in edges
        assert ("p_cc1", "FUNDED_BY", "proj_adapt") in edges
        assert ("p_cc2", "FUNDED_BY", "proj_resil") in edges
        assert ("proj_adapt", "DESCRIBES", "c_soil") in edges
        assert ("proj_resil", "DESCRIBES", "c_irrig") in edges
        for name in ("Alice Martin", "Bob Keller", "Carol Diaz"):
            assert name in document["answer"]

    assert len(transcripts) == 1, "canonical transcript must be bytewise stable"
    assert len(answers) == 1, "rendered answer must be stable"
    report("funding-chain-scenario", started, budget_s=5.0)


def test_a6_expert_scoring_properties():
    started = time.perf_counter()
    rng = random.Random(404)

    # determinism
    metrics = {
        f"a{i}": tuple(rng.uniform(0, 100) for _ in range(6)) for i in range(20)
    }
    assert score_experts(metrics) == score_experts(metrics)

    # single candidate pins the composite at the normalization midpoint
    solo = score_experts({"only": (9.0, 8.0, 7.0, 6.0, 5.0, 4.0)})
    assert solo[0].composite == pytest.approx(0.5)

    # weights must be a 6-vector summing to 1
    validate_weights((0.25, 0.15, 0.20, 0.20, 0.10, 0.10))
    with pytest.raises(ValueError):
        validate_weights((0.25, 0.15, 0.20, 0.20, 0.10, 0.11))
    with pytest.raises(ValueError):
        validate_weights((1.0,))

    # raising one author's citation sum never lowers that author's rank
    for _ in range(200):
        pool = {
            f"a{i}": tuple(rng.uniform(0, 50) for _ in range(6))
            for i in range(rng.randint(2, 8))
        }
        chosen = rng.choice(sorted(pool))

        def rank_of(rows):
            return next(i for i, b in enumerate(rows) if b.author_id == chosen)

        before = rank_of(score_experts(pool))
        bumped = list(pool[chosen])
        bumped[3] += rng.uniform(0.1, 100.0)
        pool[chosen] = tuple(bumped)
        after = rank_of(score_experts(pool))
        assert after <= before
    report("expert-scoring", started, budget_s=5.0)


def test_a7_ingest_round_trip_is_reproducible(tmp_path):
    started = time.perf_counter()
    first_engine, first_report = ingest_files(CORPUS, THESAURUS)
    second_engine, _ = ingest_files(CORPUS, THESAURUS)
    first_path = tmp_path / "first.bin"
    second_path = tmp_path / "second.bin"
    first_engine.save(first_path)
    second_engine.save(second_path)
    assert first_path.read_bytes() == second_path.read_bytes()

    graph = first_engine.graph
    assert first_report.total_nodes == graph.node_count()
    assert first_report.total_edges == graph.edge_count()
    for label, count in first_report.nodes_by_label.items():
        assert count == len(graph.nodes_with_label(label))
    store_types = {
        etype: n for etype, n in graph.edge_type_counts().items() if n > 0
    }
    assert first_report.edges_by_type == store_types
    assert set(first_report.chunks) == set(first_engine.chunks)
    report("ingest-round-trip", started, budget_s=10.0)
