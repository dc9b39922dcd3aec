"""Hybrid text retrieval over publication chunks.

Two channels — a BM25 inverted index and an exact-scan dense index over a
deterministic hashing embedder — merged by reciprocal rank fusion, with an
optional second-stage reranker.  Everything here is pure computation over
immutable indexes; external embedding/reranking services plug in behind
small protocols.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import httpx
import numpy as np

from .errors import (
    EmptyIndexError,
    ProviderError,
    RerankerUnavailableError,
    UnknownChunkError,
    ZeroContentError,
)
from .snapshot import Chunk

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
RRF_K = 60
EMBEDDING_DIM = 256

# Unicode word characters minus underscore; no stemming, no stopword removal.
_WORD = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


@dataclass(frozen=True)
class RankedHit:
    chunk_id: str
    score: float
    rank: int
    channel: str  # sparse | dense | fused | reranked


class SparseIndex:
    """BM25 inverted index; immutable once built."""

    def __init__(self, *, k1: float = DEFAULT_K1, b: float = DEFAULT_B):
        self.k1 = k1
        self.b = b
        self.postings: dict[str, dict[str, int]] = {}
        self.doc_lengths: dict[str, int] = {}
        self.avgdl = 0.0

    @classmethod
    def build(
        cls,
        chunks: Sequence[Chunk],
        *,
        k1: float = DEFAULT_K1,
        b: float = DEFAULT_B,
    ) -> "SparseIndex":
        index = cls(k1=k1, b=b)
        for chunk in chunks:
            terms = tokenize(chunk.text)
            index.doc_lengths[chunk.chunk_id] = len(terms)
            for term in terms:
                by_chunk = index.postings.setdefault(term, {})
                by_chunk[chunk.chunk_id] = by_chunk.get(chunk.chunk_id, 0) + 1
        if index.doc_lengths:
            index.avgdl = sum(index.doc_lengths.values()) / len(index.doc_lengths)
        return index

    @property
    def size(self) -> int:
        return len(self.doc_lengths)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        n = self.size
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))

    def score(self, query_terms: Sequence[str], chunk_id: str) -> float:
        """BM25 score; repeated query terms contribute per occurrence."""
        dl = self.doc_lengths.get(chunk_id)
        if dl is None:
            raise UnknownChunkError(f"chunk {chunk_id!r} is not indexed")
        total = 0.0
        for term in query_terms:
            tf = self.postings.get(term, {}).get(chunk_id, 0)
            if tf == 0:
                continue
            # tf > 0 implies dl > 0 implies avgdl > 0, so this never divides by zero.
            norm = tf + self.k1 * (1.0 - self.b + self.b * dl / self.avgdl)
            total += self.idf(term) * tf * (self.k1 + 1.0) / norm
        return total

    def search(self, query_text: str, k: int) -> list[RankedHit]:
        if not self.doc_lengths:
            raise EmptyIndexError("sparse index has no documents")
        if k < 1:
            raise ValueError("k must be >= 1")
        terms = tokenize(query_text)
        scores = {chunk_id: 0.0 for chunk_id in self.doc_lengths}
        for term in terms:
            weight = self.idf(term)
            for chunk_id, tf in self.postings.get(term, {}).items():
                dl = self.doc_lengths[chunk_id]
                norm = tf + self.k1 * (1.0 - self.b + self.b * dl / self.avgdl)
                scores[chunk_id] += weight * tf * (self.k1 + 1.0) / norm
        ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
        return [
            RankedHit(chunk_id, score, rank, "sparse")
            for rank, (chunk_id, score) in enumerate(ordered[:k], start=1)
        ]


class Embedder(Protocol):
    dimension: int
    identifier: str

    def embed(self, text: str) -> np.ndarray: ...


class HashingEmbedder:
    """Signed feature hashing into a fixed number of buckets, L2-normalized.

    Deterministic across processes and platforms: bucket and sign are taken
    from a cryptographic digest of the token, not Python's salted hash().
    """

    identifier = "hashing-v1"

    def __init__(self, dimension: int = EMBEDDING_DIM):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        if not tokens:
            raise ZeroContentError("text has no tokens to embed")
        vector = np.zeros(self.dimension, dtype=np.float64)
        for token in tokens:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:4], "big") % self.dimension
            sign = 1.0 if digest[4] & 1 == 0 else -1.0
            vector[bucket] += sign
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            # Opposite-sign collisions cancelled every bucket.
            raise ZeroContentError("token hashes cancelled to a zero vector")
        return vector / norm


class ExternalEmbedder:
    """Embedding service client: POST {texts: [...]} -> {vectors: [[...]]}."""

    def __init__(
        self,
        base_url: str,
        *,
        dimension: int = EMBEDDING_DIM,
        timeout: float = 10.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.dimension = dimension
        self.timeout = timeout
        self.identifier = f"external:{self.base_url}"

    def embed(self, text: str) -> np.ndarray:
        try:
            response = httpx.post(
                f"{self.base_url}/embed",
                json={"texts": [text]},
                timeout=self.timeout,
            )
            response.raise_for_status()
            raw = response.json()["vectors"][0]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"embedding service failed: {exc}") from exc
        vector = np.asarray(raw, dtype=np.float64)
        if vector.shape != (self.dimension,):
            raise ProviderError(
                f"embedding service returned shape {vector.shape}, "
                f"expected ({self.dimension},)"
            )
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            raise ProviderError("embedding service returned a zero vector")
        return vector / norm


class DenseIndex:
    """Exact brute-force cosine scan over unit vectors; no approximate index."""

    def __init__(self, chunk_ids: list[str], matrix: np.ndarray, embedder: Embedder):
        self.chunk_ids = chunk_ids
        self.matrix = matrix
        self.embedder = embedder

    @classmethod
    def build(cls, chunks: Sequence[Chunk], embedder: Embedder) -> "DenseIndex":
        ordered = sorted(chunks, key=lambda c: c.chunk_id)
        ids = [chunk.chunk_id for chunk in ordered]
        if ordered:
            matrix = np.stack([embedder.embed(chunk.text) for chunk in ordered])
        else:
            matrix = np.zeros((0, embedder.dimension), dtype=np.float64)
        return cls(ids, matrix, embedder)

    @property
    def size(self) -> int:
        return len(self.chunk_ids)

    def search(self, query_text: str, k: int) -> list[RankedHit]:
        if not self.chunk_ids:
            raise EmptyIndexError("dense index has no documents")
        if k < 1:
            raise ValueError("k must be >= 1")
        query = self.embedder.embed(query_text)
        scores = self.matrix @ query
        order = sorted(
            range(len(self.chunk_ids)),
            key=lambda i: (-scores[i], self.chunk_ids[i]),
        )
        return [
            RankedHit(self.chunk_ids[i], float(scores[i]), rank, "dense")
            for rank, i in enumerate(order[:k], start=1)
        ]


def fuse(
    sparse_hits: Sequence[RankedHit],
    dense_hits: Sequence[RankedHit],
    k: int,
    *,
    rrf_k: int = RRF_K,
) -> list[RankedHit]:
    """Reciprocal rank fusion: score(c) = sum over lists of 1/(rrf_k + rank).

    Rank-only, so the fused order is invariant under any monotone rescaling
    of the channel scores.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores: dict[str, float] = {}
    for hits in (sparse_hits, dense_hits):
        for hit in hits:
            scores[hit.chunk_id] = scores.get(hit.chunk_id, 0.0) + 1.0 / (
                rrf_k + hit.rank
            )
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return [
        RankedHit(chunk_id, score, rank, "fused")
        for rank, (chunk_id, score) in enumerate(ordered[:k], start=1)
    ]


class RerankScorer(Protocol):
    def score(self, query: str, texts: Sequence[str]) -> list[float]: ...


class OverlapReranker:
    """Query-term coverage: |query terms ∩ text terms| / |query terms|."""

    def score(self, query: str, texts: Sequence[str]) -> list[float]:
        query_terms = set(tokenize(query))
        if not query_terms:
            return [0.0 for _ in texts]
        return [
            len(query_terms & set(tokenize(text))) / len(query_terms)
            for text in texts
        ]


class ExternalReranker:
    """Rerank service client: POST {query, texts} -> {scores: [...]}."""

    def __init__(self, base_url: str, *, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def score(self, query: str, texts: Sequence[str]) -> list[float]:
        try:
            response = httpx.post(
                f"{self.base_url}/rerank",
                json={"query": query, "texts": list(texts)},
                timeout=self.timeout,
            )
            response.raise_for_status()
            scores = response.json()["scores"]
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise RerankerUnavailableError(f"rerank service failed: {exc}") from exc
        if len(scores) != len(texts):
            raise RerankerUnavailableError(
                f"rerank service returned {len(scores)} scores for {len(texts)} texts"
            )
        return [float(s) for s in scores]


def rerank(
    query: str,
    candidates: Sequence[RankedHit],
    texts: Mapping[str, str],
    k: int,
    *,
    scorer: RerankScorer | None = None,
) -> tuple[list[RankedHit], bool]:
    """Reorder fused candidates; returns (hits, used_fallback).

    If the scorer is unavailable the fused order passes through unchanged
    and used_fallback is True — callers surface the flag, never the error.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scorer = scorer if scorer is not None else OverlapReranker()
    try:
        scores = scorer.score(query, [texts[c.chunk_id] for c in candidates])
    except RerankerUnavailableError:
        return [
            RankedHit(c.chunk_id, c.score, rank, "fused")
            for rank, c in enumerate(candidates[:k], start=1)
        ], True
    # Ties fall back to fused score, then chunk_id, keeping output deterministic.
    paired = sorted(
        zip(candidates, scores),
        key=lambda pair: (-pair[1], -pair[0].score, pair[0].chunk_id),
    )
    return [
        RankedHit(candidate.chunk_id, score, rank, "reranked")
        for rank, (candidate, score) in enumerate(paired[:k], start=1)
    ], False
