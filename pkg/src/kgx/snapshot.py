"""Single-file binary snapshot of a populated store (format "KGX1").

Layout: 4 magic bytes, then four length-prefixed sections (u64 big-endian
length + payload): header, node table, edge table, chunk table. Tables are
sequences of u32-length-prefixed UTF-8 JSON records in sorted order, so a
given store always serializes to identical bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

from .errors import SnapshotFormatError
from .graph import PropertyGraph

FORMAT_VERSION = "KGX1"
_MAGIC = FORMAT_VERSION.encode("ascii")


@dataclass(frozen=True)
class Chunk:
    """Retrievable text unit: one per publication, id = publication id."""

    chunk_id: str
    text: str
    token_count: int


def _dumps(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def _write_section(fh: BinaryIO, payload: bytes) -> None:
    fh.write(struct.pack(">Q", len(payload)))
    fh.write(payload)


def _read_section(fh: BinaryIO) -> bytes:
    raw = fh.read(8)
    if len(raw) != 8:
        raise SnapshotFormatError("truncated snapshot: missing section length")
    (length,) = struct.unpack(">Q", raw)
    payload = fh.read(length)
    if len(payload) != length:
        raise SnapshotFormatError("truncated snapshot: section shorter than declared")
    return payload


def _pack_records(records: list[bytes]) -> bytes:
    parts = [struct.pack(">I", len(records))]
    for rec in records:
        parts.append(struct.pack(">I", len(rec)))
        parts.append(rec)
    return b"".join(parts)


def _unpack_records(payload: bytes) -> list[bytes]:
    if len(payload) < 4:
        raise SnapshotFormatError("malformed table section")
    (count,) = struct.unpack(">I", payload[:4])
    records = []
    offset = 4
    for _ in range(count):
        if offset + 4 > len(payload):
            raise SnapshotFormatError("malformed table section: truncated record length")
        (length,) = struct.unpack(">I", payload[offset : offset + 4])
        offset += 4
        if offset + length > len(payload):
            raise SnapshotFormatError("malformed table section: truncated record")
        records.append(payload[offset : offset + length])
        offset += length
    return records


def save_snapshot(path: str | Path, graph: PropertyGraph, chunks: dict[str, Chunk]) -> None:
    node_records = [
        _dumps({"id": n.id, "label": n.label, "props": n.props})
        for n in (graph.node(nid) for nid in graph.node_ids())
    ]
    edge_records = [
        _dumps({"src": e.src, "dst": e.dst, "etype": e.etype})
        for e in sorted(graph.edges(), key=lambda e: (e.src, e.etype, e.dst))
    ]
    chunk_records = [
        _dumps({"chunk_id": c.chunk_id, "text": c.text, "token_count": c.token_count})
        for c in (chunks[cid] for cid in sorted(chunks))
    ]
    header = _dumps(
        {
            "format": FORMAT_VERSION,
            "nodes": len(node_records),
            "edges": len(edge_records),
            "chunks": len(chunk_records),
        }
    )
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        _write_section(fh, header)
        _write_section(fh, _pack_records(node_records))
        _write_section(fh, _pack_records(edge_records))
        _write_section(fh, _pack_records(chunk_records))


def load_snapshot(path: str | Path, max_depth: int = 4) -> tuple[PropertyGraph, dict[str, Chunk]]:
    """Load a KGX1 snapshot. Any other version string fails loudly."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise SnapshotFormatError(
                f"unsupported snapshot version {magic!r}, expected {_MAGIC!r}"
            )
        header = json.loads(_read_section(fh))
        if header.get("format") != FORMAT_VERSION:
            raise SnapshotFormatError(f"unsupported header format {header.get('format')!r}")
        node_records = _unpack_records(_read_section(fh))
        edge_records = _unpack_records(_read_section(fh))
        chunk_records = _unpack_records(_read_section(fh))

    if header.get("nodes") != len(node_records) or header.get("edges") != len(edge_records):
        raise SnapshotFormatError("header counts disagree with table contents")

    graph = PropertyGraph(max_depth=max_depth)
    for raw in node_records:
        rec = json.loads(raw)
        graph.add_node(rec["label"], rec["id"], rec["props"])
    for raw in edge_records:
        rec = json.loads(raw)
        graph.add_edge(rec["src"], rec["dst"], rec["etype"])
    graph.freeze()

    chunks: dict[str, Chunk] = {}
    for raw in chunk_records:
        rec = json.loads(raw)
        chunks[rec["chunk_id"]] = Chunk(
            chunk_id=rec["chunk_id"], text=rec["text"], token_count=rec["token_count"]
        )
    return graph, chunks
