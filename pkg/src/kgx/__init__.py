"""Self-contained agentic knowledge-graph retrieval engine.

An embedded property graph with a Cypher-like read-only query language,
hybrid BM25 + dense retrieval with rank fusion, four agent-facing tools,
a bounded agent loop with pluggable policies, and an HTTP exploration
service — all over one deterministic snapshot file.
"""

from .agent import AgentLoop, ExternalPolicy, ScriptedPolicy, Session, render_answer
from .config import Config, load_config
from .engine import Engine, ingest_files
from .errors import KgxError
from .graph import EDGE_TYPES, NODE_LABELS, PropertyGraph
from .ingest import IngestReport, PublicationRecord, Thesaurus, ThesaurusEntry
from .retrieval import DenseIndex, HashingEmbedder, SparseIndex, fuse, rerank, tokenize
from .snapshot import Chunk, load_snapshot, save_snapshot
from .tools import ToolCall, ToolResult, ToolRunner, score_experts

__version__ = "0.1.0"

__all__ = [
    "AgentLoop",
    "Chunk",
    "Config",
    "DenseIndex",
    "EDGE_TYPES",
    "Engine",
    "ExternalPolicy",
    "HashingEmbedder",
    "IngestReport",
    "KgxError",
    "NODE_LABELS",
    "PropertyGraph",
    "PublicationRecord",
    "ScriptedPolicy",
    "Session",
    "SparseIndex",
    "Thesaurus",
    "ThesaurusEntry",
    "ToolCall",
    "ToolResult",
    "ToolRunner",
    "fuse",
    "ingest_files",
    "load_config",
    "load_snapshot",
    "render_answer",
    "rerank",
    "save_snapshot",
    "score_experts",
    "tokenize",
    "__version__",
]
