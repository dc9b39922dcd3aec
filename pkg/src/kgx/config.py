"""Runtime configuration: one flat record, validated at load.

Every tunable the engine exposes lives here with its default.  Validation
failures always name the offending key, so a bad deployment aborts with
an actionable message instead of a latent misbehavior.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .tools import DEFAULT_EXPERT_WEIGHTS

ENV_CONFIG_PATH = "KGX_CONFIG"


@dataclass
class Config:
    # data
    snapshot_path: str = "kgx-snapshot.bin"
    # retrieval
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    rrf_k: int = 60
    fuse_pool: int = 50
    rerank_pool: int = 50
    weak_results_threshold: float = 0.05
    excerpt_chars: int = 300
    embedding_dim: int = 256
    embedder: str = "hashing"  # hashing | external:<base url>
    reranker: str = "overlap"  # overlap | external:<base url>
    # experts
    expert_pool: int = 100
    expert_weights: tuple[float, ...] = DEFAULT_EXPERT_WEIGHTS
    # graph queries
    graph_row_budget: int = 500
    binding_cap: int = 100_000
    max_depth: int = 4
    # agent
    max_steps: int = 8
    policy_timeout_s: float = 60.0
    transport_timeout_s: float = 10.0
    result_char_budget: int = 8000
    policy: str | None = None  # scripted:<file> | external:<endpoint>
    # service
    host: str = "127.0.0.1"
    port: int = 8000

    def validate(self) -> "Config":
        def require(condition: bool, key: str, message: str) -> None:
            if not condition:
                raise ConfigError(key, message)

        require(self.bm25_k1 > 0, "bm25_k1", "must be > 0")
        require(0.0 <= self.bm25_b <= 1.0, "bm25_b", "must be in [0, 1]")
        require(self.rrf_k >= 1, "rrf_k", "must be >= 1")
        for key in (
            "fuse_pool",
            "rerank_pool",
            "excerpt_chars",
            "embedding_dim",
            "expert_pool",
            "graph_row_budget",
            "binding_cap",
            "max_depth",
            "max_steps",
            "result_char_budget",
        ):
            require(getattr(self, key) >= 1, key, "must be >= 1")
        require(
            self.weak_results_threshold >= 0.0, "weak_results_threshold", "must be >= 0"
        )
        require(self.policy_timeout_s > 0, "policy_timeout_s", "must be > 0")
        require(self.transport_timeout_s > 0, "transport_timeout_s", "must be > 0")
        require(1 <= self.port <= 65535, "port", "must be in [1, 65535]")

        weights = self.expert_weights
        require(len(weights) == 6, "expert_weights", "must have 6 entries")
        require(
            all(w >= 0 for w in weights), "expert_weights", "must be non-negative"
        )
        require(
            abs(sum(weights) - 1.0) <= 1e-9,
            "expert_weights",
            f"must sum to 1 (got {sum(weights)})",
        )

        require(
            self.embedder == "hashing" or self.embedder.startswith("external:"),
            "embedder",
            "must be 'hashing' or 'external:<base url>'",
        )
        require(
            self.reranker == "overlap" or self.reranker.startswith("external:"),
            "reranker",
            "must be 'overlap' or 'external:<base url>'",
        )
        if self.policy is not None:
            require(
                self.policy.startswith(("scripted:", "external:")),
                "policy",
                "must be 'scripted:<file>' or 'external:<endpoint>'",
            )
        return self


_FLOAT_KEYS = {
    "bm25_k1",
    "bm25_b",
    "weak_results_threshold",
    "policy_timeout_s",
    "transport_timeout_s",
}


def config_from_dict(data: dict) -> Config:
    known = {f.name for f in fields(Config)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
        if key == "expert_weights":
            if not isinstance(value, (list, tuple)):
                raise ConfigError(key, "must be a list of 6 numbers")
            value = tuple(float(v) for v in value)
        elif key in _FLOAT_KEYS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(key, "must be a number")
            value = float(value)
        kwargs[key] = value
    try:
        config = Config(**kwargs)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc
    return config.validate()


def load_config(path: str | Path | None = None) -> Config:
    """Load config from an explicit path, else $KGX_CONFIG, else defaults."""
    if path is None:
        env = os.environ.get(ENV_CONFIG_PATH)
        path = env if env else None
    if path is None:
        return Config().validate()
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must contain a JSON object")
    return config_from_dict(data)
