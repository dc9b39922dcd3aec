from __future__ import annotations

import json

import pytest

from kgx.config import Config, config_from_dict, load_config
from kgx.errors import ConfigError


class TestDefaults:
    def test_defaults_validate(self):
        config = Config().validate()
        assert config.bm25_k1 == 1.2
        assert config.bm25_b == 0.75
        assert config.rrf_k == 60
        assert config.max_depth == 4
        assert config.max_steps == 8
        assert config.graph_row_budget == 500
        assert sum(config.expert_weights) == pytest.approx(1.0)

    def test_load_without_sources_returns_defaults(self, monkeypatch):
        monkeypatch.delenv("KGX_CONFIG", raising=False)
        assert load_config() == Config()


class TestValidation:
    @pytest.mark.parametrize(
        "overrides, key",
        [
            ({"bm25_k1": 0.0}, "bm25_k1"),
            ({"bm25_b": 1.5}, "bm25_b"),
            ({"bm25_b": -0.1}, "bm25_b"),
            ({"rrf_k": 0}, "rrf_k"),
            ({"fuse_pool": 0}, "fuse_pool"),
            ({"rerank_pool": 0}, "rerank_pool"),
            ({"excerpt_chars": 0}, "excerpt_chars"),
            ({"embedding_dim": 0}, "embedding_dim"),
            ({"expert_pool": 0}, "expert_pool"),
            ({"graph_row_budget": 0}, "graph_row_budget"),
            ({"binding_cap": 0}, "binding_cap"),
            ({"max_depth": 0}, "max_depth"),
            ({"max_steps": 0}, "max_steps"),
            ({"result_char_budget": 0}, "result_char_budget"),
            ({"weak_results_threshold": -0.01}, "weak_results_threshold"),
            ({"policy_timeout_s": 0.0}, "policy_timeout_s"),
            ({"transport_timeout_s": 0.0}, "transport_timeout_s"),
            ({"port": 0}, "port"),
            ({"port": 70000}, "port"),
            ({"expert_weights": (1.0, 0, 0, 0, 0)}, "expert_weights"),
            ({"expert_weights": (0.5, 0.5, 0.5, -0.5, 0, 0)}, "expert_weights"),
            ({"expert_weights": (0.5, 0.5, 0.5, 0.5, 0, 0)}, "expert_weights"),
            ({"embedder": "magic"}, "embedder"),
            ({"reranker": "magic"}, "reranker"),
            ({"policy": "magic:x"}, "policy"),
        ],
    )
    def test_each_violation_names_its_key(self, overrides, key):
        with pytest.raises(ConfigError) as excinfo:
            Config(**overrides).validate()
        assert excinfo.value.key == key
        assert key in str(excinfo.value)

    def test_valid_variants_pass(self):
        Config(embedder="external:http://e", reranker="external:http://r").validate()
        Config(policy="scripted:/tmp/x.json").validate()
        Config(policy="external:http://p").validate()
        Config(policy=None).validate()


class TestConfigFromDict:
    def test_unknown_key(self):
        with pytest.raises(ConfigError) as excinfo:
            config_from_dict({"bm25_kay_one": 1.2})
        assert excinfo.value.key == "bm25_kay_one"

    def test_weights_list_coerced_to_tuple(self):
        config = config_from_dict(
            {"expert_weights": [0.25, 0.15, 0.20, 0.20, 0.10, 0.10]}
        )
        assert config.expert_weights == (0.25, 0.15, 0.20, 0.20, 0.10, 0.10)

    def test_int_accepted_for_float_keys(self):
        config = config_from_dict({"policy_timeout_s": 30})
        assert config.policy_timeout_s == 30.0

    def test_non_numeric_float_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"bm25_k1": "fast"})

    def test_validation_applied(self):
        with pytest.raises(ConfigError) as excinfo:
            config_from_dict({"max_depth": 0})
        assert excinfo.value.key == "max_depth"


class TestLoadConfig:
    def test_explicit_path(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"port": 9001, "max_steps": 3}), "utf-8")
        config = load_config(path)
        assert config.port == 9001
        assert config.max_steps == 3
        assert config.rrf_k == 60  # untouched keys keep defaults

    def test_env_var_fallback(self, tmp_path, monkeypatch):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"port": 9002}), "utf-8")
        monkeypatch.setenv("KGX_CONFIG", str(path))
        assert load_config().port == 9002

    def test_explicit_path_beats_env(self, tmp_path, monkeypatch):
        env_path = tmp_path / "env.json"
        env_path.write_text(json.dumps({"port": 9003}), "utf-8")
        direct = tmp_path / "direct.json"
        direct.write_text(json.dumps({"port": 9004}), "utf-8")
        monkeypatch.setenv("KGX_CONFIG", str(env_path))
        assert load_config(direct).port == 9004

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", "utf-8")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(path)

    def test_top_level_must_be_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", "utf-8")
        with pytest.raises(ConfigError, match="JSON object"):
            load_config(path)
