from __future__ import annotations

from pathlib import Path

import pytest

import kgx
from kgx.config import Config
from kgx.engine import Engine, ingest_files

FIXTURES = Path(kgx.__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus.jsonl"
THESAURUS = FIXTURES / "thesaurus.jsonl"
SCENARIO = FIXTURES / "scenario-funding-chain.json"


@pytest.fixture(scope="session")
def fixture_paths() -> dict[str, Path]:
    return {"corpus": CORPUS, "thesaurus": THESAURUS, "scenario": SCENARIO}


@pytest.fixture(scope="session")
def built() -> tuple[Engine, object]:
    config = Config(snapshot_path=None)
    return ingest_files(CORPUS, THESAURUS, config)


@pytest.fixture(scope="session")
def engine(built) -> Engine:
    return built[0]


@pytest.fixture(scope="session")
def report(built):
    return built[1]


@pytest.fixture(scope="session")
def snapshot_path(engine, tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("snap") / "fixture.kgx"
    engine.save(path)
    return path
