import numpy as np
import pytest

from convograph.engine import Engine, EngineConfig
from convograph.intent import EmbeddingTable


@pytest.fixture()
def config(tmp_path):
    return EngineConfig(data_dir=tmp_path / "data", seed=1234)


@pytest.fixture(scope="session")
def shared_engine(tmp_path_factory):
    """One fixture-loaded engine for read-only pipeline tests (loads once)."""
    data_dir = tmp_path_factory.mktemp("engine-data")
    return Engine(EngineConfig(data_dir=data_dir, seed=1234))


@pytest.fixture()
def engine(tmp_path):
    """A freshly isolated engine (own data dir) for tests that write."""
    return Engine(EngineConfig(data_dir=tmp_path / "data", seed=1234))


def toy_embedding_table(tokens: dict[str, list[float]]) -> EmbeddingTable:
    dim = len(next(iter(tokens.values())))
    return EmbeddingTable({t: np.asarray(v, dtype=float) for t, v in tokens.items()}, dim)
