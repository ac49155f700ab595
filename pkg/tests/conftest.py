import warnings
from importlib import resources

import pytest

warnings.filterwarnings("ignore", message="Using `httpx` with")

from fastapi.testclient import TestClient  # noqa: E402

from bibgateway.config import ServerConfig
from bibgateway.connectors import MockFixture
from bibgateway.server import create_app

FIXTURE_PATH = str(resources.files("bibgateway.assets")
                   .joinpath("fixtures/eval_corpus.json"))

AUTH = {"X-Username": "demo", "X-Api-Key": "demo-key"}


@pytest.fixture
def fixture() -> MockFixture:
    return MockFixture.load(FIXTURE_PATH)


@pytest.fixture
def config() -> ServerConfig:
    return ServerConfig(fixture_path=FIXTURE_PATH)


@pytest.fixture
def app(config):
    return create_app(config)


@pytest.fixture
def client(app):
    return TestClient(app)
