"""Server configuration: YAML file plus environment-variable overrides."""

import os
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, Field, model_validator


class RankingConfig(BaseModel):
    """Tunables for the BM25 fusion ranker."""

    k1: float = 1.2
    b: float = 0.75
    w_primary: float = 1.0
    w_supplementary: float = 0.4
    platform_boost: float = 0.25
    field_weights: dict = Field(
        default_factory=lambda: {"title": 2.0, "abstract": 1.0, "venue": 0.5})

    @model_validator(mode="after")
    def _check(self) -> "RankingConfig":
        if self.k1 <= 0:
            raise ValueError("k1 must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")
        if self.w_primary <= 0 or self.w_supplementary <= 0:
            raise ValueError("query weights must be positive")
        if self.w_primary <= self.w_supplementary:
            raise ValueError("primary queries must outweigh supplementary ones")
        if self.platform_boost < 0:
            raise ValueError("platform_boost must be >= 0")
        return self


class ShaperConfig(BaseModel):
    default_count: int = 5
    token_budget: int = 3000
    abstract_truncate_chars: int = 400


class BackendConfig(BaseModel):
    scholar_index_url: str = "https://api.semanticscholar.org/graph/v1"
    scholar_index_api_key: Optional[str] = None
    bookmark_url: str = "https://www.bibsonomy.org/api"
    bookmark_username: Optional[str] = None
    bookmark_api_key: Optional[str] = None
    scraper_url: str = "http://localhost:1969"


class ServerConfig(BaseModel):
    host: str = "127.0.0.1"
    port: int = 8080
    fixture_path: Optional[str] = None  # set -> serve from mock backends
    backends: BackendConfig = Field(default_factory=BackendConfig)
    ranking: RankingConfig = Field(default_factory=RankingConfig)
    shaper: ShaperConfig = Field(default_factory=ShaperConfig)
    per_query_fetch: int = 10
    max_in_flight: int = 8
    request_deadline: float = 10.0
    max_attachment_bytes: int = 50 * 1024 * 1024
    openapi_version: str = "3.1"

    @classmethod
    def with_bundled_fixture(cls, **overrides) -> "ServerConfig":
        """A config serving the bundled offline corpus (demos, evals, tests)."""
        from importlib import resources
        path = str(resources.files("bibgateway.assets")
                   .joinpath("fixtures/eval_corpus.json"))
        return cls(fixture_path=path, **overrides)


_ENV_OVERRIDES = {
    "BIBGATEWAY_S2_API_KEY": ("backends", "scholar_index_api_key"),
    "BIBGATEWAY_BOOKMARK_USER": ("backends", "bookmark_username"),
    "BIBGATEWAY_BOOKMARK_KEY": ("backends", "bookmark_api_key"),
}


def load_config(path: Optional[str] = None) -> ServerConfig:
    """Load configuration, applying credential overrides from the environment."""
    data = {}
    if path is not None:
        data = yaml.safe_load(Path(path).read_text()) or {}
    config = ServerConfig.model_validate(data)
    for env, (section, field) in _ENV_OVERRIDES.items():
        value = os.environ.get(env)
        if value:
            setattr(getattr(config, section), field, value)
    return config
