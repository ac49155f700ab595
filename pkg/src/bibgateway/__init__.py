"""bibgateway: federated scholarly search and publication management for
tool-calling LLMs."""

from .config import RankingConfig, ServerConfig, load_config
from .models import (DedupKey, ExternalId, IdKind, PublicationRecord,
                     SourcePlatform, dedup_key, normalize_title,
                     parse_external_id)
from .query_engine import Candidate, CandidatePool, SearchRequest, execute, plan
from .ranker import RankedResult, bm25_score, rerank, tokenize
from .server import create_app
from .shaper import Granularity, ShapedResponse, hint_for, mint_handle, shape

__version__ = "0.1.0"

__all__ = [
    "Candidate", "CandidatePool", "DedupKey", "ExternalId", "Granularity",
    "IdKind", "PublicationRecord", "RankedResult", "RankingConfig",
    "SearchRequest", "ServerConfig", "ShapedResponse", "SourcePlatform",
    "bm25_score", "create_app", "dedup_key", "execute", "hint_for",
    "load_config", "mint_handle", "normalize_title", "parse_external_id",
    "plan", "rerank", "shape", "tokenize", "__version__",
]
