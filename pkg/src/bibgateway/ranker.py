"""BM25 fusion ranking over the merged candidate pool.

Each candidate is scored with Okapi BM25 against the primary query, using
field-weighted text (title/abstract/venue) and corpus statistics computed
over the retrieved pool itself. The final score multiplies in a query-type
weight (primary matches outweigh supplementary-only matches) and a boost for
appearing on several platforms:

    final = bm25 * query_weight * (1 + boost * (n_platforms - 1))

Ties are broken by citation count, then dedup key, so the output permutation
is fully deterministic.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List

from .config import RankingConfig
from .models import dedup_key
from .query_engine import Candidate, CandidatePool

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> List[str]:
    """Lowercase Unicode word split; no stemming, no stopword removal."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class PoolStatistics:
    """Per-candidate weighted term frequencies and document lengths."""

    term_frequencies: List[Counter]
    doc_lengths: List[float]
    document_frequency: Counter
    avgdl: float
    n_docs: int


def _candidate_fields(candidate: Candidate) -> Dict[str, str]:
    record = candidate.record
    return {"title": record.title, "abstract": record.abstract or "",
            "venue": record.venue or ""}


def pool_statistics(pool: CandidatePool, config: RankingConfig) -> PoolStatistics:
    tfs, lengths = [], []
    df = Counter()
    for candidate in pool.candidates:
        tf = Counter()
        length = 0.0
        for field, text in _candidate_fields(candidate).items():
            weight = config.field_weights.get(field, 0.0)
            if weight <= 0:
                continue
            tokens = tokenize(text)
            length += weight * len(tokens)
            for token in tokens:
                tf[token] += weight
        tfs.append(tf)
        lengths.append(length)
        df.update(set(tf))
    n = len(pool.candidates)
    avgdl = sum(lengths) / n if n else 0.0
    return PoolStatistics(term_frequencies=tfs, doc_lengths=lengths,
                          document_frequency=df, avgdl=avgdl, n_docs=n)


def bm25_score(query_tokens: List[str], doc_index: int, stats: PoolStatistics,
               config: RankingConfig) -> float:
    """Okapi BM25 with the non-negative IDF variant ln(1 + (N-df+0.5)/(df+0.5))."""
    tf = stats.term_frequencies[doc_index]
    dl = stats.doc_lengths[doc_index]
    length_norm = 1.0
    if stats.avgdl > 0:
        length_norm = 1.0 - config.b + config.b * dl / stats.avgdl
    score = 0.0
    for term in query_tokens:
        freq = tf.get(term, 0.0)
        if freq <= 0:
            continue
        df = stats.document_frequency[term]
        idf = math.log(1.0 + (stats.n_docs - df + 0.5) / (df + 0.5))
        idf = max(idf, 0.0)
        score += idf * freq * (config.k1 + 1.0) / (freq + config.k1 * length_norm)
    return score


@dataclass
class RankedResult:
    candidate: Candidate
    bm25: float
    query_weight: float
    platform_factor: float
    final_score: float
    rank: int


def query_weight(candidate: Candidate, config: RankingConfig) -> float:
    """Max over matched queries, so stacking supplementary matches cannot
    outrank a primary match by accumulation."""
    return max(config.w_primary if origin.is_primary else config.w_supplementary
               for origin in candidate.matched_queries)


def rerank(pool: CandidatePool, config: RankingConfig) -> List[RankedResult]:
    stats = pool_statistics(pool, config)
    query_tokens = tokenize(pool.request.primary_expression())
    results = []
    for i, candidate in enumerate(pool.candidates):
        bm25 = bm25_score(query_tokens, i, stats, config)
        weight = query_weight(candidate, config)
        factor = 1.0 + config.platform_boost * (len(candidate.platforms) - 1)
        results.append(RankedResult(candidate=candidate, bm25=bm25,
                                    query_weight=weight, platform_factor=factor,
                                    final_score=bm25 * weight * factor, rank=0))
    results.sort(key=lambda r: (
        -r.final_score,
        -(r.candidate.record.citation_count
          if r.candidate.record.citation_count is not None else -1),
        dedup_key(r.candidate.record).canonical()))
    for position, result in enumerate(results, start=1):
        result.rank = position
    return results
