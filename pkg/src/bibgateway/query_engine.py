"""Search fanout: request -> per-backend native queries -> candidate pool.

One primary query plus caller-supplied supplementary queries are fanned out
over the selected backends concurrently. Results are folded by dedup key with
provenance (which query matched, which platforms returned it). A failed
backend degrades the pool instead of aborting the search.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, model_validator

from .errors import AllBackendsFailed, BibGatewayError, NoBackendSelected
from .models import DedupKey, PublicationRecord, SourcePlatform, dedup_key
from .connectors.base import NativeQuery

SEARCH_BACKENDS = (SourcePlatform.SCHOLAR_INDEX, SourcePlatform.BOOKMARK_SERVICE)


@dataclass(frozen=True, order=True)
class QueryOrigin:
    """Which request query a native query (or a hit) came from."""

    kind: str  # "primary" | "supplementary"
    index: int = 0

    @property
    def is_primary(self) -> bool:
        return self.kind == "primary"


PRIMARY = QueryOrigin("primary")


class SearchRequest(BaseModel):
    q: Optional[str] = None
    title: Optional[str] = None
    authors: Optional[str] = None
    keywords: Optional[str] = None
    supplementary: List[str] = []
    backends: Optional[List[SourcePlatform]] = None  # None -> all search backends
    count: Optional[int] = None
    granularity: Optional[str] = None  # "basic" | "verbose"
    library_only: bool = False
    tags: List[str] = []

    @model_validator(mode="after")
    def _check(self) -> "SearchRequest":
        has_primary = any((v or "").strip() for v in
                          (self.q, self.title, self.authors, self.keywords))
        if not has_primary and not (self.library_only and self.tags):
            raise ValueError("a primary query (q or structured fields) is required")
        cleaned = []
        for entry in self.supplementary:
            if not entry.strip():
                raise ValueError("supplementary queries must be non-empty")
            if entry in cleaned:
                raise ValueError("supplementary queries must be distinct")
            cleaned.append(entry)
        if self.count is not None and self.count < 1:
            raise ValueError("count must be >= 1")
        if self.granularity not in (None, "basic", "verbose"):
            raise ValueError("granularity must be 'basic' or 'verbose'")
        return self

    def primary_expression(self) -> str:
        """Free text when given, else structured fields joined into one phrase."""
        if self.q and self.q.strip():
            return self.q.strip()
        parts = [p.strip() for p in (self.title, self.authors, self.keywords) if p]
        return " ".join(p for p in parts if p)


@dataclass
class Candidate:
    record: PublicationRecord
    matched_queries: set  # of QueryOrigin
    platforms: set  # of SourcePlatform


@dataclass
class CandidatePool:
    candidates: List[Candidate]
    request: SearchRequest
    degradation_notes: List[str] = field(default_factory=list)
    backend_latencies: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class PlannedQuery:
    native: NativeQuery
    origin: QueryOrigin


def plan(request: SearchRequest, per_query_fetch: int = 10,
         available: Tuple[SourcePlatform, ...] = SEARCH_BACKENDS) -> List[PlannedQuery]:
    """One native query per (selected backend x request query)."""
    backends = list(request.backends) if request.backends else list(available)
    backends = [b for b in backends if b in available]
    if not backends:
        raise NoBackendSelected("no search backend selected")
    queries = [(PRIMARY, request.primary_expression())]
    queries += [(QueryOrigin("supplementary", i), text)
                for i, text in enumerate(request.supplementary)]
    planned = []
    for backend in backends:
        for origin, text in queries:
            planned.append(PlannedQuery(
                native=NativeQuery(backend=backend, expression=text,
                                   limit=per_query_fetch),
                origin=origin))
    return planned


# Merge priority: richer platforms first when filling missing fields.
_MERGE_ORDER = {
    SourcePlatform.SCHOLAR_INDEX: 0,
    SourcePlatform.BOOKMARK_SERVICE: 1,
    SourcePlatform.WEB_SCRAPER: 2,
    SourcePlatform.MOCK: 3,
}

_FILLABLE = ("year", "venue", "doi", "abstract", "tldr", "citation_count",
             "url", "bibtex")


def merge_records(base: PublicationRecord, other: PublicationRecord) -> PublicationRecord:
    """Fill base's missing fields from other and union their external ids."""
    if _MERGE_ORDER[other.source] < _MERGE_ORDER[base.source]:
        base, other = other, base
    updates = {}
    for name in _FILLABLE:
        if getattr(base, name) is None and getattr(other, name) is not None:
            updates[name] = getattr(other, name)
    merged_ids = list(base.external_ids)
    seen = {(e.kind, e.platform) for e in merged_ids}
    for eid in other.external_ids:
        if (eid.kind, eid.platform) not in seen:
            merged_ids.append(eid)
            seen.add((eid.kind, eid.platform))
    updates["external_ids"] = merged_ids
    return base.model_copy(update=updates)


def execute(planned: List[PlannedQuery], connectors: Dict[SourcePlatform, object],
            request: SearchRequest, max_in_flight: int = 8) -> CandidatePool:
    """Run the fanout concurrently and fold results into a deduplicated pool.

    The fold is order-independent: outcomes are processed in a canonical
    order and the final candidate list is sorted by dedup key.
    """

    def run_one(pq: PlannedQuery):
        started = time.monotonic()
        try:
            records = connectors[pq.native.backend].search(pq.native)
            return pq, records, None, time.monotonic() - started
        except BibGatewayError as exc:
            return pq, None, exc, time.monotonic() - started

    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        outcomes = list(pool.map(run_one, planned))

    outcomes.sort(key=lambda o: (o[0].native.backend.value, o[0].origin))
    latencies = {f"{pq.native.backend.value}/{pq.origin.kind}{pq.origin.index}":
                 round(elapsed, 6) for pq, _, _, elapsed in outcomes}

    notes = []
    failures = 0
    merged: Dict[str, Candidate] = {}
    for pq, records, error, _ in outcomes:
        if error is not None:
            failures += 1
            notes.append(f"{pq.native.backend.value} "
                         f"({pq.origin.kind} query): {error}")
            continue
        for record in records:
            key = dedup_key(record).canonical()
            if key in merged:
                candidate = merged[key]
                candidate.record = merge_records(candidate.record, record)
                candidate.matched_queries.add(pq.origin)
                candidate.platforms.add(record.source)
            else:
                merged[key] = Candidate(record=record,
                                        matched_queries={pq.origin},
                                        platforms={record.source})
    if planned and failures == len(planned):
        raise AllBackendsFailed("; ".join(notes))
    candidates = [merged[key] for key in sorted(merged)]
    return CandidatePool(candidates=candidates, request=request,
                         degradation_notes=notes, backend_latencies=latencies)
