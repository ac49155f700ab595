"""Response shaping: handles, granularity projection, token-budget guardrails.

The shaper never reorders: the output is the ranked order restricted to the
survivors. When the estimated token count exceeds the budget, abstracts are
truncated first and trailing results dropped second; both degradations are
recorded in the response notes.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional
from urllib.parse import quote

from .errors import NoMintableId
from .models import HANDLE_PREFIXES, IdKind, PublicationRecord
from .ranker import RankedResult

HINTS_VERSION = 1


class Granularity(str, Enum):
    BASIC = "basic"
    VERBOSE = "verbose"


BASIC_FIELDS = ("handle", "title", "authors", "year", "citation_count")
VERBOSE_EXTRA_FIELDS = ("venue", "doi", "abstract", "tldr", "url",
                        "external_ids", "bibtex")


def mint_handle(record: PublicationRecord) -> str:
    """Short platform-prefixed identifier, stable across calls."""
    handle = record.any_handle()
    if handle is not None:
        return f"{HANDLE_PREFIXES[handle.platform]}:{handle.value}"
    for eid in record.external_ids:
        if eid.kind is IdKind.URL:
            return f"url:{quote(eid.value, safe='')}"
    if record.url:
        return f"url:{quote(record.url, safe='')}"
    raise NoMintableId(f"record {record.title!r} has no handle or URL")


def project(record: PublicationRecord, granularity: Granularity,
            abstract_limit: Optional[int] = None) -> dict:
    """Project a record to exactly the fields of the requested granularity."""
    entry = {
        "handle": mint_handle(record),
        "title": record.title,
        "authors": list(record.authors),
        "year": record.year,
        "citation_count": record.citation_count,
    }
    if granularity is Granularity.VERBOSE:
        abstract = record.abstract
        if abstract is not None and abstract_limit is not None:
            abstract = abstract[:abstract_limit]
        entry.update({
            "venue": record.venue,
            "doi": record.doi,
            "abstract": abstract,
            "tldr": record.tldr,
            "url": record.url,
            "external_ids": [
                {"kind": e.kind.value, "value": e.value,
                 "platform": e.platform.value if e.platform else None}
                for e in record.external_ids],
            "bibtex": record.bibtex,
        })
    return entry


def estimate_tokens(entries: List[dict]) -> int:
    """ceil(chars / 4): crude, monotone, dependency-free."""
    chars = sum(len(json.dumps(entry, ensure_ascii=False)) for entry in entries)
    return math.ceil(chars / 4)


@dataclass
class ShapedResponse:
    results: List[dict]
    degradation_notes: List[str] = field(default_factory=list)
    system_hint: Optional[str] = None
    estimated_tokens: int = 0

    def to_wire(self) -> dict:
        return {
            "results": self.results,
            "degradation_notes": self.degradation_notes,
            "system_hint": self.system_hint,
            "estimated_tokens": self.estimated_tokens,
        }


def shape(ranked: List[RankedResult], count: int = 5,
          granularity: Granularity = Granularity.BASIC,
          budget: int = 3000, abstract_truncate_chars: int = 400,
          notes: Optional[List[str]] = None) -> ShapedResponse:
    """Top-count projection with token-budget enforcement."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if budget < 1:
        raise ValueError("budget must be positive")
    degradation = list(notes or [])
    survivors = ranked[:count]
    entries = [project(r.candidate.record, granularity) for r in survivors]
    tokens = estimate_tokens(entries)
    if tokens > budget and granularity is Granularity.VERBOSE:
        entries = [project(r.candidate.record, granularity,
                           abstract_limit=abstract_truncate_chars)
                   for r in survivors]
        tokens = estimate_tokens(entries)
        degradation.append(
            f"abstracts truncated to {abstract_truncate_chars} characters "
            "to fit the token budget")
    dropped = 0
    while tokens > budget and entries:
        entries.pop()
        dropped += 1
        tokens = estimate_tokens(entries)
    if dropped:
        degradation.append(
            f"dropped {dropped} trailing result(s) to fit the token budget")
    return ShapedResponse(results=entries, degradation_notes=degradation,
                          estimated_tokens=tokens)


# Versioned hint template table; prompt iterations should only touch this.
_HINT_TEMPLATES = {
    "search": ("Results carry short handles. Call /details/{handle} for full "
               "metadata (including abstract and TLDR) before posting a "
               "publication to the user's library."),
    "search_empty": ("No results matched. Consider reformulating the query or "
                     "adding supplementary search terms."),
    "details": ("The abstract and TLDR returned here can inform a short, "
                "personalized description when creating a library post; do "
                "not simply restate the title."),
    "create_post": ("Post created. Remember that publications can be edited "
                    "later, but their kind (publication vs bookmark) cannot "
                    "be changed."),
    "create_post_fetch_tags": ("ALWAYS fetch the tags the user used before "
                               "(GET /user/tags) prior to creating the first "
                               "post, and reuse them where appropriate."),
    "user_tags": ("Reuse these tags where appropriate so new posts stay "
                  "consistent with the user's existing tagging system."),
}


def hint_for(endpoint: str, context: Optional[dict] = None) -> Optional[str]:
    """Endpoint-specific in-response system hint, or None for unknown ones."""
    context = context or {}
    if endpoint == "search":
        key = "search" if context.get("has_results", True) else "search_empty"
        return _HINT_TEMPLATES[key]
    if endpoint == "create_post" and not context.get("tags_fetched", False):
        return _HINT_TEMPLATES["create_post_fetch_tags"]
    return _HINT_TEMPLATES.get(endpoint)
