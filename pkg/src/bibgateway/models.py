"""Canonical domain types and identifier parsing/normalization.

Everything here is an immutable value; all functions are pure.
"""

import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from .errors import UnrecognizedIdentifier


class SourcePlatform(str, Enum):
    SCHOLAR_INDEX = "scholar_index"
    BOOKMARK_SERVICE = "bookmark_service"
    WEB_SCRAPER = "web_scraper"
    MOCK = "mock"


class IdKind(str, Enum):
    DOI = "doi"
    ARXIV = "arxiv"
    ACL = "acl"
    URL = "url"
    HANDLE = "handle"


# Short prefixes used when minting handles; the reverse map drives parsing.
HANDLE_PREFIXES = {
    SourcePlatform.SCHOLAR_INDEX: "s2",
    SourcePlatform.BOOKMARK_SERVICE: "bib",
    SourcePlatform.WEB_SCRAPER: "url",
    SourcePlatform.MOCK: "mock",
}
PREFIX_PLATFORMS = {v: k for k, v in HANDLE_PREFIXES.items()}


class ExternalId(BaseModel):
    """A tagged identifier: DOI, arXiv-ID, ACL-ID, URL, or backend handle.

    For HANDLE kind, ``platform`` names the platform that issued the id and
    ``value`` is the platform-native, case-sensitive identifier (no prefix).
    """

    model_config = ConfigDict(frozen=True)

    kind: IdKind
    value: str
    platform: Optional[SourcePlatform] = None

    @model_validator(mode="after")
    def _check_platform(self) -> "ExternalId":
        if self.kind is IdKind.HANDLE and self.platform is None:
            raise ValueError("handle ids must name their platform")
        if self.kind is not IdKind.HANDLE and self.platform is not None:
            raise ValueError("platform is only meaningful for handles")
        return self


DOI_RE = re.compile(r"^10\.\d{4,9}/\S+$")
ARXIV_RE = re.compile(r"^(?:arxiv:)?(\d{4}\.\d{4,5}(?:v\d+)?)$", re.IGNORECASE)
ACL_RE = re.compile(r"^(?:\d{4}\.[a-z0-9]+-[a-z0-9]+\.\d+|[A-Z]\d{2}-\d{4})$")
URL_RE = re.compile(r"^https?://\S+$")
HANDLE_RE = re.compile(r"^(s2|bib|url|mock):(\S+)$")

_DOI_PREFIXES = ("doi:", "https://doi.org/", "http://doi.org/",
                 "https://dx.doi.org/", "http://dx.doi.org/")


def normalize_doi(text: str) -> Optional[str]:
    """Strip common DOI prefixes and lowercase; None if the core is not a DOI."""
    doi = text.strip()
    lowered = doi.lower()
    for prefix in _DOI_PREFIXES:
        if lowered.startswith(prefix):
            doi = doi[len(prefix):]
            lowered = doi.lower()
            break
    if DOI_RE.match(lowered):
        return lowered
    return None


def parse_external_id(text: str) -> ExternalId:
    """Classify free text as the highest-priority identifier kind.

    Priority: DOI > arXiv-ID > ACL-ID > URL > prefixed backend handle.
    Old-style arXiv ids (e.g. ``cs/0112017``) are not supported.
    """
    stripped = text.strip()
    if not stripped:
        raise UnrecognizedIdentifier("empty input")
    doi = normalize_doi(stripped)
    if doi is not None:
        return ExternalId(kind=IdKind.DOI, value=doi)
    m = ARXIV_RE.match(stripped)
    if m:
        return ExternalId(kind=IdKind.ARXIV, value=m.group(1))
    if ACL_RE.match(stripped):
        return ExternalId(kind=IdKind.ACL, value=stripped)
    if URL_RE.match(stripped):
        return ExternalId(kind=IdKind.URL, value=stripped)
    m = HANDLE_RE.match(stripped)
    if m:
        prefix, value = m.groups()
        return ExternalId(kind=IdKind.HANDLE, value=value,
                          platform=PREFIX_PLATFORMS[prefix])
    raise UnrecognizedIdentifier(f"no identifier pattern matches {stripped!r}")


_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


def normalize_title(title: str) -> str:
    """Lowercase, Unicode-NFKC, strip punctuation, collapse whitespace."""
    text = unicodedata.normalize("NFKC", title).lower()
    return " ".join(_WORD_RE.findall(text))


class PublicationRecord(BaseModel):
    """Source-tagged bibliographic metadata, the unit flowing through the system."""

    model_config = ConfigDict(frozen=True)

    title: str
    authors: List[str] = []
    year: Optional[int] = None
    venue: Optional[str] = None
    doi: Optional[str] = None
    external_ids: List[ExternalId] = []
    abstract: Optional[str] = None
    tldr: Optional[str] = None
    citation_count: Optional[int] = None
    url: Optional[str] = None
    bibtex: Optional[str] = None
    source: SourcePlatform

    @field_validator("title")
    @classmethod
    def _title_nonempty(cls, v: str) -> str:
        v = " ".join(v.split())
        if not v:
            raise ValueError("title must be non-empty")
        return v

    @field_validator("citation_count")
    @classmethod
    def _nonnegative(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 0:
            raise ValueError("citation_count must be >= 0")
        return v

    @field_validator("doi")
    @classmethod
    def _valid_doi(cls, v: Optional[str]) -> Optional[str]:
        if v is None:
            return None
        doi = normalize_doi(v)
        if doi is None:
            raise ValueError(f"not a valid DOI: {v!r}")
        return doi

    @field_validator("external_ids")
    @classmethod
    def _no_conflicts(cls, ids: List[ExternalId]) -> List[ExternalId]:
        seen = {}
        for eid in ids:
            key = (eid.kind, eid.platform)
            if key in seen and seen[key] != eid.value:
                raise ValueError(
                    f"conflicting external ids of kind {eid.kind.value}: "
                    f"{seen[key]!r} vs {eid.value!r}")
            seen[key] = eid.value
        return ids

    def handle_for(self, platform: SourcePlatform) -> Optional[ExternalId]:
        for eid in self.external_ids:
            if eid.kind is IdKind.HANDLE and eid.platform is platform:
                return eid
        return None

    def any_handle(self) -> Optional[ExternalId]:
        own = self.handle_for(self.source)
        if own is not None:
            return own
        for eid in self.external_ids:
            if eid.kind is IdKind.HANDLE:
                return eid
        return None


@dataclass(frozen=True, order=True)
class DedupKey:
    """Cross-platform identity key: DOI when present, else (title, year-or-0)."""

    kind: str
    value: str
    year: int = 0

    def canonical(self) -> str:
        return f"{self.kind}:{self.value}:{self.year}"


def dedup_key(record: PublicationRecord) -> DedupKey:
    if record.doi:
        return DedupKey(kind="doi", value=record.doi)
    return DedupKey(kind="title", value=normalize_title(record.title),
                    year=record.year or 0)
