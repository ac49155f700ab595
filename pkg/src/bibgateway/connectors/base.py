"""Uniform connector interfaces: search, fetch-by-id, scrape, library transport."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

from ..models import ExternalId, PublicationRecord, SourcePlatform


@dataclass(frozen=True)
class NativeQuery:
    """A query already rendered for one backend."""

    backend: SourcePlatform
    expression: str
    limit: int

    def __post_init__(self):
        if self.limit < 1:
            raise ValueError("limit must be >= 1")
        if not self.expression.strip():
            raise ValueError("expression must be non-empty")


class Credentials(NamedTuple):
    username: str
    api_key: str


class SearchConnector(ABC):
    """A backend that answers free-text searches and id lookups."""

    platform: SourcePlatform

    @abstractmethod
    def search(self, query: NativeQuery) -> List[PublicationRecord]:
        """At most ``query.limit`` records, each carrying a backend handle."""

    @abstractmethod
    def fetch(self, id: ExternalId) -> PublicationRecord:
        """Full-granularity record for a handle (exact, case-sensitive) or alias."""


class ScrapeConnector(ABC):
    """Resolves arbitrary publication URLs into best-effort records."""

    platform = SourcePlatform.WEB_SCRAPER

    @abstractmethod
    def scrape(self, url: str) -> PublicationRecord:
        ...


class LibraryConnector(ABC):
    """Transport for the user-library read/write suite; semantics live in
    :mod:`bibgateway.library`."""

    @abstractmethod
    def list_posts(self, credentials: Credentials) -> list:
        ...

    @abstractmethod
    def get_post(self, credentials: Credentials, handle: str):
        ...

    @abstractmethod
    def create_post(self, credentials: Credentials, post):
        ...

    @abstractmethod
    def update_post(self, credentials: Credentials, handle: str, post,
                    document: Optional[bytes] = None):
        ...
