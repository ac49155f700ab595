"""Deterministic in-memory connectors backed by a JSON fixture.

The mock implements every connector capability so the whole server can run
and be tested offline. Given the same fixture and query it returns
bit-identical results on every call.
"""

import json
import time
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from ..errors import ConnectorError, ConnectorErrorKind
from ..library import LibraryPost
from ..models import ExternalId, IdKind, PublicationRecord, SourcePlatform
from .base import Credentials, LibraryConnector, NativeQuery, ScrapeConnector, SearchConnector


class MockFixture(BaseModel):
    """Offline corpus: records, library posts, users, and artificial latency."""

    records: List[PublicationRecord] = []
    library: List[LibraryPost] = []
    users: Dict[str, str] = Field(default_factory=lambda: {"demo": "demo-key"})
    latency: float = 0.0

    @model_validator(mode="after")
    def _unique_handles(self) -> "MockFixture":
        seen = set()
        for record in self.records:
            for eid in record.external_ids:
                if eid.kind is IdKind.HANDLE:
                    key = (eid.platform, eid.value)
                    if key in seen:
                        raise ValueError(f"duplicate handle in fixture: {key}")
                    seen.add(key)
        return self

    @classmethod
    def load(cls, path) -> "MockFixture":
        return cls.model_validate(json.loads(Path(path).read_text()))


def _record_tokens(record: PublicationRecord) -> set:
    text = " ".join(filter(None, [
        record.title, record.abstract, record.venue, record.tldr,
        " ".join(record.authors),
    ]))
    return set(text.lower().replace(":", " ").replace(",", " ").split())


class MockBackend(SearchConnector):
    """Serves the fixture records whose source matches its platform."""

    def __init__(self, platform: SourcePlatform, fixture: MockFixture,
                 deadline: Optional[float] = None,
                 latency: Optional[float] = None):
        self.platform = platform
        self._fixture = fixture
        self._deadline = deadline
        self._latency = fixture.latency if latency is None else latency
        self.fail_with: Optional[ConnectorError] = None

    def _records(self) -> List[PublicationRecord]:
        return [r for r in self._fixture.records if r.source is self.platform]

    def _simulate_transport(self) -> None:
        if self.fail_with is not None:
            raise self.fail_with
        if self._deadline is not None and self._latency > self._deadline:
            raise ConnectorError(ConnectorErrorKind.TIMEOUT,
                                 f"mock latency {self._latency}s exceeded deadline")
        if self._latency:
            time.sleep(self._latency)

    def search(self, query: NativeQuery) -> List[PublicationRecord]:
        self._simulate_transport()
        terms = set(query.expression.lower().split())
        hits = [r for r in self._records() if terms & _record_tokens(r)]
        return hits[:query.limit]

    def fetch(self, id: ExternalId) -> PublicationRecord:
        self._simulate_transport()
        for record in self._records():
            if id.kind is IdKind.HANDLE:
                handle = record.handle_for(self.platform)
                if handle is not None and handle.value == id.value:
                    return record
            elif id.kind is IdKind.DOI:
                if record.doi == id.value:
                    return record
            elif id.kind in (IdKind.ARXIV, IdKind.ACL):
                for eid in record.external_ids:
                    if eid.kind is id.kind and eid.value == id.value:
                        return record
        raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                             f"no record for {id.kind.value} {id.value!r}")


class MockScraper(ScrapeConnector):
    """Maps fixture URLs to best-effort records, like a translation server."""

    def __init__(self, fixture: MockFixture):
        self._fixture = fixture

    def scrape(self, url: str) -> PublicationRecord:
        for record in self._fixture.records:
            if record.source is SourcePlatform.WEB_SCRAPER and record.url == url:
                return record
        raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                             f"scraper has no item for {url!r}")


class MockLibrary(LibraryConnector):
    """In-memory post store with fixture-seeded users and posts."""

    def __init__(self, fixture: MockFixture):
        self._users = dict(fixture.users)
        self._posts: Dict[str, LibraryPost] = {
            post.handle: post for post in fixture.library}
        self._counter = len(self._posts)

    def _authorize(self, credentials: Credentials) -> None:
        expected = self._users.get(credentials.username)
        if expected is None or expected != credentials.api_key:
            raise ConnectorError(ConnectorErrorKind.UNAUTHORIZED,
                                 f"bad credentials for {credentials.username!r}")

    def list_posts(self, credentials: Credentials) -> List[LibraryPost]:
        self._authorize(credentials)
        return [p for p in self._posts.values() if p.owner == credentials.username]

    def get_post(self, credentials: Credentials, handle: str) -> LibraryPost:
        self._authorize(credentials)
        post = self._posts.get(handle)
        if post is None or post.owner != credentials.username:
            raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                                 f"no post {handle!r}")
        return post

    def create_post(self, credentials: Credentials, post: LibraryPost) -> LibraryPost:
        self._authorize(credentials)
        self._counter += 1
        intrahash = f"ih{self._counter:04d}aB"
        stored = post.model_copy(update={"handle": intrahash})
        self._posts[intrahash] = stored
        return stored

    def update_post(self, credentials: Credentials, handle: str,
                    post: LibraryPost, document: Optional[bytes] = None) -> LibraryPost:
        self.get_post(credentials, handle)  # existence + ownership
        self._posts[handle] = post
        return post
