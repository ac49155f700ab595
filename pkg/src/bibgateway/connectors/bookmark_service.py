"""HTTP client for the social-bookmark backend (BibSonomy-style REST API).

Search is anonymous-read where the service allows it; all library writes
require the per-request username + API key pair.
"""

from datetime import datetime, timezone
from typing import List, Optional

import httpx
from pydantic import ValidationError

from ..errors import ConnectorError, ConnectorErrorKind
from ..library import AttachmentRef, LibraryPost
from ..models import ExternalId, IdKind, PublicationRecord, SourcePlatform
from .base import Credentials, LibraryConnector, NativeQuery, SearchConnector
from .scholar_index import _decode_json, _request


def _parse_timestamp(value: Optional[str]) -> datetime:
    if not value:
        return datetime.fromtimestamp(0, tz=timezone.utc)
    try:
        return datetime.fromisoformat(value)
    except ValueError:
        return datetime.fromtimestamp(0, tz=timezone.utc)


class BookmarkServiceClient(SearchConnector, LibraryConnector):
    platform = SourcePlatform.BOOKMARK_SERVICE

    def __init__(self, base_url: str, deadline: float = 10.0,
                 transport: Optional[httpx.BaseTransport] = None):
        self._client = httpx.Client(base_url=base_url, timeout=deadline,
                                    transport=transport)

    def _auth(self, credentials: Credentials):
        return (credentials.username, credentials.api_key)

    def _to_record(self, item: dict) -> PublicationRecord:
        external_ids = []
        intrahash = item.get("intrahash")
        if intrahash:
            external_ids.append(ExternalId(kind=IdKind.HANDLE, value=intrahash,
                                           platform=self.platform))
        try:
            return PublicationRecord(
                title=item.get("title") or "",
                authors=item.get("authors") or [],
                year=item.get("year"),
                venue=item.get("venue") or None,
                doi=item.get("doi") or None,
                external_ids=external_ids,
                abstract=item.get("abstract"),
                citation_count=item.get("citation_count"),
                url=item.get("url"),
                bibtex=item.get("bibtex"),
                source=self.platform,
            )
        except ValidationError as exc:
            raise ConnectorError(ConnectorErrorKind.DECODE, str(exc)) from exc

    def _to_post(self, item: dict) -> LibraryPost:
        attachment = None
        if item.get("attachment"):
            attachment = AttachmentRef(**item["attachment"])
        try:
            return LibraryPost(
                handle=item.get("intrahash") or "",
                record=self._to_record(item.get("publication") or {}),
                tags=item.get("tags") or [],
                description=item.get("description"),
                system_tags=item.get("system_tags") or [],
                attachment=attachment,
                owner=item.get("user") or "",
                post_kind=item.get("post_kind") or "publication",
                created=_parse_timestamp(item.get("created")),
                modified=_parse_timestamp(item.get("modified")),
            )
        except ValidationError as exc:
            raise ConnectorError(ConnectorErrorKind.DECODE, str(exc)) from exc

    def _post_payload(self, post: LibraryPost) -> dict:
        return {
            "publication": {
                "title": post.record.title,
                "authors": post.record.authors,
                "year": post.record.year,
                "venue": post.record.venue,
                "doi": post.record.doi,
                "abstract": post.record.abstract,
                "url": post.record.url,
                "bibtex": post.record.bibtex,
            },
            "tags": sorted(set(post.tags) | set(post.system_tags)),
            "system_tags": post.system_tags,
            "description": post.description,
            "post_kind": post.post_kind,
        }

    # -- search/fetch ----------------------------------------------------

    def search(self, query: NativeQuery) -> List[PublicationRecord]:
        response = _request(self._client, "GET", "/posts", params={
            "search": query.expression, "resourcetype": "bibtex",
            "end": query.limit})
        data = _decode_json(response)
        items = (data.get("posts") or {}).get("post") or []
        return [self._to_record(i.get("publication") or i) for i in items[:query.limit]]

    def fetch(self, id: ExternalId) -> PublicationRecord:
        if id.kind is not IdKind.HANDLE:
            raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                                 f"bookmark service resolves only handles")
        response = _request(self._client, "GET", f"/posts/{id.value}")
        return self._to_record(_decode_json(response))

    # -- library transport -----------------------------------------------

    def list_posts(self, credentials: Credentials) -> List[LibraryPost]:
        response = _request(self._client, "GET",
                            f"/users/{credentials.username}/posts",
                            auth=self._auth(credentials))
        data = _decode_json(response)
        items = (data.get("posts") or {}).get("post") or []
        return [self._to_post(i) for i in items]

    def get_post(self, credentials: Credentials, handle: str) -> LibraryPost:
        response = _request(self._client, "GET",
                            f"/users/{credentials.username}/posts/{handle}",
                            auth=self._auth(credentials))
        return self._to_post(_decode_json(response))

    def create_post(self, credentials: Credentials, post: LibraryPost) -> LibraryPost:
        response = _request(self._client, "POST",
                            f"/users/{credentials.username}/posts",
                            json=self._post_payload(post),
                            auth=self._auth(credentials))
        data = _decode_json(response)
        return post.model_copy(update={"handle": data.get("intrahash", "")})

    def update_post(self, credentials: Credentials, handle: str,
                    post: LibraryPost, document: Optional[bytes] = None) -> LibraryPost:
        _request(self._client, "PUT",
                 f"/users/{credentials.username}/posts/{handle}",
                 json=self._post_payload(post), auth=self._auth(credentials))
        if document is not None and post.attachment is not None:
            _request(self._client, "POST",
                     f"/users/{credentials.username}/posts/{handle}/documents",
                     files={"file": (post.attachment.filename, document)},
                     auth=self._auth(credentials))
        return post
