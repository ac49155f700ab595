"""HTTP client for the scholarly index backend (Semantic-Scholar-style graph API)."""

from typing import List, Optional

import httpx
from pydantic import ValidationError

from ..errors import ConnectorError, ConnectorErrorKind
from ..models import ExternalId, IdKind, PublicationRecord, SourcePlatform
from .base import NativeQuery, SearchConnector

# One call covers verbose granularity; no N+1 detail fetches during search.
_FIELDS = ("title,authors,year,venue,externalIds,abstract,tldr,"
           "citationCount,url,citationStyles")


def _request(client: httpx.Client, method: str, url: str, **kwargs) -> httpx.Response:
    """Issue a request with a single retry on timeout."""
    for attempt in (0, 1):
        try:
            response = client.request(method, url, **kwargs)
            break
        except httpx.TimeoutException as exc:
            if attempt == 1:
                raise ConnectorError(ConnectorErrorKind.TIMEOUT, str(exc)) from exc
        except httpx.HTTPError as exc:
            raise ConnectorError(ConnectorErrorKind.UPSTREAM, str(exc)) from exc
    if response.status_code == 404:
        raise ConnectorError(ConnectorErrorKind.NOT_FOUND, url, status=404)
    if response.status_code in (401, 403):
        raise ConnectorError(ConnectorErrorKind.UNAUTHORIZED, url,
                             status=response.status_code)
    if response.status_code >= 400:
        raise ConnectorError(ConnectorErrorKind.UPSTREAM,
                             f"{url} -> {response.status_code}",
                             status=response.status_code)
    return response


def _decode_json(response: httpx.Response) -> dict:
    try:
        return response.json()
    except ValueError as exc:
        raise ConnectorError(ConnectorErrorKind.DECODE, str(exc)) from exc


class ScholarIndexClient(SearchConnector):
    platform = SourcePlatform.SCHOLAR_INDEX

    def __init__(self, base_url: str, api_key: Optional[str] = None,
                 deadline: float = 10.0, transport: Optional[httpx.BaseTransport] = None):
        headers = {"x-api-key": api_key} if api_key else {}
        self._client = httpx.Client(base_url=base_url, headers=headers,
                                    timeout=deadline, transport=transport)

    def _to_record(self, item: dict) -> PublicationRecord:
        external_ids = []
        paper_id = item.get("paperId")
        if paper_id:
            external_ids.append(ExternalId(kind=IdKind.HANDLE, value=paper_id,
                                           platform=self.platform))
        raw_ids = item.get("externalIds") or {}
        doi = raw_ids.get("DOI")
        if raw_ids.get("ArXiv"):
            external_ids.append(ExternalId(kind=IdKind.ARXIV, value=raw_ids["ArXiv"]))
        if raw_ids.get("ACL"):
            external_ids.append(ExternalId(kind=IdKind.ACL, value=raw_ids["ACL"]))
        tldr = item.get("tldr") or {}
        styles = item.get("citationStyles") or {}
        try:
            return PublicationRecord(
                title=item.get("title") or "",
                authors=[a.get("name", "") for a in item.get("authors") or []],
                year=item.get("year"),
                venue=item.get("venue") or None,
                doi=doi,
                external_ids=external_ids,
                abstract=item.get("abstract"),
                tldr=tldr.get("text") if isinstance(tldr, dict) else None,
                citation_count=item.get("citationCount"),
                url=item.get("url"),
                bibtex=styles.get("bibtex"),
                source=self.platform,
            )
        except ValidationError as exc:
            raise ConnectorError(ConnectorErrorKind.DECODE, str(exc)) from exc

    def search(self, query: NativeQuery) -> List[PublicationRecord]:
        response = _request(self._client, "GET", "/paper/search", params={
            "query": query.expression, "limit": query.limit, "fields": _FIELDS})
        data = _decode_json(response)
        return [self._to_record(item) for item in data.get("data") or []]

    def fetch(self, id: ExternalId) -> PublicationRecord:
        if id.kind is IdKind.HANDLE:
            path_id = id.value
        elif id.kind is IdKind.DOI:
            path_id = f"DOI:{id.value}"
        elif id.kind is IdKind.ARXIV:
            path_id = f"ARXIV:{id.value}"
        elif id.kind is IdKind.ACL:
            path_id = f"ACL:{id.value}"
        else:
            raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                                 f"cannot resolve {id.kind.value} ids")
        response = _request(self._client, "GET", f"/paper/{path_id}",
                            params={"fields": _FIELDS})
        return self._to_record(_decode_json(response))
