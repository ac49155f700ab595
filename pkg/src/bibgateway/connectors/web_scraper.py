"""HTTP client for the web-scraping translation server (Zotero-style).

The server accepts a bare URL and returns structured item metadata; we keep
the title mandatory and treat everything else as best-effort.
"""

from typing import Optional

import httpx
from pydantic import ValidationError

from ..errors import ConnectorError, ConnectorErrorKind
from ..models import ExternalId, IdKind, PublicationRecord, SourcePlatform, normalize_doi
from .base import ScrapeConnector
from .scholar_index import _decode_json, _request


class WebScraperClient(ScrapeConnector):
    platform = SourcePlatform.WEB_SCRAPER

    def __init__(self, base_url: str, deadline: float = 10.0,
                 transport: Optional[httpx.BaseTransport] = None):
        self._client = httpx.Client(base_url=base_url, timeout=deadline,
                                    transport=transport)

    def scrape(self, url: str) -> PublicationRecord:
        response = _request(self._client, "POST", "/web", content=url,
                            headers={"Content-Type": "text/plain"})
        items = _decode_json(response)
        if not isinstance(items, list) or not items:
            raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                                 f"scraper yielded no item for {url!r}")
        item = items[0]
        doi = normalize_doi(item.get("DOI") or "") if item.get("DOI") else None
        authors = []
        for creator in item.get("creators") or []:
            name = " ".join(filter(None, [creator.get("firstName"),
                                          creator.get("lastName")]))
            if name:
                authors.append(name)
        year = None
        date = item.get("date") or ""
        if date[:4].isdigit():
            year = int(date[:4])
        try:
            return PublicationRecord(
                title=item.get("title") or "",
                authors=authors,
                year=year,
                venue=item.get("publicationTitle") or None,
                doi=doi,
                external_ids=[ExternalId(kind=IdKind.URL, value=url)],
                abstract=item.get("abstractNote"),
                url=url,
                source=self.platform,
            )
        except ValidationError as exc:
            raise ConnectorError(ConnectorErrorKind.DECODE, str(exc)) from exc
