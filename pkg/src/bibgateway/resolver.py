"""Identifier resolution for the details path.

Handles go to their owning backend; DOIs/arXiv-IDs/ACL-IDs go to the
scholarly index; URLs are scraped and then enriched via the scholarly index
when the scraper reports a DOI.
"""

from typing import Dict, Optional
from urllib.parse import unquote

from .errors import ConnectorError, ConnectorErrorKind
from .models import ExternalId, IdKind, PublicationRecord, SourcePlatform
from .query_engine import merge_records


class Resolver:
    def __init__(self, search_connectors: Dict[SourcePlatform, object],
                 scraper=None):
        self._connectors = search_connectors
        self._scraper = scraper

    def _scholar_index(self):
        connector = self._connectors.get(SourcePlatform.SCHOLAR_INDEX)
        if connector is None:
            raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                                 "no scholarly index configured")
        return connector

    def _scrape_and_enrich(self, url: str) -> PublicationRecord:
        if self._scraper is None:
            raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                                 "no scraper configured")
        scraped = self._scraper.scrape(url)
        if scraped.doi:
            # Best-effort enrichment; keep the scraped record if the index
            # does not know the DOI.
            try:
                enriched = self._scholar_index().fetch(
                    ExternalId(kind=IdKind.DOI, value=scraped.doi))
            except ConnectorError:
                return scraped
            return merge_records(enriched, scraped)
        return scraped

    def resolve(self, id: ExternalId) -> PublicationRecord:
        if id.kind is IdKind.HANDLE:
            if id.platform is SourcePlatform.WEB_SCRAPER:
                return self._scrape_and_enrich(unquote(id.value))
            connector = self._connectors.get(id.platform)
            if connector is None:
                raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                                     f"no connector for {id.platform.value}")
            return connector.fetch(id)
        if id.kind in (IdKind.DOI, IdKind.ARXIV, IdKind.ACL):
            return self._scholar_index().fetch(id)
        if id.kind is IdKind.URL:
            return self._scrape_and_enrich(id.value)
        raise ConnectorError(ConnectorErrorKind.NOT_FOUND,
                             f"unresolvable id kind {id.kind.value}")
