from .base import Credentials, LibraryConnector, NativeQuery, ScrapeConnector, SearchConnector
from .bookmark_service import BookmarkServiceClient
from .mock import MockBackend, MockFixture, MockLibrary, MockScraper
from .scholar_index import ScholarIndexClient
from .web_scraper import WebScraperClient

__all__ = [
    "Credentials", "LibraryConnector", "NativeQuery", "ScrapeConnector",
    "SearchConnector", "BookmarkServiceClient", "MockBackend", "MockFixture",
    "MockLibrary", "MockScraper", "ScholarIndexClient", "WebScraperClient",
]
