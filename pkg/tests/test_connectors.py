import json

import httpx
import pytest

from bibgateway.connectors import (BookmarkServiceClient, MockBackend,
                                   MockFixture, MockLibrary, MockScraper,
                                   ScholarIndexClient, WebScraperClient)
from bibgateway.connectors.base import Credentials, NativeQuery
from bibgateway.errors import ConnectorError, ConnectorErrorKind
from bibgateway.models import (ExternalId, IdKind, PublicationRecord,
                               SourcePlatform, parse_external_id)

from conftest import FIXTURE_PATH

DEMO = Credentials(username="demo", api_key="demo-key")


def query(text, backend=SourcePlatform.SCHOLAR_INDEX, limit=10):
    return NativeQuery(backend=backend, expression=text, limit=limit)


class TestMockFixture:
    def test_load_bundled_corpus(self, fixture):
        assert fixture.records
        assert fixture.library
        assert fixture.users == {"demo": "demo-key"}

    def test_duplicate_handles_rejected(self):
        eid = {"kind": "handle", "value": "dup1", "platform": "scholar_index"}
        record = {"title": "t", "source": "scholar_index",
                  "external_ids": [eid]}
        with pytest.raises(ValueError, match="duplicate handle"):
            MockFixture.model_validate({"records": [record, dict(record)]})


class TestMockBackend:
    def test_search_matches_any_token(self, fixture):
        backend = MockBackend(SourcePlatform.SCHOLAR_INDEX, fixture)
        hits = backend.search(query("xlnet"))
        assert any("XLNet" in r.title for r in hits)
        assert all(r.source is SourcePlatform.SCHOLAR_INDEX for r in hits)

    def test_search_respects_limit_and_order(self, fixture):
        backend = MockBackend(SourcePlatform.SCHOLAR_INDEX, fixture)
        full = backend.search(query("language model transformer retrieval"))
        capped = backend.search(
            query("language model transformer retrieval", limit=2))
        assert len(capped) == 2
        assert capped == full[:2]

    def test_search_is_deterministic(self, fixture):
        backend = MockBackend(SourcePlatform.SCHOLAR_INDEX, fixture)
        a = backend.search(query("neural language model"))
        b = backend.search(query("neural language model"))
        assert a == b

    def test_fetch_by_handle_exact(self, fixture):
        backend = MockBackend(SourcePlatform.SCHOLAR_INDEX, fixture)
        record = backend.fetch(parse_external_id("s2:S2xlnet2019Ab"))
        assert "XLNet" in record.title

    def test_fetch_handle_is_case_sensitive(self, fixture):
        backend = MockBackend(SourcePlatform.SCHOLAR_INDEX, fixture)
        with pytest.raises(ConnectorError) as err:
            backend.fetch(parse_external_id("s2:s2XLNET2019ab"))
        assert err.value.kind is ConnectorErrorKind.NOT_FOUND

    def test_fetch_by_doi_alias(self, fixture):
        backend = MockBackend(SourcePlatform.SCHOLAR_INDEX, fixture)
        record = backend.fetch(parse_external_id("10.48550/arxiv.1906.08237"))
        assert "XLNet" in record.title

    def test_fetch_by_arxiv_alias(self, fixture):
        backend = MockBackend(SourcePlatform.SCHOLAR_INDEX, fixture)
        record = backend.fetch(parse_external_id("arXiv:1906.08237"))
        assert "XLNet" in record.title

    def test_latency_over_deadline_times_out(self, fixture):
        backend = MockBackend(SourcePlatform.SCHOLAR_INDEX, fixture,
                              deadline=0.01, latency=0.5)
        with pytest.raises(ConnectorError) as err:
            backend.search(query("xlnet"))
        assert err.value.kind is ConnectorErrorKind.TIMEOUT

    def test_fail_with_injection(self, fixture):
        backend = MockBackend(SourcePlatform.SCHOLAR_INDEX, fixture)
        backend.fail_with = ConnectorError(ConnectorErrorKind.UPSTREAM, "boom")
        with pytest.raises(ConnectorError) as err:
            backend.search(query("xlnet"))
        assert err.value.kind is ConnectorErrorKind.UPSTREAM


class TestMockScraper:
    def test_scrape_known_url(self, fixture):
        scraper = MockScraper(fixture)
        record = scraper.scrape("https://arxiv.org/abs/1706.03762")
        assert record.title == "Attention Is All You Need"
        assert record.source is SourcePlatform.WEB_SCRAPER

    def test_scrape_unknown_url_not_found(self, fixture):
        scraper = MockScraper(fixture)
        with pytest.raises(ConnectorError) as err:
            scraper.scrape("https://example.org/nowhere")
        assert err.value.kind is ConnectorErrorKind.NOT_FOUND


class TestMockLibrary:
    def test_bad_credentials_unauthorized(self, fixture):
        library = MockLibrary(fixture)
        with pytest.raises(ConnectorError) as err:
            library.list_posts(Credentials(username="demo", api_key="wrong"))
        assert err.value.kind is ConnectorErrorKind.UNAUTHORIZED

    def test_list_and_get_roundtrip(self, fixture):
        library = MockLibrary(fixture)
        posts = library.list_posts(DEMO)
        assert posts
        first = posts[0]
        assert library.get_post(DEMO, first.handle) == first

    def test_get_unknown_post_not_found(self, fixture):
        library = MockLibrary(fixture)
        with pytest.raises(ConnectorError) as err:
            library.get_post(DEMO, "ihMissing99")
        assert err.value.kind is ConnectorErrorKind.NOT_FOUND

    def test_create_assigns_fresh_handle(self, fixture):
        library = MockLibrary(fixture)
        template = library.list_posts(DEMO)[0]
        created = library.create_post(DEMO, template)
        assert created.handle != template.handle
        assert library.get_post(DEMO, created.handle) == created

    def test_update_replaces_stored_post(self, fixture):
        library = MockLibrary(fixture)
        post = library.list_posts(DEMO)[0]
        updated = post.model_copy(update={"description": "rewritten"})
        library.update_post(DEMO, post.handle, updated)
        assert library.get_post(DEMO, post.handle).description == "rewritten"


# -- real HTTP clients over httpx.MockTransport --------------------------

S2_ITEM = {
    "paperId": "649def34f8be52c8b66281af98ae884c09aef38b",
    "title": "Attention Is All You Need",
    "authors": [{"name": "Ashish Vaswani"}],
    "year": 2017,
    "venue": "NeurIPS",
    "externalIds": {"DOI": "10.48550/ARXIV.1706.03762",
                    "ArXiv": "1706.03762"},
    "abstract": "The dominant sequence transduction models...",
    "tldr": {"text": "Introduces the Transformer."},
    "citationCount": 100000,
    "url": "https://www.semanticscholar.org/paper/649def34",
    "citationStyles": {"bibtex": "@article{vaswani2017attention}"},
}


def scholar_client(handler):
    return ScholarIndexClient(base_url="https://index.test",
                              transport=httpx.MockTransport(handler))


class TestScholarIndexClient:
    def test_search_decodes_records(self):
        seen = {}

        def handler(request):
            seen["params"] = dict(request.url.params)
            seen["path"] = request.url.path
            return httpx.Response(200, json={"data": [S2_ITEM]})

        records = scholar_client(handler).search(query("attention"))
        assert seen["path"] == "/paper/search"
        assert seen["params"]["query"] == "attention"
        record = records[0]
        assert record.title == "Attention Is All You Need"
        assert record.doi == "10.48550/arxiv.1706.03762"
        assert record.tldr == "Introduces the Transformer."
        assert record.bibtex == "@article{vaswani2017attention}"
        handle = record.handle_for(SourcePlatform.SCHOLAR_INDEX)
        assert handle.value == S2_ITEM["paperId"]
        arxiv = [e for e in record.external_ids if e.kind is IdKind.ARXIV]
        assert arxiv[0].value == "1706.03762"

    def test_fetch_doi_uses_prefixed_path(self):
        seen = {}

        def handler(request):
            seen["path"] = request.url.path
            return httpx.Response(200, json=S2_ITEM)

        eid = parse_external_id("10.48550/arxiv.1706.03762")
        scholar_client(handler).fetch(eid)
        assert seen["path"] == "/paper/DOI:10.48550/arxiv.1706.03762"

    @pytest.mark.parametrize("status,kind", [
        (404, ConnectorErrorKind.NOT_FOUND),
        (401, ConnectorErrorKind.UNAUTHORIZED),
        (403, ConnectorErrorKind.UNAUTHORIZED),
        (500, ConnectorErrorKind.UPSTREAM),
        (429, ConnectorErrorKind.UPSTREAM),
    ])
    def test_status_mapping(self, status, kind):
        client = scholar_client(lambda request: httpx.Response(status))
        with pytest.raises(ConnectorError) as err:
            client.search(query("x"))
        assert err.value.kind is kind

    def test_undecodable_body_is_decode_error(self):
        client = scholar_client(
            lambda request: httpx.Response(200, content=b"<html>not json"))
        with pytest.raises(ConnectorError) as err:
            client.search(query("x"))
        assert err.value.kind is ConnectorErrorKind.DECODE

    def test_single_retry_then_success(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            if len(attempts) == 1:
                raise httpx.ReadTimeout("slow")
            return httpx.Response(200, json={"data": []})

        assert scholar_client(handler).search(query("x")) == []
        assert len(attempts) == 2

    def test_two_timeouts_surface_as_timeout(self):
        def handler(request):
            raise httpx.ReadTimeout("slow")

        with pytest.raises(ConnectorError) as err:
            scholar_client(handler).search(query("x"))
        assert err.value.kind is ConnectorErrorKind.TIMEOUT

    def test_connection_error_is_upstream(self):
        def handler(request):
            raise httpx.ConnectError("refused")

        with pytest.raises(ConnectorError) as err:
            scholar_client(handler).search(query("x"))
        assert err.value.kind is ConnectorErrorKind.UPSTREAM


BOOKMARK_POST = {
    "intrahash": "ihRemote0001",
    "user": "demo",
    "tags": ["nlp"],
    "system_tags": [],
    "description": "a post",
    "post_kind": "publication",
    "created": "2023-01-01T00:00:00+00:00",
    "modified": "2023-01-02T00:00:00+00:00",
    "publication": {"title": "Remote Paper", "authors": ["A. Author"],
                    "year": 2021, "intrahash": "ihRemote0001"},
}


def bookmark_client(handler):
    return BookmarkServiceClient(base_url="https://bookmarks.test",
                                 transport=httpx.MockTransport(handler))


class TestBookmarkServiceClient:
    def test_search_decodes_posts(self):
        def handler(request):
            assert request.url.path == "/posts"
            return httpx.Response(200, json={
                "posts": {"post": [BOOKMARK_POST]}})

        records = bookmark_client(handler).search(
            query("remote", backend=SourcePlatform.BOOKMARK_SERVICE))
        assert records[0].title == "Remote Paper"
        handle = records[0].handle_for(SourcePlatform.BOOKMARK_SERVICE)
        assert handle.value == "ihRemote0001"

    def test_fetch_rejects_non_handles(self):
        client = bookmark_client(lambda request: httpx.Response(200, json={}))
        with pytest.raises(ConnectorError) as err:
            client.fetch(parse_external_id("10.1000/x"))
        assert err.value.kind is ConnectorErrorKind.NOT_FOUND

    def test_list_posts_uses_basic_auth(self):
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("Authorization", "")
            seen["path"] = request.url.path
            return httpx.Response(200, json={
                "posts": {"post": [BOOKMARK_POST]}})

        posts = bookmark_client(handler).list_posts(DEMO)
        assert seen["path"] == "/users/demo/posts"
        assert seen["auth"].startswith("Basic ")
        assert posts[0].handle == "ihRemote0001"
        assert posts[0].owner == "demo"

    def test_create_post_adopts_remote_intrahash(self, fixture):
        def handler(request):
            assert request.method == "POST"
            body = json.loads(request.content)
            # system tags ride along inside the plain tag list upstream
            assert set(body["system_tags"]) <= set(body["tags"])
            return httpx.Response(201, json={"intrahash": "ihAssigned001"})

        template = fixture.library[0]
        created = bookmark_client(handler).create_post(DEMO, template)
        assert created.handle == "ihAssigned001"

    def test_update_with_document_uploads_multipart(self, fixture):
        calls = []

        def handler(request):
            calls.append((request.method, request.url.path))
            return httpx.Response(200, json={})

        from bibgateway.library import AttachmentRef
        post = fixture.library[0].model_copy(update={
            "attachment": AttachmentRef(filename="paper.pdf", size=3)})
        bookmark_client(handler).update_post(DEMO, post.handle, post,
                                             document=b"pdf")
        assert calls[0] == ("PUT", f"/users/demo/posts/{post.handle}")
        assert calls[1] == ("POST",
                            f"/users/demo/posts/{post.handle}/documents")


ZOTERO_ITEM = {
    "title": "Understanding Attention",
    "creators": [{"firstName": "Jay", "lastName": "Author"},
                 {"lastName": "Mononym"}],
    "date": "2021-06-01",
    "publicationTitle": "A Blog",
    "DOI": "https://doi.org/10.1000/XYZ",
    "abstractNote": "An explainer.",
}


def scraper_client(handler):
    return WebScraperClient(base_url="https://scraper.test",
                            transport=httpx.MockTransport(handler))


class TestWebScraperClient:
    def test_scrape_decodes_item(self):
        seen = {}

        def handler(request):
            seen["body"] = request.content.decode()
            return httpx.Response(200, json=[ZOTERO_ITEM])

        record = scraper_client(handler).scrape("https://a.test/post")
        assert seen["body"] == "https://a.test/post"
        assert record.title == "Understanding Attention"
        assert record.authors == ["Jay Author", "Mononym"]
        assert record.year == 2021
        assert record.doi == "10.1000/xyz"
        assert record.url == "https://a.test/post"
        url_ids = [e for e in record.external_ids if e.kind is IdKind.URL]
        assert url_ids[0].value == "https://a.test/post"

    def test_empty_item_list_not_found(self):
        client = scraper_client(lambda request: httpx.Response(200, json=[]))
        with pytest.raises(ConnectorError) as err:
            client.scrape("https://a.test/none")
        assert err.value.kind is ConnectorErrorKind.NOT_FOUND

    def test_missing_title_is_decode_error(self):
        client = scraper_client(
            lambda request: httpx.Response(200, json=[{"date": "2020"}]))
        with pytest.raises(ConnectorError) as err:
            client.scrape("https://a.test/untitled")
        assert err.value.kind is ConnectorErrorKind.DECODE
