import random

import pytest

from bibgateway.connectors import MockBackend
from bibgateway.errors import (AllBackendsFailed, ConnectorError,
                               ConnectorErrorKind, NoBackendSelected)
from bibgateway.models import (ExternalId, IdKind, PublicationRecord,
                               SourcePlatform, dedup_key)
from bibgateway.query_engine import (PRIMARY, SEARCH_BACKENDS, QueryOrigin,
                                     SearchRequest, execute, merge_records,
                                     plan)


def connectors(fixture, **overrides):
    built = {b: MockBackend(b, fixture) for b in SEARCH_BACKENDS}
    built.update(overrides)
    return built


class TestSearchRequest:
    def test_requires_primary_query(self):
        with pytest.raises(ValueError, match="primary query"):
            SearchRequest()

    def test_structured_fields_count_as_primary(self):
        request = SearchRequest(title="deep learning", authors="Hinton")
        assert request.primary_expression() == "deep learning Hinton"

    def test_free_text_wins_over_structured(self):
        request = SearchRequest(q="bert", title="ignored")
        assert request.primary_expression() == "bert"

    def test_library_only_tag_browse_needs_no_query(self):
        request = SearchRequest(library_only=True, tags=["nlp"])
        assert request.primary_expression() == ""

    def test_duplicate_supplementary_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            SearchRequest(q="x", supplementary=["a", "a"])

    def test_blank_supplementary_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            SearchRequest(q="x", supplementary=["  "])

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            SearchRequest(q="x", count=0)


class TestPlan:
    def test_primary_only_two_backends(self):
        planned = plan(SearchRequest(q="bert"))
        assert len(planned) == 2
        assert {p.native.backend for p in planned} == set(SEARCH_BACKENDS)
        assert all(p.origin == PRIMARY for p in planned)

    def test_two_supplementary_gives_six_queries(self):
        planned = plan(SearchRequest(q="bert", supplementary=["elmo", "gpt"]))
        assert len(planned) == 6
        origins = {p.origin for p in planned}
        assert origins == {PRIMARY, QueryOrigin("supplementary", 0),
                           QueryOrigin("supplementary", 1)}

    def test_backend_filter(self):
        request = SearchRequest(q="bert",
                                backends=[SourcePlatform.SCHOLAR_INDEX])
        planned = plan(request)
        assert {p.native.backend for p in planned} == \
            {SourcePlatform.SCHOLAR_INDEX}

    def test_non_search_backend_alone_raises(self):
        request = SearchRequest(q="bert",
                                backends=[SourcePlatform.WEB_SCRAPER])
        with pytest.raises(NoBackendSelected):
            plan(request)

    def test_per_query_fetch_sets_limits(self):
        planned = plan(SearchRequest(q="bert"), per_query_fetch=3)
        assert all(p.native.limit == 3 for p in planned)


def record(source, title="Same Paper", **kwargs):
    return PublicationRecord(title=title, source=source, **kwargs)


class TestMergeRecords:
    def test_richer_platform_wins_base_position(self):
        bookmark = record(SourcePlatform.BOOKMARK_SERVICE, year=2019)
        scholar = record(SourcePlatform.SCHOLAR_INDEX, citation_count=10)
        merged = merge_records(bookmark, scholar)
        assert merged.source is SourcePlatform.SCHOLAR_INDEX
        assert merged.citation_count == 10
        assert merged.year == 2019  # filled from the other side

    def test_existing_fields_not_overwritten(self):
        scholar = record(SourcePlatform.SCHOLAR_INDEX, year=2020)
        bookmark = record(SourcePlatform.BOOKMARK_SERVICE, year=1999)
        assert merge_records(scholar, bookmark).year == 2020

    def test_external_ids_unioned(self):
        a = record(SourcePlatform.SCHOLAR_INDEX, external_ids=[
            ExternalId(kind=IdKind.HANDLE, value="h1",
                       platform=SourcePlatform.SCHOLAR_INDEX)])
        b = record(SourcePlatform.BOOKMARK_SERVICE, external_ids=[
            ExternalId(kind=IdKind.HANDLE, value="h2",
                       platform=SourcePlatform.BOOKMARK_SERVICE),
            ExternalId(kind=IdKind.ARXIV, value="1111.2222")])
        merged = merge_records(a, b)
        kinds = {(e.kind, e.platform) for e in merged.external_ids}
        assert len(merged.external_ids) == 3
        assert (IdKind.ARXIV, None) in kinds


class TestExecute:
    def test_cross_platform_dedup_fold(self, fixture):
        request = SearchRequest(q="xlnet")
        pool = execute(plan(request), connectors(fixture), request)
        xlnet = [c for c in pool.candidates if "XLNet" in c.record.title]
        assert len(xlnet) == 1
        assert xlnet[0].platforms == {SourcePlatform.SCHOLAR_INDEX,
                                      SourcePlatform.BOOKMARK_SERVICE}

    def test_matched_queries_provenance(self, fixture):
        request = SearchRequest(q="xlnet", supplementary=["autoregressive"])
        pool = execute(plan(request), connectors(fixture), request)
        xlnet = next(c for c in pool.candidates if "XLNet" in c.record.title)
        assert PRIMARY in xlnet.matched_queries
        assert QueryOrigin("supplementary", 0) in xlnet.matched_queries

    def test_partial_failure_degrades_not_aborts(self, fixture):
        request = SearchRequest(q="xlnet")
        broken = MockBackend(SourcePlatform.BOOKMARK_SERVICE, fixture)
        broken.fail_with = ConnectorError(ConnectorErrorKind.UPSTREAM, "down")
        pool = execute(plan(request),
                       connectors(fixture,
                                  **{SourcePlatform.BOOKMARK_SERVICE: broken}),
                       request)
        assert any("XLNet" in c.record.title for c in pool.candidates)
        assert len(pool.degradation_notes) == 1
        assert "bookmark_service" in pool.degradation_notes[0]
        assert all(c.platforms == {SourcePlatform.SCHOLAR_INDEX}
                   for c in pool.candidates)

    def test_all_backends_failed(self, fixture):
        request = SearchRequest(q="xlnet")
        built = {}
        for backend in SEARCH_BACKENDS:
            mock = MockBackend(backend, fixture)
            mock.fail_with = ConnectorError(ConnectorErrorKind.TIMEOUT, "slow")
            built[backend] = mock
        with pytest.raises(AllBackendsFailed):
            execute(plan(request), built, request)

    def test_timeout_via_latency_deadline(self, fixture):
        request = SearchRequest(q="xlnet")
        slow = MockBackend(SourcePlatform.BOOKMARK_SERVICE, fixture,
                           deadline=0.01, latency=1.0)
        pool = execute(plan(request),
                       connectors(fixture,
                                  **{SourcePlatform.BOOKMARK_SERVICE: slow}),
                       request)
        assert pool.candidates
        assert "deadline" in pool.degradation_notes[0]

    def test_fold_is_order_independent(self, fixture):
        request = SearchRequest(q="xlnet", supplementary=["bert", "palm"])
        planned = plan(request)
        baseline = execute(planned, connectors(fixture), request)
        rng = random.Random(13)
        for _ in range(5):
            shuffled = list(planned)
            rng.shuffle(shuffled)
            pool = execute(shuffled, connectors(fixture), request)
            assert [c.record for c in pool.candidates] == \
                [c.record for c in baseline.candidates]
            assert [c.platforms for c in pool.candidates] == \
                [c.platforms for c in baseline.candidates]

    def test_candidates_sorted_by_dedup_key(self, fixture):
        request = SearchRequest(q="language model pretraining")
        pool = execute(plan(request), connectors(fixture), request)
        keys = [dedup_key(c.record).canonical() for c in pool.candidates]
        assert keys == sorted(keys)
        assert len(keys) == len(set(keys))

    def test_latencies_recorded_per_planned_query(self, fixture):
        request = SearchRequest(q="xlnet", supplementary=["bert"])
        pool = execute(plan(request), connectors(fixture), request)
        assert len(pool.backend_latencies) == 4
        assert all(v >= 0 for v in pool.backend_latencies.values())
