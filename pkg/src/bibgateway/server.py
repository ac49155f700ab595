"""HTTP boundary: search/details/library endpoints, interface description,
system-prompt asset, and the error-to-wire mapping.

The server is a stateless mediator: it holds no user database and forwards
the per-request username + API key pair to the bookmark backend. The only
in-memory state is the set of users that fetched their tag profile since
startup, used to pick the right in-response hint.
"""

import logging
import time
from importlib import resources
from typing import List, Optional

import yaml
from fastapi import Depends, FastAPI, File, Header, Query, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel, ValidationError

from .config import ServerConfig
from .connectors import (Credentials, MockBackend, MockFixture, MockLibrary,
                         MockScraper)
from .connectors.bookmark_service import BookmarkServiceClient
from .connectors.scholar_index import ScholarIndexClient
from .connectors.web_scraper import WebScraperClient
from .errors import (AllBackendsFailed, ConnectorError, ConnectorErrorKind,
                     KindChangeRejected, NoBackendSelected, NoMintableId,
                     TooLarge, UnrecognizedIdentifier, ValidationFailed)
from .library import LibraryManager, LibraryPost, PostPatch
from .models import IdKind, SourcePlatform, parse_external_id
from .query_engine import SEARCH_BACKENDS, SearchRequest, execute, plan
from .ranker import rerank
from .resolver import Resolver
from .shaper import Granularity, hint_for, mint_handle, project, shape

log = logging.getLogger("bibgateway.access")

_CONNECTOR_STATUS = {
    ConnectorErrorKind.NOT_FOUND: 404,
    ConnectorErrorKind.UNAUTHORIZED: 401,
    ConnectorErrorKind.UPSTREAM: 502,
    ConnectorErrorKind.TIMEOUT: 504,
    ConnectorErrorKind.DECODE: 502,
}

_NOT_FOUND_HINT = ("Identifier unknown. IDs must match exactly and are "
                   "case-sensitive; re-check the exact id from a previous "
                   "response or the user's input and try again.")


class ApiError(Exception):
    def __init__(self, status: int, message: str, field: Optional[str] = None,
                 hint: Optional[str] = None):
        super().__init__(message)
        self.status = status
        self.message = message
        self.field = field
        self.hint = hint


def _error_body(message: str, field: Optional[str] = None,
                hint: Optional[str] = None) -> dict:
    body = {"error": message}
    if field is not None:
        body["field"] = field
    if hint is not None:
        body["hint"] = hint
    return body


class CreatePostBody(BaseModel):
    id: str
    tags: List[str]
    description: Optional[str] = None
    post_kind: str = "publication"
    confirmed: bool = False


class PatchPostBody(BaseModel):
    add_tags: List[str] = []
    remove_tags: List[str] = []
    tags: Optional[List[str]] = None
    description: Optional[str] = None
    metadata: Optional[dict] = None
    post_kind: Optional[str] = None


def post_wire(post: LibraryPost) -> dict:
    return {
        "handle": f"bib:{post.handle}",
        "title": post.record.title,
        "authors": list(post.record.authors),
        "year": post.record.year,
        "doi": post.record.doi,
        "url": post.record.url,
        "tags": sorted(post.tags),
        "description": post.description,
        "system_tags": list(post.system_tags),
        "post_kind": post.post_kind,
        "attachment": (post.attachment.model_dump() if post.attachment else None),
        "created": post.created.isoformat(),
        "modified": post.modified.isoformat(),
    }


def build_connectors(config: ServerConfig):
    """Mock connectors when a fixture is configured, real clients otherwise."""
    if config.fixture_path:
        fixture = MockFixture.load(config.fixture_path)
        search = {
            SourcePlatform.SCHOLAR_INDEX: MockBackend(
                SourcePlatform.SCHOLAR_INDEX, fixture,
                deadline=config.request_deadline),
            SourcePlatform.BOOKMARK_SERVICE: MockBackend(
                SourcePlatform.BOOKMARK_SERVICE, fixture,
                deadline=config.request_deadline),
        }
        return search, MockScraper(fixture), MockLibrary(fixture)
    backends = config.backends
    scholar = ScholarIndexClient(backends.scholar_index_url,
                                 api_key=backends.scholar_index_api_key,
                                 deadline=config.request_deadline)
    bookmark = BookmarkServiceClient(backends.bookmark_url,
                                     deadline=config.request_deadline)
    search = {SourcePlatform.SCHOLAR_INDEX: scholar,
              SourcePlatform.BOOKMARK_SERVICE: bookmark}
    scraper = WebScraperClient(backends.scraper_url,
                               deadline=config.request_deadline)
    return search, scraper, bookmark


_BACKEND_NAMES = {
    "scholar_index": SourcePlatform.SCHOLAR_INDEX,
    "bookmark_service": SourcePlatform.BOOKMARK_SERVICE,
    "all": None,
}


def create_app(config: Optional[ServerConfig] = None, search_connectors=None,
               scraper=None, library_connector=None) -> FastAPI:
    config = config or ServerConfig()
    if search_connectors is None:
        search_connectors, scraper, library_connector = build_connectors(config)

    resolver = Resolver(search_connectors, scraper=scraper)
    manager = LibraryManager(library_connector, resolver,
                             max_attachment_bytes=config.max_attachment_bytes)

    app = FastAPI(
        title="bibgateway",
        version="0.1.0",
        description=("Federated scholarly retrieval and publication management "
                     "tool server. Search multiple bibliography backends, "
                     "resolve identifiers, and manage a personal library, all "
                     "through simple HTTP endpoints designed for LLM function "
                     "calling."),
    )
    app.state.config = config
    app.state.tags_fetched_users = set()

    def credentials(x_username: Optional[str] = Header(default=None),
                    x_api_key: Optional[str] = Header(default=None)) -> Credentials:
        if not x_username or not x_api_key:
            raise ApiError(401, "library operations require the X-Username "
                                "and X-Api-Key headers")
        return Credentials(username=x_username, api_key=x_api_key)

    # -- error mapping ----------------------------------------------------

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content=_error_body(exc.message, exc.field, exc.hint))

    @app.exception_handler(ConnectorError)
    async def _connector_error(request: Request, exc: ConnectorError):
        status = _CONNECTOR_STATUS[exc.kind]
        hint = _NOT_FOUND_HINT if status == 404 else None
        return JSONResponse(status_code=status,
                            content=_error_body(exc.message, hint=hint))

    _SIMPLE_STATUS = [
        (UnrecognizedIdentifier, 400), (NoBackendSelected, 400),
        (ValidationFailed, 400), (KindChangeRejected, 409),
        (TooLarge, 413), (AllBackendsFailed, 502), (NoMintableId, 502),
    ]
    for exc_type, status in _SIMPLE_STATUS:
        def _make(status_code):
            async def handler(request: Request, exc: Exception):
                return JSONResponse(status_code=status_code,
                                    content=_error_body(str(exc)))
            return handler
        app.add_exception_handler(exc_type, _make(status))

    @app.middleware("http")
    async def _access_log(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        log.info("route=%s status=%d duration=%.3fs",
                 request.url.path, response.status_code,
                 time.monotonic() - started)
        return response

    # -- search -----------------------------------------------------------

    @app.get("/search", summary="Federated publication search",
             description=(
                 "Search the configured bibliography backends with a free-form "
                 "query (q) or structured fields (title, authors, keywords). "
                 "Supplementary queries closely related to the main query can "
                 "be supplied to broaden the search; their hits are weighted "
                 "lower than primary hits. Results are merged across backends, "
                 "re-ranked by BM25, and returned with short handles for "
                 "follow-up calls. Set library_only=true (with credentials) to "
                 "search the user's own library, optionally filtered by tags."))
    def search_endpoint(request: Request,
                        q: Optional[str] = None,
                        title: Optional[str] = None,
                        authors: Optional[str] = None,
                        keywords: Optional[str] = None,
                        supplementary: List[str] = Query(default=()),
                        backends: Optional[str] = None,
                        count: Optional[int] = None,
                        granularity: Optional[str] = None,
                        library_only: bool = False,
                        tags: List[str] = Query(default=()),
                        x_username: Optional[str] = Header(default=None),
                        x_api_key: Optional[str] = Header(default=None)):
        backend_list = None
        if backends and backends != "all":
            backend_list = []
            for name in backends.split(","):
                platform = _BACKEND_NAMES.get(name.strip())
                if platform is None:
                    raise ApiError(400, f"unknown backend {name.strip()!r}; "
                                        "expected scholar_index, "
                                        "bookmark_service, or all",
                                   field="backends")
                backend_list.append(platform)
        try:
            search_request = SearchRequest(
                q=q, title=title, authors=authors, keywords=keywords,
                supplementary=list(supplementary), backends=backend_list,
                count=count, granularity=granularity,
                library_only=library_only, tags=list(tags))
        except ValidationError as exc:
            first = exc.errors()[0]
            raise ApiError(400, first.get("msg", "invalid request"),
                           field=".".join(str(p) for p in first.get("loc", ())))

        if search_request.library_only:
            if not x_username or not x_api_key:
                raise ApiError(401, "library search requires credentials")
            creds = Credentials(username=x_username, api_key=x_api_key)
            posts = manager.search_library(
                creds, keywords=search_request.primary_expression() or None,
                tag_filter=search_request.tags or None)
            limit = search_request.count or config.shaper.default_count
            results = [post_wire(p) for p in posts[:limit]]
            return JSONResponse(content={
                "results": results,
                "degradation_notes": [],
                "system_hint": hint_for("search",
                                        {"has_results": bool(results)}),
                "estimated_tokens": 0,
            })

        planned = plan(search_request, per_query_fetch=config.per_query_fetch)
        pool = execute(planned, search_connectors, search_request,
                       max_in_flight=config.max_in_flight)
        ranked = rerank(pool, config.ranking)
        gran = Granularity(search_request.granularity or "basic")
        response = shape(
            ranked,
            count=search_request.count or config.shaper.default_count,
            granularity=gran,
            budget=config.shaper.token_budget,
            abstract_truncate_chars=config.shaper.abstract_truncate_chars,
            notes=pool.degradation_notes)
        response.system_hint = hint_for(
            "search", {"has_results": bool(response.results)})
        log.info("search results=%d backend_latencies=%s",
                 len(response.results), pool.backend_latencies)
        return JSONResponse(content=response.to_wire())

    # -- details ----------------------------------------------------------

    @app.get("/details/{id:path}", summary="Resolve one identifier",
             description=(
                 "Resolve a handle from a previous search result, or a DOI, "
                 "arXiv-ID, ACL-ID, or URL, to the full (verbose) metadata of "
                 "one publication, including abstract, TLDR, and BibTeX when "
                 "available. Handles must be passed exactly as returned; they "
                 "are case-sensitive."))
    def details_endpoint(id: str):
        external_id = parse_external_id(id)
        record = resolver.resolve(external_id)
        entry = project(record, Granularity.VERBOSE)
        return JSONResponse(content={
            "result": entry,
            "system_hint": hint_for("details"),
        })

    # -- library ----------------------------------------------------------

    @app.get("/posts", summary="List or filter the user's library",
             description=("List the user's library posts, newest first, "
                          "optionally filtered by keywords (q) or tags (all "
                          "given tags must be present)."))
    def list_posts_endpoint(q: Optional[str] = None, tags: List[str] = Query(default=()),
                            creds: Credentials = Depends(credentials)):
        posts = manager.search_library(creds, keywords=q,
                                       tag_filter=list(tags) or None)
        return JSONResponse(content={
            "results": [post_wire(p) for p in posts],
            "system_hint": None,
        })

    @app.get("/user/tags", summary="The user's tag vocabulary",
             description=("Tags the user has assigned before, with usage "
                          "counts. Fetch this before creating the first post "
                          "so new tags stay consistent with the user's "
                          "existing system. Server-assigned provenance tags "
                          "are listed separately."))
    def user_tags_endpoint(creds: Credentials = Depends(credentials)):
        profile = manager.fetch_tag_profile(creds)
        app.state.tags_fetched_users.add(creds.username)
        return JSONResponse(content={
            "tags": dict(sorted(profile.counts.items())),
            "system_tags": profile.system_tags,
            "system_hint": hint_for("user_tags"),
        })

    @app.post("/posts", status_code=201, summary="Create a library post",
              description=(
                  "Create a post from a resolvable identifier (handle, DOI, "
                  "arXiv-ID, ACL-ID, or URL). Metadata is filled in "
                  "automatically from the resolved record. Requires at least "
                  "one tag, and confirmed=true signalling the user's explicit "
                  "permission. The post kind (publication vs bookmark) cannot "
                  "be changed later."))
    def create_post_endpoint(body: CreatePostBody,
                             creds: Credentials = Depends(credentials)):
        if not body.confirmed:
            raise ApiError(400, "creating a post changes the user's library "
                                "and requires confirmed=true (the user's "
                                "explicit permission)", field="confirmed")
        external_id = parse_external_id(body.id)
        post = manager.create_post(creds, external_id, tags=body.tags,
                                   description=body.description,
                                   post_kind=body.post_kind)
        hint = hint_for("create_post", {
            "tags_fetched": creds.username in app.state.tags_fetched_users})
        return JSONResponse(status_code=201, content={
            "result": post_wire(post), "system_hint": hint})

    @app.patch("/posts/{handle}", summary="Edit a library post",
               description=("Apply a field-wise patch: add/remove/replace "
                            "tags, change the description, or update "
                            "bibliography metadata. The post kind is "
                            "immutable."))
    def update_post_endpoint(handle: str, body: PatchPostBody,
                             creds: Credentials = Depends(credentials)):
        patch = PostPatch(**body.model_dump())
        post = manager.update_post(creds, _native_post_handle(handle), patch)
        return JSONResponse(content={"result": post_wire(post),
                                     "system_hint": None})

    @app.post("/posts/{handle}/document", summary="Attach a document",
              description=("Upload a document (e.g. the PDF) for an existing "
                           "post, as a multipart form file."))
    def attach_document_endpoint(handle: str, file: UploadFile = File(...),
                                 creds: Credentials = Depends(credentials)):
        data = file.file.read()
        post = manager.attach_document(creds, _native_post_handle(handle),
                                       data, file.filename or "document")
        return JSONResponse(content={"result": post_wire(post),
                                     "system_hint": None})

    def _native_post_handle(handle: str) -> str:
        """Accept both the wire form (bib:<intrahash>) and the bare intrahash."""
        try:
            parsed = parse_external_id(handle)
        except UnrecognizedIdentifier:
            return handle
        if parsed.kind is not IdKind.HANDLE:
            return handle
        if parsed.platform not in (SourcePlatform.BOOKMARK_SERVICE,
                                   SourcePlatform.MOCK):
            raise ApiError(400, f"{handle!r} is not a library post handle",
                           field="handle")
        return parsed.value

    # -- interface description and prompt asset ---------------------------

    @app.get("/.well-known/interface", include_in_schema=True,
             summary="Machine-readable interface description",
             description=("The full OpenAPI description of this server as "
                          "YAML, generated from the live routes."))
    def interface_endpoint():
        doc = app.openapi()
        return Response(content=yaml.safe_dump(doc, sort_keys=False),
                        media_type="application/yaml")

    @app.get("/system-prompt", summary="System prompt asset",
             description=("The versioned system prompt that introduces the "
                          "model to this service's intended mode of "
                          "operation."))
    def system_prompt_endpoint():
        text = resources.files("bibgateway.assets").joinpath(
            "system_prompt.txt").read_text()
        return PlainTextResponse(content=text)

    return app


def endpoint_specs(app: FastAPI) -> List[dict]:
    """One entry per served route: path, method, parameter schema, description.

    Derived from the same source as the emitted interface description, so the
    two cannot drift apart.
    """
    doc = app.openapi()
    specs = []
    for path, operations in doc.get("paths", {}).items():
        for method, operation in operations.items():
            specs.append({
                "path": path,
                "method": method.upper(),
                "parameters": operation.get("parameters", []),
                "description": operation.get("description")
                or operation.get("summary", ""),
            })
    return specs


def validate_interface_description(doc: dict) -> None:
    """Validate an emitted interface description against the vendored
    structural schema for its declared OpenAPI version (raises on failure)."""
    import json

    import jsonschema

    schema = json.loads(resources.files("bibgateway.assets").joinpath(
        "openapi_document.schema.json").read_text())
    jsonschema.validate(instance=doc, schema=schema)
