"""Publication-management write path: library search, posts, tags, attachments.

The manager owns the semantics (validation, provenance tags, patch rules);
connectors supply only transport. Every write that goes through this module
carries its mandated system tag.
"""

from datetime import datetime, timezone
from typing import Dict, List, Optional, Set

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import TooLarge, ValidationFailed
from .models import ExternalId, PublicationRecord

POSTED_TAG = "posted_with_chatgpt"
EDITED_TAG = "edited_with_chatgpt"
SYSTEM_TAGS = {POSTED_TAG, EDITED_TAG}


class AttachmentRef(BaseModel):
    model_config = ConfigDict(frozen=True)
    filename: str
    size: int


class LibraryPost(BaseModel):
    """A user-owned record with tags, description, and provenance markers."""

    handle: str
    record: PublicationRecord
    tags: List[str]
    description: Optional[str] = None
    system_tags: List[str] = []
    attachment: Optional[AttachmentRef] = None
    owner: str
    post_kind: str = "publication"  # "publication" | "bookmark"
    created: datetime
    modified: datetime

    @field_validator("tags")
    @classmethod
    def _tags_nonempty(cls, v: List[str]) -> List[str]:
        if any(not t.strip() for t in v):
            raise ValueError("tags must be non-empty strings")
        return v

    def all_tags(self) -> Set[str]:
        return set(self.tags) | set(self.system_tags)


class TagProfile(BaseModel):
    """One user's historical tag vocabulary with usage counts."""

    counts: Dict[str, int] = {}
    system_tags: List[str] = []


class PostPatch(BaseModel):
    """Field-wise patch for update_post; unset fields are left untouched."""

    add_tags: List[str] = Field(default_factory=list)
    remove_tags: List[str] = Field(default_factory=list)
    tags: Optional[List[str]] = None
    description: Optional[str] = None
    metadata: Optional[dict] = None
    post_kind: Optional[str] = None  # any attempt to set this is rejected


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class LibraryManager:
    """Semantics layer over a library-capable connector and the details resolver."""

    def __init__(self, connector, resolver, max_attachment_bytes: int = 50 * 1024 * 1024):
        self._connector = connector
        self._resolver = resolver
        self._max_attachment = max_attachment_bytes

    def search_library(self, credentials, keywords: Optional[str] = None,
                       tag_filter: Optional[List[str]] = None) -> List[LibraryPost]:
        """Posts matching all given tags (AND) or keywords, newest-modified first."""
        posts = self._connector.list_posts(credentials)
        if tag_filter:
            wanted = set(tag_filter)
            posts = [p for p in posts if wanted <= p.all_tags()]
        if keywords:
            terms = keywords.lower().split()
            def matches(post: LibraryPost) -> bool:
                haystack = (post.record.title + " " + (post.description or "")).lower()
                return all(t in haystack for t in terms)
            posts = [p for p in posts if matches(p)]
        return sorted(posts, key=lambda p: p.modified, reverse=True)

    def fetch_tag_profile(self, credentials) -> TagProfile:
        posts = self._connector.list_posts(credentials)
        counts: Dict[str, int] = {}
        for post in posts:
            for tag in post.all_tags():
                counts[tag] = counts.get(tag, 0) + 1
        system = sorted(t for t in counts if t in SYSTEM_TAGS)
        return TagProfile(counts=counts, system_tags=system)

    def create_post(self, credentials, source_id: ExternalId, tags: List[str],
                    description: Optional[str] = None,
                    post_kind: str = "publication") -> LibraryPost:
        """Resolve the source id to full metadata and store a tagged post."""
        if not tags or any(not t.strip() for t in tags):
            raise ValidationFailed("at least one non-empty tag is required")
        if post_kind not in ("publication", "bookmark"):
            raise ValidationFailed(f"unknown post kind {post_kind!r}")
        record = self._resolver.resolve(source_id)
        if description is not None:
            description = description.strip()
            if not description:
                raise ValidationFailed("description, when given, must be non-empty")
            if description == record.title:
                raise ValidationFailed("description must not repeat the title")
        now = _utcnow()
        post = LibraryPost(
            handle="",  # assigned by the connector
            record=record,
            tags=sorted(set(tags)),
            description=description,
            system_tags=[POSTED_TAG],
            owner=credentials.username,
            post_kind=post_kind,
            created=now,
            modified=now,
        )
        return self._connector.create_post(credentials, post)

    def update_post(self, credentials, post_handle: str, patch: PostPatch) -> LibraryPost:
        """Apply a field-wise patch; the post kind is immutable."""
        from .errors import KindChangeRejected

        existing = self._connector.get_post(credentials, post_handle)
        if patch.post_kind is not None and patch.post_kind != existing.post_kind:
            raise KindChangeRejected(
                f"post kind is fixed at creation ({existing.post_kind})")
        tags = list(patch.tags) if patch.tags is not None else list(existing.tags)
        tags = [t for t in tags if t not in set(patch.remove_tags)]
        tags.extend(t for t in patch.add_tags if t not in tags)
        if not tags:
            raise ValidationFailed("a post must keep at least one user tag")
        description = existing.description
        if patch.description is not None:
            description = patch.description.strip() or None
            if description == existing.record.title:
                raise ValidationFailed("description must not repeat the title")
        record = existing.record
        if patch.metadata:
            record = record.model_copy(update=patch.metadata)
        system_tags = list(existing.system_tags)
        if EDITED_TAG not in system_tags:
            system_tags.append(EDITED_TAG)
        updated = existing.model_copy(update={
            "tags": sorted(set(tags)),
            "description": description,
            "record": record,
            "system_tags": system_tags,
            "modified": _utcnow(),
        })
        return self._connector.update_post(credentials, post_handle, updated)

    def attach_document(self, credentials, post_handle: str, data: bytes,
                        filename: str) -> LibraryPost:
        if not data:
            raise ValidationFailed("document must be non-empty")
        if len(data) > self._max_attachment:
            raise TooLarge(
                f"document of {len(data)} bytes exceeds the "
                f"{self._max_attachment}-byte limit")
        existing = self._connector.get_post(credentials, post_handle)
        system_tags = list(existing.system_tags)
        if EDITED_TAG not in system_tags:
            system_tags.append(EDITED_TAG)
        updated = existing.model_copy(update={
            "attachment": AttachmentRef(filename=filename, size=len(data)),
            "system_tags": system_tags,
            "modified": _utcnow(),
        })
        return self._connector.update_post(credentials, post_handle, updated,
                                           document=data)
