"""Domain types: metadata, files, record versions, communities, users.

The types are plain dataclasses; all invariant checking happens in
:func:`validate_metadata` (returns a report, never raises) and the
filename guard :func:`check_filename`. Lifecycle rules live in the
records service.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date

from . import identifiers

DRAFT = "draft"
SHARED = "shared"

TIER_NONE = "none"
TIER_COMMUNITY = "community"
TIER_CONSORTIUM = "consortium"

KIND_PROJECT = "project"
KIND_UMBRELLA = "umbrella"

RESOURCE_TYPES = ("dataset", "software", "publication", "other")

JSON_LD_MEDIA_TYPE = "application/ld+json"


@dataclass
class Affiliation:
    name: str
    ror: str | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "ror": self.ror}

    @classmethod
    def from_dict(cls, data: dict) -> "Affiliation":
        return cls(name=str(data.get("name", "")), ror=data.get("ror") or None)


@dataclass
class Author:
    name: str
    orcid: str | None = None
    affiliations: list[Affiliation] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "affiliations": [a.to_dict() for a in self.affiliations],
            "name": self.name,
            "orcid": self.orcid,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Author":
        return cls(
            name=str(data.get("name", "")),
            orcid=data.get("orcid") or None,
            affiliations=[Affiliation.from_dict(a) for a in data.get("affiliations", [])],
        )


@dataclass
class AnnotationAttachment:
    """A JSON-LD side document, stored verbatim as uploaded text."""

    label: str
    document: str
    media_type: str = JSON_LD_MEDIA_TYPE

    def to_dict(self) -> dict:
        return {
            "document": self.document,
            "label": self.label,
            "media_type": self.media_type,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnnotationAttachment":
        return cls(
            label=str(data.get("label", "")),
            document=str(data.get("document", "")),
            media_type=str(data.get("media_type", JSON_LD_MEDIA_TYPE)),
        )


@dataclass
class MetadataDocument:
    title: str
    license: str
    description: str = ""
    keywords: list[str] = field(default_factory=list)
    authors: list[Author] = field(default_factory=list)
    resource_type: str = "dataset"
    publication_date: str = ""  # ISO calendar date, filled at draft creation if empty
    annotations: list[AnnotationAttachment] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "annotations": [a.to_dict() for a in self.annotations],
            "authors": [a.to_dict() for a in self.authors],
            "description": self.description,
            "keywords": list(self.keywords),
            "license": self.license,
            "publication_date": self.publication_date,
            "resource_type": self.resource_type,
            "title": self.title,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetadataDocument":
        return cls(
            title=str(data.get("title", "")),
            license=str(data.get("license", "")),
            description=str(data.get("description", "")),
            keywords=[str(k) for k in data.get("keywords", [])],
            authors=[Author.from_dict(a) for a in data.get("authors", [])],
            resource_type=str(data.get("resource_type", "dataset")),
            publication_date=str(data.get("publication_date", "")),
            annotations=[
                AnnotationAttachment.from_dict(a) for a in data.get("annotations", [])
            ],
        )


@dataclass
class FileEntry:
    name: str
    size: int
    checksum: str  # "sha-256:<lowercase hex>"
    content_ref: str

    def to_dict(self) -> dict:
        return {"checksum": self.checksum, "name": self.name, "size": self.size}


@dataclass
class RecordVersion:
    version_id: str
    record_id: str
    version_index: int
    state: str  # draft | shared
    tier: str  # none | community | consortium
    shared_with: str | None
    owner: str
    metadata: MetadataDocument
    files: list[FileEntry]
    created_at: str
    shared_at: str | None

    @property
    def is_draft(self) -> bool:
        return self.state == DRAFT

    def manifest_total(self) -> int:
        return sum(f.size for f in self.files)


@dataclass
class Record:
    record_id: str
    owner: str
    versions: list[RecordVersion]

    @property
    def latest(self) -> RecordVersion:
        return self.versions[-1]


@dataclass
class Community:
    slug: str
    display_name: str
    kind: str  # project | umbrella


@dataclass
class UserAccount:
    user_id: str
    email: str
    email_confirmed: bool
    memberships: set[str] = field(default_factory=set)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_metadata(
    metadata: MetadataDocument, known_licenses: set[str]
) -> list[tuple[str, str]]:
    """Validate a metadata document against all type invariants.

    Returns a list of (field, reason) pairs; empty iff the document is
    valid. Never raises.
    """
    issues: list[tuple[str, str]] = []

    if not metadata.title.strip():
        issues.append(("title", "must not be empty"))

    if not metadata.license:
        issues.append(("license", "missing"))
    elif metadata.license not in known_licenses:
        issues.append(("license", "unknown identifier"))

    if metadata.resource_type not in RESOURCE_TYPES:
        issues.append(
            ("resource_type", f"must be one of {', '.join(RESOURCE_TYPES)}")
        )

    seen_keywords: set[str] = set()
    for i, keyword in enumerate(metadata.keywords):
        folded = keyword.strip().lower()
        if folded in seen_keywords:
            issues.append((f"keywords[{i}]", f"duplicate keyword: {keyword}"))
        seen_keywords.add(folded)

    for i, author in enumerate(metadata.authors):
        if not author.name.strip():
            issues.append((f"authors[{i}].name", "must not be empty"))
        if author.orcid is not None:
            if not identifiers.orcid_format_ok(author.orcid):
                issues.append((f"authors[{i}].orcid", "malformed identifier"))
            elif not identifiers.orcid_checksum_ok(author.orcid):
                issues.append((f"authors[{i}].orcid", "checksum mismatch"))
        for j, affiliation in enumerate(author.affiliations):
            if not affiliation.name.strip():
                issues.append((f"authors[{i}].affiliations[{j}].name", "must not be empty"))
            if affiliation.ror is not None and not identifiers.ror_format_ok(affiliation.ror):
                issues.append(
                    (f"authors[{i}].affiliations[{j}].ror", "malformed identifier")
                )

    if metadata.publication_date:
        try:
            date.fromisoformat(metadata.publication_date)
        except ValueError:
            issues.append(("publication_date", "not an ISO calendar date"))

    for i, annotation in enumerate(metadata.annotations):
        try:
            json.loads(annotation.document)
        except (json.JSONDecodeError, TypeError):
            issues.append((f"annotations[{i}].document", "not well-formed JSON"))
        if annotation.media_type != JSON_LD_MEDIA_TYPE:
            issues.append(
                (f"annotations[{i}].media_type", f"must be {JSON_LD_MEDIA_TYPE}")
            )

    return issues


def check_filename(name: str) -> str | None:
    """Reject path separators and parent references; preserve case.

    Returns a reason string when the name is unacceptable, else None.
    """
    if not name or name in (".", ".."):
        return "empty or reserved name"
    if "/" in name or "\\" in name:
        return "path separators not allowed"
    if name.startswith(".."):
        return "parent references not allowed"
    if "\x00" in name:
        return "NUL not allowed"
    return None
