"""Record lifecycle: drafts, file manifests, sharing, version chains.

All transitions are check-and-set against the primary store, so
concurrent conflicting calls resolve to exactly one winner. Shared
versions keep their file manifest frozen forever; metadata stays
editable in place.
"""

from __future__ import annotations

import sqlite3
from datetime import datetime, timezone
from typing import BinaryIO, Callable

from . import access as ac
from .access import AccessService, Actor
from .errors import (
    Conflict,
    NotFound,
    PermissionDenied,
    QuotaExceeded,
    ValidationFailed,
)
from .filestore import FileStore, tagged_checksum
from .identifiers import new_record_id, version_id_for
from .licenses import LicenseRegistry
from .model import (
    DRAFT,
    KIND_UMBRELLA,
    SHARED,
    TIER_COMMUNITY,
    TIER_CONSORTIUM,
    TIER_NONE,
    FileEntry,
    MetadataDocument,
    Record,
    RecordVersion,
    check_filename,
    validate_metadata,
)
from .store import PrimaryStore, metadata_to_json

DEFAULT_QUOTA_BYTES = 100 * 1024**3  # 100 GB per record


def quota_allows(current_total: int, incoming_size: int, limit: int) -> bool:
    """Inclusive boundary: a version may sit exactly at its limit."""
    return current_total + incoming_size <= limit


class RecordsService:
    def __init__(
        self,
        store: PrimaryStore,
        files: FileStore,
        access: AccessService,
        licenses: LicenseRegistry,
        quota_default: int = DEFAULT_QUOTA_BYTES,
        clock: Callable[[], datetime] | None = None,
    ):
        self.store = store
        self.files = files
        self.access = access
        self.licenses = licenses
        self.quota_default = quota_default
        self.clock = clock or (lambda: datetime.now(timezone.utc))

    def _now(self) -> str:
        return self.clock().isoformat()

    def validate(self, metadata: MetadataDocument) -> list[tuple[str, str]]:
        return validate_metadata(metadata, self.licenses.ids())

    def _validate_or_raise(self, metadata: MetadataDocument) -> None:
        issues = self.validate(metadata)
        if issues:
            raise ValidationFailed(issues)

    # -- lifecycle -------------------------------------------------------------

    def create_draft(self, owner: str, metadata: MetadataDocument) -> RecordVersion:
        user = self.store.get_user(owner)
        if user is None:
            raise NotFound("user")
        if not user.email_confirmed:
            raise PermissionDenied("unconfirmed-email")
        if not metadata.publication_date:
            metadata.publication_date = self.clock().date().isoformat()
        self._validate_or_raise(metadata)

        now = self._now()
        with self.store.transaction() as conn:
            while True:
                record_id = new_record_id()
                exists = conn.execute(
                    "SELECT 1 FROM records WHERE record_id = ?", (record_id,)
                ).fetchone()
                if exists is None:
                    break
            conn.execute(
                "INSERT INTO records (record_id, owner) VALUES (?, ?)",
                (record_id, owner),
            )
            conn.execute(
                "INSERT INTO versions (version_id, record_id, version_index, state,"
                " tier, shared_with, owner, metadata_json, created_at, shared_at)"
                " VALUES (?, ?, 1, ?, ?, NULL, ?, ?, ?, NULL)",
                (
                    version_id_for(record_id, 1),
                    record_id,
                    DRAFT,
                    TIER_NONE,
                    owner,
                    metadata_to_json(metadata),
                    now,
                ),
            )
        return self.store.get_version(version_id_for(record_id, 1))

    def _require_version(self, version_id: str) -> RecordVersion:
        version = self.store.get_version(version_id)
        if version is None:
            raise NotFound("version")
        return version

    def _require_permission(self, actor: Actor, action: str, version: RecordVersion) -> None:
        decision = self.access.evaluate(actor, action, version)
        if not decision.allowed:
            raise PermissionDenied(decision.reason)

    def effective_quota(self, record_id: str) -> int:
        override = self.store.record_quota_override(record_id)
        return override if override is not None else self.quota_default

    def enforce_quota(self, version: RecordVersion, incoming_size: int) -> bool:
        """Decision, not an error: may this draft take incoming_size more bytes?"""
        limit = self.effective_quota(version.record_id)
        return quota_allows(version.manifest_total(), incoming_size, limit)

    def attach_file(
        self,
        actor: Actor,
        version_id: str,
        name: str,
        content: BinaryIO,
        declared_size: int | None = None,
    ) -> FileEntry:
        version = self._require_version(version_id)
        self._require_permission(actor, ac.MODIFY_DRAFT_FILES, version)

        reason = check_filename(name)
        if reason is not None:
            raise ValidationFailed([("name", reason)])
        if any(f.name == name for f in version.files):
            raise Conflict(f"file {name!r} already in manifest")
        limit = self.effective_quota(version.record_id)
        if declared_size is not None and not quota_allows(
            version.manifest_total(), declared_size, limit
        ):
            raise QuotaExceeded(limit, version.manifest_total() + declared_size)

        digest, size = self.files.put(content)

        with self.store.transaction() as conn:
            row = conn.execute(
                "SELECT state FROM versions WHERE version_id = ?", (version_id,)
            ).fetchone()
            if row is None or row["state"] != DRAFT:
                raise Conflict("version is no longer a draft")
            total = conn.execute(
                "SELECT COALESCE(SUM(size), 0) AS total FROM files WHERE version_id = ?",
                (version_id,),
            ).fetchone()["total"]
            if not quota_allows(total, size, limit):
                raise QuotaExceeded(limit, total + size)
            try:
                conn.execute(
                    "INSERT INTO files (version_id, name, size, checksum, content_ref)"
                    " VALUES (?, ?, ?, ?, ?)",
                    (version_id, name, size, tagged_checksum(digest), digest),
                )
            except sqlite3.IntegrityError as exc:
                raise Conflict(f"file {name!r} already in manifest") from exc
        return FileEntry(name=name, size=size, checksum=tagged_checksum(digest), content_ref=digest)

    def remove_file(self, actor: Actor, version_id: str, name: str) -> None:
        version = self._require_version(version_id)
        self._require_permission(actor, ac.MODIFY_DRAFT_FILES, version)
        with self.store.transaction() as conn:
            cur = conn.execute(
                "DELETE FROM files WHERE version_id = ? AND name = ?",
                (version_id, name),
            )
            if cur.rowcount == 0:
                raise NotFound("file")

    def update_metadata(
        self, actor: Actor, version_id: str, metadata: MetadataDocument
    ) -> RecordVersion:
        version = self._require_version(version_id)
        self._require_permission(actor, ac.EDIT_METADATA, version)
        if not metadata.publication_date:
            metadata.publication_date = version.metadata.publication_date
        self._validate_or_raise(metadata)
        with self.store.transaction() as conn:
            conn.execute(
                "UPDATE versions SET metadata_json = ? WHERE version_id = ?",
                (metadata_to_json(metadata), version_id),
            )
            if version.state == SHARED:
                self.store.enqueue_index_task(conn, version_id, self._now())
        return self.store.get_version(version_id)

    def share(
        self,
        actor: Actor,
        version_id: str,
        tier: str,
        community: str | None = None,
    ) -> RecordVersion:
        version = self._require_version(version_id)
        decision = self.access.evaluate(actor, ac.SHARE, version)
        if not decision.allowed:
            if decision.reason == "already-shared":
                raise Conflict("version already shared at consortium scope")
            raise PermissionDenied(decision.reason)

        if tier not in (TIER_COMMUNITY, TIER_CONSORTIUM):
            raise ValidationFailed([("tier", "must be 'community' or 'consortium'")])

        umbrella = self.store.umbrella_slug()
        owner = self.store.get_user(version.owner)
        if tier == TIER_COMMUNITY:
            if not community:
                raise ValidationFailed([("community", "required for community tier")])
            target = self.store.get_community(community)
            if target is None:
                raise ValidationFailed([("community", "unknown community")])
            if target.kind == KIND_UMBRELLA:
                raise ValidationFailed(
                    [("community", "use the consortium tier for the umbrella community")]
                )
            if owner is None or community not in owner.memberships:
                raise PermissionDenied("not-member")
            shared_with = community
        else:
            shared_with = None
            community = umbrella

        now = self._now()
        with self.store.transaction() as conn:
            if version.state == DRAFT:
                cur = conn.execute(
                    "UPDATE versions SET state = ?, tier = ?, shared_with = ?, shared_at = ?"
                    " WHERE version_id = ? AND state = ?",
                    (SHARED, tier, shared_with, now, version_id, DRAFT),
                )
                if cur.rowcount == 0:
                    raise Conflict("version already shared")
            elif version.tier == TIER_COMMUNITY and tier == TIER_CONSORTIUM:
                # Upward re-share: widen scope without a new version.
                cur = conn.execute(
                    "UPDATE versions SET tier = ?, shared_with = NULL"
                    " WHERE version_id = ? AND state = ? AND tier = ?",
                    (TIER_CONSORTIUM, version_id, SHARED, TIER_COMMUNITY),
                )
                if cur.rowcount == 0:
                    raise Conflict("version already shared at consortium scope")
            else:
                raise Conflict("version already shared at this scope")
            self.store.enqueue_index_task(conn, version_id, now)
        return self.store.get_version(version_id)

    def new_version(self, actor: Actor, record_id: str, import_files: bool) -> RecordVersion:
        record = self.store.get_record(record_id)
        if record is None:
            raise NotFound("record")
        latest = record.latest
        self._require_permission(actor, ac.CREATE_VERSION, latest)
        if latest.state != SHARED:
            raise Conflict("draft exists")

        next_index = latest.version_index + 1
        new_id = version_id_for(record_id, next_index)
        now = self._now()
        with self.store.transaction() as conn:
            try:
                conn.execute(
                    "INSERT INTO versions (version_id, record_id, version_index, state,"
                    " tier, shared_with, owner, metadata_json, created_at, shared_at)"
                    " VALUES (?, ?, ?, ?, ?, NULL, ?, ?, ?, NULL)",
                    (
                        new_id,
                        record_id,
                        next_index,
                        DRAFT,
                        TIER_NONE,
                        record.owner,
                        metadata_to_json(latest.metadata),
                        now,
                    ),
                )
            except sqlite3.IntegrityError as exc:
                raise Conflict("draft exists") from exc
            if import_files:
                # Copy by content reference; no byte duplication.
                conn.execute(
                    "INSERT INTO files (version_id, name, size, checksum, content_ref)"
                    " SELECT ?, name, size, checksum, content_ref FROM files"
                    " WHERE version_id = ?",
                    (new_id, latest.version_id),
                )
        return self.store.get_version(new_id)

    def delete_draft(self, actor: Actor, record_id: str) -> None:
        """Remove the open draft; removes the whole record if v1 was
        never shared. Blobs stay in the content store (shared refs)."""
        record = self.store.get_record(record_id)
        if record is None:
            raise NotFound("record")
        draft = record.latest
        if draft.state != DRAFT:
            raise NotFound("draft")
        self._require_permission(actor, ac.MODIFY_DRAFT_FILES, draft)
        with self.store.transaction() as conn:
            conn.execute("DELETE FROM files WHERE version_id = ?", (draft.version_id,))
            conn.execute("DELETE FROM versions WHERE version_id = ?", (draft.version_id,))
            if draft.version_index == 1:
                conn.execute("DELETE FROM share_links WHERE record_id = ?", (record_id,))
                conn.execute("DELETE FROM records WHERE record_id = ?", (record_id,))

    # -- reads -------------------------------------------------------------------

    def readable_versions(self, actor: Actor, record_id: str) -> list[RecordVersion]:
        """All versions the actor may read, ordered by version index.
        Raises NotFound when the record is absent or nothing is readable
        (deliberately indistinguishable)."""
        record = self.store.get_record(record_id)
        if record is None:
            raise NotFound("record")
        readable = [
            v
            for v in record.versions
            if self.access.evaluate(actor, ac.READ_METADATA, v).allowed
        ]
        if not readable:
            raise NotFound("record")
        return readable

    def list_versions(self, actor: Actor, record_id: str) -> list[dict]:
        return [version_summary(v) for v in self.readable_versions(actor, record_id)]

    def latest_readable(self, actor: Actor, record_id: str) -> RecordVersion:
        return self.readable_versions(actor, record_id)[-1]

    def get_record(self, record_id: str) -> Record:
        record = self.store.get_record(record_id)
        if record is None:
            raise NotFound("record")
        return record

    def version_by_index(self, record_id: str, version_index: int) -> RecordVersion:
        version = self.store.get_version(version_id_for(record_id, version_index))
        if version is None:
            raise NotFound("version")
        return version


def version_summary(version: RecordVersion) -> dict:
    return {
        "version_id": version.version_id,
        "version_index": version.version_index,
        "state": version.state,
        "tier": version.tier,
        "community": version.shared_with,
        "title": version.metadata.title,
        "created_at": version.created_at,
        "shared_at": version.shared_at,
    }


def version_representation(version: RecordVersion) -> dict:
    return {
        "record_id": version.record_id,
        "version_id": version.version_id,
        "version_index": version.version_index,
        "state": version.state,
        "tier": version.tier,
        "community": version.shared_with,
        "owner": version.owner,
        "created_at": version.created_at,
        "shared_at": version.shared_at,
        "metadata": version.metadata.to_dict(),
        "files": [f.to_dict() for f in version.files],
    }
