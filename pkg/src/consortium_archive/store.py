"""Primary store: the transactional source of truth.

A single SQLite database holds users, communities, records, versions,
file manifests, share links, API tokens, anonymization salts, usage
events, and the persisted index task queue. All mutations go through
:meth:`PrimaryStore.transaction`, which serializes writers behind one
lock so check-and-set updates are atomic: concurrent conflicting
transitions see exactly one winner.

The search index is a *separate* store (see :mod:`.search`); only its
task queue lives here, so pending index work survives restarts.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from contextlib import contextmanager

from .model import (
    Author,
    Community,
    FileEntry,
    MetadataDocument,
    Record,
    RecordVersion,
    UserAccount,
)

_SCHEMA = """
CREATE TABLE IF NOT EXISTS users (
    user_id TEXT PRIMARY KEY,
    email TEXT NOT NULL,
    email_confirmed INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS communities (
    slug TEXT PRIMARY KEY,
    display_name TEXT NOT NULL,
    kind TEXT NOT NULL CHECK (kind IN ('project', 'umbrella'))
);
CREATE TABLE IF NOT EXISTS memberships (
    user_id TEXT NOT NULL REFERENCES users(user_id),
    community_slug TEXT NOT NULL REFERENCES communities(slug),
    PRIMARY KEY (user_id, community_slug)
);
CREATE TABLE IF NOT EXISTS records (
    record_id TEXT PRIMARY KEY,
    owner TEXT NOT NULL REFERENCES users(user_id),
    quota_override INTEGER
);
CREATE TABLE IF NOT EXISTS versions (
    version_id TEXT PRIMARY KEY,
    record_id TEXT NOT NULL REFERENCES records(record_id),
    version_index INTEGER NOT NULL,
    state TEXT NOT NULL CHECK (state IN ('draft', 'shared')),
    tier TEXT NOT NULL CHECK (tier IN ('none', 'community', 'consortium')),
    shared_with TEXT,
    owner TEXT NOT NULL,
    metadata_json TEXT NOT NULL,
    created_at TEXT NOT NULL,
    shared_at TEXT,
    UNIQUE (record_id, version_index)
);
CREATE TABLE IF NOT EXISTS files (
    version_id TEXT NOT NULL REFERENCES versions(version_id),
    name TEXT NOT NULL,
    size INTEGER NOT NULL,
    checksum TEXT NOT NULL,
    content_ref TEXT NOT NULL,
    PRIMARY KEY (version_id, name)
);
CREATE TABLE IF NOT EXISTS share_links (
    token TEXT PRIMARY KEY,
    record_id TEXT NOT NULL REFERENCES records(record_id),
    permission TEXT NOT NULL CHECK (permission IN ('view', 'edit')),
    created_by TEXT NOT NULL,
    created_at TEXT NOT NULL,
    expires_at TEXT,
    revoked INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS api_tokens (
    token_hash TEXT PRIMARY KEY,
    user_id TEXT NOT NULL REFERENCES users(user_id),
    label TEXT NOT NULL,
    created_at TEXT NOT NULL,
    revoked INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS salts (
    period_id INTEGER PRIMARY KEY AUTOINCREMENT,
    value BLOB,
    period_start TEXT NOT NULL,
    period_seconds INTEGER NOT NULL,
    active INTEGER NOT NULL DEFAULT 1
);
CREATE TABLE IF NOT EXISTS usage_events (
    event_id INTEGER PRIMARY KEY AUTOINCREMENT,
    event_type TEXT NOT NULL CHECK (event_type IN ('view', 'download')),
    version_id TEXT NOT NULL,
    record_id TEXT NOT NULL,
    file_name TEXT,
    visitor_hash TEXT NOT NULL,
    country TEXT NOT NULL,
    referrer_domain TEXT NOT NULL DEFAULT '',
    period_id INTEGER NOT NULL,
    occurred_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_usage_events_version ON usage_events(version_id);
CREATE INDEX IF NOT EXISTS idx_usage_events_record ON usage_events(record_id);
CREATE TABLE IF NOT EXISTS index_tasks (
    task_id INTEGER PRIMARY KEY AUTOINCREMENT,
    version_id TEXT NOT NULL,
    enqueued_at TEXT NOT NULL
);
"""


class PrimaryStore:
    """Thread-safe SQLite wrapper with serialized write transactions."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA foreign_keys = ON")
        with self._lock:
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self) -> None:
        self._conn.close()

    @contextmanager
    def transaction(self):
        """All-or-nothing mutation scope; one writer at a time."""
        with self._lock:
            try:
                yield self._conn
                self._conn.commit()
            except BaseException:
                self._conn.rollback()
                raise

    @contextmanager
    def reading(self):
        """Consistent read snapshot (shares the writer lock; cheap at
        desk scale and guarantees read-your-writes)."""
        with self._lock:
            yield self._conn

    # -- users & communities ------------------------------------------------

    def put_user(self, user: UserAccount) -> None:
        with self.transaction() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO users (user_id, email, email_confirmed)"
                " VALUES (?, ?, ?)",
                (user.user_id, user.email, int(user.email_confirmed)),
            )
            conn.execute("DELETE FROM memberships WHERE user_id = ?", (user.user_id,))
            for slug in sorted(user.memberships):
                conn.execute(
                    "INSERT INTO memberships (user_id, community_slug) VALUES (?, ?)",
                    (user.user_id, slug),
                )

    def get_user(self, user_id: str) -> UserAccount | None:
        with self.reading() as conn:
            row = conn.execute(
                "SELECT * FROM users WHERE user_id = ?", (user_id,)
            ).fetchone()
            if row is None:
                return None
            slugs = {
                r["community_slug"]
                for r in conn.execute(
                    "SELECT community_slug FROM memberships WHERE user_id = ?",
                    (user_id,),
                )
            }
        return UserAccount(
            user_id=row["user_id"],
            email=row["email"],
            email_confirmed=bool(row["email_confirmed"]),
            memberships=slugs,
        )

    def put_community(self, community: Community) -> None:
        with self.transaction() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO communities (slug, display_name, kind)"
                " VALUES (?, ?, ?)",
                (community.slug, community.display_name, community.kind),
            )

    def get_community(self, slug: str) -> Community | None:
        with self.reading() as conn:
            row = conn.execute(
                "SELECT * FROM communities WHERE slug = ?", (slug,)
            ).fetchone()
        if row is None:
            return None
        return Community(slug=row["slug"], display_name=row["display_name"], kind=row["kind"])

    def list_communities(self) -> list[Community]:
        with self.reading() as conn:
            rows = conn.execute("SELECT * FROM communities ORDER BY slug").fetchall()
        return [
            Community(slug=r["slug"], display_name=r["display_name"], kind=r["kind"])
            for r in rows
        ]

    def umbrella_slug(self) -> str:
        with self.reading() as conn:
            row = conn.execute(
                "SELECT slug FROM communities WHERE kind = 'umbrella'"
            ).fetchone()
        if row is None:
            raise RuntimeError("deployment has no umbrella community configured")
        return row["slug"]

    # -- records & versions -------------------------------------------------

    @staticmethod
    def _version_from_row(row: sqlite3.Row, files: list[FileEntry]) -> RecordVersion:
        return RecordVersion(
            version_id=row["version_id"],
            record_id=row["record_id"],
            version_index=row["version_index"],
            state=row["state"],
            tier=row["tier"],
            shared_with=row["shared_with"],
            owner=row["owner"],
            metadata=MetadataDocument.from_dict(json.loads(row["metadata_json"])),
            files=files,
            created_at=row["created_at"],
            shared_at=row["shared_at"],
        )

    def _files_for(self, conn: sqlite3.Connection, version_id: str) -> list[FileEntry]:
        rows = conn.execute(
            "SELECT * FROM files WHERE version_id = ? ORDER BY name", (version_id,)
        ).fetchall()
        return [
            FileEntry(
                name=r["name"],
                size=r["size"],
                checksum=r["checksum"],
                content_ref=r["content_ref"],
            )
            for r in rows
        ]

    def get_version(self, version_id: str) -> RecordVersion | None:
        with self.reading() as conn:
            row = conn.execute(
                "SELECT * FROM versions WHERE version_id = ?", (version_id,)
            ).fetchone()
            if row is None:
                return None
            files = self._files_for(conn, version_id)
        return self._version_from_row(row, files)

    def get_record(self, record_id: str) -> Record | None:
        with self.reading() as conn:
            rec = conn.execute(
                "SELECT * FROM records WHERE record_id = ?", (record_id,)
            ).fetchone()
            if rec is None:
                return None
            rows = conn.execute(
                "SELECT * FROM versions WHERE record_id = ? ORDER BY version_index",
                (record_id,),
            ).fetchall()
            versions = [self._version_from_row(r, self._files_for(conn, r["version_id"])) for r in rows]
        return Record(record_id=rec["record_id"], owner=rec["owner"], versions=versions)

    def record_quota_override(self, record_id: str) -> int | None:
        with self.reading() as conn:
            row = conn.execute(
                "SELECT quota_override FROM records WHERE record_id = ?", (record_id,)
            ).fetchone()
        return row["quota_override"] if row else None

    def set_record_quota_override(self, record_id: str, limit_bytes: int | None) -> None:
        with self.transaction() as conn:
            conn.execute(
                "UPDATE records SET quota_override = ? WHERE record_id = ?",
                (limit_bytes, record_id),
            )

    def all_version_ids(self) -> list[str]:
        with self.reading() as conn:
            rows = conn.execute("SELECT version_id FROM versions ORDER BY version_id").fetchall()
        return [r["version_id"] for r in rows]

    def all_versions(self) -> list[RecordVersion]:
        with self.reading() as conn:
            rows = conn.execute(
                "SELECT * FROM versions ORDER BY record_id, version_index"
            ).fetchall()
            return [
                self._version_from_row(r, self._files_for(conn, r["version_id"]))
                for r in rows
            ]

    def versions_owned_by(self, user_id: str) -> list[RecordVersion]:
        with self.reading() as conn:
            rows = conn.execute(
                "SELECT * FROM versions WHERE owner = ? ORDER BY record_id, version_index",
                (user_id,),
            ).fetchall()
            return [
                self._version_from_row(r, self._files_for(conn, r["version_id"]))
                for r in rows
            ]

    # -- index task queue ----------------------------------------------------

    def enqueue_index_task(
        self, conn: sqlite3.Connection, version_id: str, now: str
    ) -> None:
        """Enqueue inside an open transaction so the task commits with
        the mutation it follows (at-least-once delivery)."""
        conn.execute(
            "INSERT INTO index_tasks (version_id, enqueued_at) VALUES (?, ?)",
            (version_id, now),
        )

    def pending_index_tasks(self) -> list[tuple[int, str]]:
        with self.reading() as conn:
            rows = conn.execute(
                "SELECT task_id, version_id FROM index_tasks ORDER BY task_id"
            ).fetchall()
        return [(r["task_id"], r["version_id"]) for r in rows]

    def delete_index_tasks(self, task_ids: list[int]) -> None:
        if not task_ids:
            return
        with self.transaction() as conn:
            conn.executemany(
                "DELETE FROM index_tasks WHERE task_id = ?",
                [(tid,) for tid in task_ids],
            )


def metadata_to_json(metadata: MetadataDocument) -> str:
    return json.dumps(metadata.to_dict(), sort_keys=True)


def flattened_authors(metadata: MetadataDocument) -> list[str]:
    return [a.name for a in metadata.authors]


__all__ = ["PrimaryStore", "metadata_to_json", "flattened_authors", "Author"]
