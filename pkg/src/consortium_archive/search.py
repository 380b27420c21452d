"""Secondary search index and permission-filtered search.

The index is a separate SQLite file holding pure projections of shared
versions (never drafts, never file bytes, never tokens). Updates flow
through a task queue persisted in the primary store: mutations enqueue,
:meth:`Indexer.flush` drains with idempotent upserts, so delivery is
at-least-once and a crashed worker just replays.

Search reads the index for shared content and merges the caller's own
drafts straight from the primary store, both through one query
predicate, so results always equal a brute-force permission filter of
the full corpus.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass, fields

from . import access as ac
from .access import AccessService, Actor
from .errors import ValidationFailed
from .model import DRAFT, SHARED, RecordVersion
from .store import PrimaryStore, flattened_authors

DEFAULT_PAGE_SIZE = 20
MAX_PAGE_SIZE = 100

SORT_NEWEST = "newest"
SORT_OLDEST = "oldest"
SORT_BEST_MATCH = "best-match"
SORTS = (SORT_NEWEST, SORT_OLDEST, SORT_BEST_MATCH)


@dataclass
class IndexDocument:
    """Deterministic projection of a shared RecordVersion."""

    version_id: str
    record_id: str
    title: str
    keywords: list[str]
    authors: list[str]
    community: str | None
    tier: str
    state: str
    shared_at: str | None
    owner: str

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def project(version: RecordVersion) -> IndexDocument:
    return IndexDocument(
        version_id=version.version_id,
        record_id=version.record_id,
        title=version.metadata.title,
        keywords=list(version.metadata.keywords),
        authors=flattened_authors(version.metadata),
        community=version.shared_with,
        tier=version.tier,
        state=version.state,
        shared_at=version.shared_at,
        owner=version.owner,
    )


@dataclass
class ConsistencyReport:
    missing_in_index: list[str]
    stale_in_index: list[str]
    orphaned_in_index: list[str]

    @property
    def empty(self) -> bool:
        return not (self.missing_in_index or self.stale_in_index or self.orphaned_in_index)


class SearchIndex:
    """The secondary store: one table of index documents."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        with self._lock:
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS index_docs ("
                " version_id TEXT PRIMARY KEY,"
                " record_id TEXT NOT NULL,"
                " title TEXT NOT NULL,"
                " keywords_json TEXT NOT NULL,"
                " authors_json TEXT NOT NULL,"
                " community TEXT,"
                " tier TEXT NOT NULL,"
                " state TEXT NOT NULL,"
                " shared_at TEXT,"
                " owner TEXT NOT NULL)"
            )
            self._conn.commit()

    def close(self) -> None:
        self._conn.close()

    def upsert(self, doc: IndexDocument) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO index_docs (version_id, record_id, title,"
                " keywords_json, authors_json, community, tier, state, shared_at, owner)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    doc.version_id,
                    doc.record_id,
                    doc.title,
                    json.dumps(doc.keywords),
                    json.dumps(doc.authors),
                    doc.community,
                    doc.tier,
                    doc.state,
                    doc.shared_at,
                    doc.owner,
                ),
            )
            self._conn.commit()

    def delete(self, version_id: str) -> None:
        with self._lock:
            self._conn.execute("DELETE FROM index_docs WHERE version_id = ?", (version_id,))
            self._conn.commit()

    def get(self, version_id: str) -> IndexDocument | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM index_docs WHERE version_id = ?", (version_id,)
            ).fetchone()
        return self._doc_from_row(row) if row else None

    def all_docs(self) -> list[IndexDocument]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM index_docs ORDER BY version_id"
            ).fetchall()
        return [self._doc_from_row(r) for r in rows]

    def clear(self) -> None:
        with self._lock:
            self._conn.execute("DELETE FROM index_docs")
            self._conn.commit()

    @staticmethod
    def _doc_from_row(row: sqlite3.Row) -> IndexDocument:
        return IndexDocument(
            version_id=row["version_id"],
            record_id=row["record_id"],
            title=row["title"],
            keywords=json.loads(row["keywords_json"]),
            authors=json.loads(row["authors_json"]),
            community=row["community"],
            tier=row["tier"],
            state=row["state"],
            shared_at=row["shared_at"],
            owner=row["owner"],
        )


class Indexer:
    """Single logical index worker: drains the persisted task queue."""

    def __init__(self, store: PrimaryStore, index: SearchIndex):
        self.store = store
        self.index = index

    def flush(self) -> int:
        """Process all pending tasks; idempotent, safe to re-run."""
        tasks = self.store.pending_index_tasks()
        done: list[int] = []
        for task_id, version_id in tasks:
            version = self.store.get_version(version_id)
            if version is not None and version.state == SHARED:
                self.index.upsert(project(version))
            else:
                self.index.delete(version_id)
            done.append(task_id)
        self.store.delete_index_tasks(done)
        return len(done)

    def verify_consistency(self) -> ConsistencyReport:
        """Full scan: the index must be an exact projection of the
        primary store's shared versions."""
        primary = {
            v.version_id: project(v)
            for v in self.store.all_versions()
            if v.state == SHARED
        }
        indexed = {doc.version_id: doc for doc in self.index.all_docs()}
        missing = sorted(set(primary) - set(indexed))
        orphaned = sorted(set(indexed) - set(primary))
        stale = sorted(
            vid
            for vid in set(primary) & set(indexed)
            if primary[vid] != indexed[vid]
        )
        return ConsistencyReport(missing, stale, orphaned)

    def reindex_all(self) -> None:
        self.index.clear()
        for version in self.store.all_versions():
            if version.state == SHARED:
                self.index.upsert(project(version))
        self.store.delete_index_tasks([t for t, _ in self.store.pending_index_tasks()])


# ---------------------------------------------------------------------------
# Query matching & search
# ---------------------------------------------------------------------------


def matches_query(title: str, keywords: list[str], authors: list[str], query: str) -> bool:
    """Every whitespace-separated query token must hit the title, a
    keyword, or an author name (case-insensitive substring)."""
    tokens = query.lower().split()
    if not tokens:
        return True
    haystacks = [title.lower()] + [k.lower() for k in keywords] + [a.lower() for a in authors]
    return all(any(tok in h for h in haystacks) for tok in tokens)


def match_score(title: str, keywords: list[str], query: str) -> int:
    """Best-match ranking: token hits over title and keywords, title 2x."""
    tokens = query.lower().split()
    title_l = title.lower()
    keywords_l = [k.lower() for k in keywords]
    score = 0
    for tok in tokens:
        if tok in title_l:
            score += 2
        if any(tok in k for k in keywords_l):
            score += 1
    return score


@dataclass
class SearchPage:
    items: list[dict]
    total: int
    page: int
    size: int


class SearchService:
    def __init__(self, store: PrimaryStore, index: SearchIndex, indexer: Indexer, access: AccessService):
        self.store = store
        self.index = index
        self.indexer = indexer
        self.access = access

    def search(
        self,
        actor: Actor,
        query: str = "",
        community: str | None = None,
        keywords: list[str] | None = None,
        resource_type: str | None = None,
        owner_me: bool = False,
        sort: str = SORT_NEWEST,
        page: int = 1,
        page_size: int = DEFAULT_PAGE_SIZE,
    ) -> SearchPage:
        if sort not in SORTS:
            raise ValidationFailed([("sort", f"must be one of {', '.join(SORTS)}")])
        if page < 1:
            raise ValidationFailed([("page", "must be >= 1")])
        if not 1 <= page_size <= MAX_PAGE_SIZE:
            raise ValidationFailed([("size", f"must be 1..{MAX_PAGE_SIZE}")])
        if resource_type is not None and resource_type not in (
            "dataset",
            "software",
            "publication",
            "other",
        ):
            raise ValidationFailed([("type", "unknown resource type")])

        self.indexer.flush()  # bounded staleness: search sees a quiescent index

        docs: list[IndexDocument] = []
        seen: set[str] = set()
        for doc in self.index.all_docs():
            version = self.store.get_version(doc.version_id)
            if version is None:
                continue
            if not self.access.evaluate(actor, ac.READ_METADATA, version).allowed:
                continue
            docs.append(doc)
            seen.add(doc.version_id)

        # The caller's own drafts come from the primary store; drafts are
        # never indexed but remain readable (and searchable) by their owner.
        if actor.user_id is not None:
            for version in self.store.versions_owned_by(actor.user_id):
                if version.version_id in seen or version.state != DRAFT:
                    continue
                if self.access.evaluate(actor, ac.READ_METADATA, version).allowed:
                    docs.append(project(version))

        if owner_me:
            if actor.user_id is None:
                docs = []
            else:
                docs = [d for d in docs if d.owner == actor.user_id]
        if community is not None:
            docs = [d for d in docs if d.community == community]
        if resource_type is not None:
            wanted: list[IndexDocument] = []
            for d in docs:
                version = self.store.get_version(d.version_id)
                if version is not None and version.metadata.resource_type == resource_type:
                    wanted.append(d)
            docs = wanted
        if keywords:
            folded = {k.lower() for k in keywords}
            docs = [d for d in docs if folded <= {k.lower() for k in d.keywords}]
        if query:
            docs = [d for d in docs if matches_query(d.title, d.keywords, d.authors, query)]

        def recency(doc: IndexDocument) -> str:
            if doc.shared_at:
                return doc.shared_at
            version = self.store.get_version(doc.version_id)
            return version.created_at if version else ""

        if sort == SORT_NEWEST:
            docs.sort(key=lambda d: (recency(d), d.version_id), reverse=True)
        elif sort == SORT_OLDEST:
            docs.sort(key=lambda d: (recency(d), d.version_id))
        else:
            docs.sort(
                key=lambda d: (-match_score(d.title, d.keywords, query), d.version_id)
            )

        total = len(docs)
        start = (page - 1) * page_size
        items = [d.to_dict() for d in docs[start : start + page_size]]
        return SearchPage(items=items, total=total, page=page, size=page_size)
