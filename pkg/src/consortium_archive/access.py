"""Access control: tiered community permissions, share links, API tokens.

Every permission question funnels through :meth:`AccessService.evaluate`,
which is pure given a consistent store snapshot. The matrix it encodes:

* draft: owner may do everything; everyone else nothing (edit-link
  holders excepted, see below).
* shared at community scope C: members of C read metadata, download
  files and view stats; the owner additionally edits metadata, creates
  versions and mints links.
* shared at consortium scope: like community scope, but any member of
  any community may read.
* file manifests of shared versions are immutable for everyone.
* view links grant read on shared versions to any bearer; edit links
  grant edit (and reach the open draft) only to authenticated users
  sharing a project community with the owner.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable

from .errors import AuthenticationFailed, Conflict, NotFound, PermissionDenied
from .model import (
    DRAFT,
    KIND_PROJECT,
    SHARED,
    TIER_COMMUNITY,
    TIER_CONSORTIUM,
    RecordVersion,
    UserAccount,
)
from .store import PrimaryStore

READ_METADATA = "read_metadata"
DOWNLOAD_FILES = "download_files"
EDIT_METADATA = "edit_metadata"
MODIFY_DRAFT_FILES = "modify_draft_files"
CREATE_VERSION = "create_version"
SHARE = "share"
MINT_LINK = "mint_link"
VIEW_STATS = "view_stats"

ACTIONS = (
    READ_METADATA,
    DOWNLOAD_FILES,
    EDIT_METADATA,
    MODIFY_DRAFT_FILES,
    CREATE_VERSION,
    SHARE,
    MINT_LINK,
    VIEW_STATS,
)

_READ_RIGHTS = frozenset({READ_METADATA, DOWNLOAD_FILES, VIEW_STATS})
_EDIT_LINK_RIGHTS = _READ_RIGHTS | {EDIT_METADATA, CREATE_VERSION}
_OWNER_SHARED_RIGHTS = _READ_RIGHTS | {EDIT_METADATA, CREATE_VERSION, MINT_LINK}

LINK_TOKEN_BYTES = 16  # 128 bits
API_TOKEN_BYTES = 24  # 32 urlsafe chars


@dataclass(frozen=True)
class Actor:
    """Who is asking: an authenticated user, a link bearer, both, or neither."""

    user_id: str | None = None
    link_token: str | None = None

    @property
    def is_anonymous(self) -> bool:
        return self.user_id is None


ANONYMOUS = Actor()


@dataclass
class PermissionDecision:
    allowed: bool
    reason: str | None = None  # set iff not allowed


@dataclass
class ShareLink:
    token: str
    record_id: str
    permission: str  # view | edit
    created_by: str
    created_at: str
    expires_at: str | None
    revoked: bool


@dataclass
class LinkCapability:
    """Result of redeeming a share link: read, edit, or a denial."""

    kind: str  # "read" | "edit" | "denied"
    reason: str | None = None


def _allow() -> PermissionDecision:
    return PermissionDecision(True, None)


def _deny(reason: str) -> PermissionDecision:
    return PermissionDecision(False, reason)


def hash_api_token(secret: str) -> str:
    return hashlib.sha256(secret.encode("utf-8")).hexdigest()


class AccessService:
    def __init__(
        self,
        store: PrimaryStore,
        managers: dict[str, list[str]] | None = None,
        base_url: str = "http://localhost:8000",
        clock: Callable[[], datetime] | None = None,
    ):
        self.store = store
        self.managers = {k: list(v) for k, v in (managers or {}).items()}
        self.base_url = base_url.rstrip("/")
        self.clock = clock or (lambda: datetime.now(timezone.utc))

    def _now_iso(self) -> str:
        return self.clock().isoformat()

    # -- permission evaluation ----------------------------------------------

    def evaluate(
        self, actor: Actor, action: str, version: RecordVersion
    ) -> PermissionDecision:
        if action not in ACTIONS:
            raise ValueError(f"unknown action: {action}")

        # File manifests of shared versions are immutable for everyone.
        if action == MODIFY_DRAFT_FILES and version.state == SHARED:
            return _deny("immutable-files")

        rights, link_reason = self._rights_for(actor, version)
        if action in rights:
            return _allow()
        return _deny(self._denial_reason(actor, action, version, rights, link_reason))

    def _rights_for(
        self, actor: Actor, version: RecordVersion
    ) -> tuple[set[str], str | None]:
        rights: set[str] = set()
        user = self.store.get_user(actor.user_id) if actor.user_id else None

        if user is not None and user.user_id == version.owner:
            if version.state == DRAFT:
                rights |= set(ACTIONS)
            else:
                rights |= _OWNER_SHARED_RIGHTS
                if version.tier == TIER_COMMUNITY:
                    rights.add(SHARE)  # upward re-share to consortium scope
        elif user is not None and version.state == SHARED:
            if version.tier == TIER_COMMUNITY and version.shared_with in user.memberships:
                rights |= _READ_RIGHTS
            elif version.tier == TIER_CONSORTIUM and user.memberships:
                rights |= _READ_RIGHTS

        link_reason: str | None = None
        if actor.link_token is not None:
            capability = self._redeem(actor.link_token, user, version.record_id)
            if capability.kind == "read":
                if version.state == SHARED:
                    rights |= _READ_RIGHTS
                else:
                    link_reason = "draft-private"  # view links stop at shared versions
            elif capability.kind == "edit":
                rights |= _EDIT_LINK_RIGHTS
                if version.state == DRAFT:
                    rights.add(MODIFY_DRAFT_FILES)
            else:
                link_reason = capability.reason

        return rights, link_reason

    def _denial_reason(
        self,
        actor: Actor,
        action: str,
        version: RecordVersion,
        rights: set[str],
        link_reason: str | None,
    ) -> str:
        if rights:
            # Actor can do something, just not this: an authorization gap,
            # not an identity problem.
            if action == SHARE and version.tier == TIER_CONSORTIUM:
                return "already-shared"
            if action in (SHARE, MINT_LINK, EDIT_METADATA, CREATE_VERSION):
                return "not-owner"
            return "not-member"
        if link_reason is not None:
            return link_reason
        if version.state == DRAFT:
            return "draft-private"
        return "not-member"

    # -- share links ----------------------------------------------------------

    def mint_share_link(
        self,
        actor_user_id: str,
        record_id: str,
        permission: str,
        expires_at: str | None = None,
    ) -> tuple[ShareLink, str]:
        """Returns the persisted link and its shareable URL."""
        if permission not in ("view", "edit"):
            raise ValueError("permission must be 'view' or 'edit'")
        record = self.store.get_record(record_id)
        if record is None:
            raise NotFound("record")
        if record.owner != actor_user_id:
            raise PermissionDenied("not-owner")
        token = secrets.token_urlsafe(LINK_TOKEN_BYTES)
        link = ShareLink(
            token=token,
            record_id=record_id,
            permission=permission,
            created_by=actor_user_id,
            created_at=self._now_iso(),
            expires_at=expires_at,
            revoked=False,
        )
        with self.store.transaction() as conn:
            conn.execute(
                "INSERT INTO share_links"
                " (token, record_id, permission, created_by, created_at, expires_at, revoked)"
                " VALUES (?, ?, ?, ?, ?, ?, 0)",
                (token, record_id, permission, actor_user_id, link.created_at, expires_at),
            )
        return link, self.link_url(link)

    def link_url(self, link: ShareLink) -> str:
        return f"{self.base_url}/records/{link.record_id}?token={link.token}"

    def get_link(self, token: str) -> ShareLink | None:
        with self.store.reading() as conn:
            row = conn.execute(
                "SELECT * FROM share_links WHERE token = ?", (token,)
            ).fetchone()
        if row is None:
            return None
        return ShareLink(
            token=row["token"],
            record_id=row["record_id"],
            permission=row["permission"],
            created_by=row["created_by"],
            created_at=row["created_at"],
            expires_at=row["expires_at"],
            revoked=bool(row["revoked"]),
        )

    def redeem_share_link(self, token: str, actor: Actor) -> LinkCapability:
        user = self.store.get_user(actor.user_id) if actor.user_id else None
        return self._redeem(token, user, record_id=None)

    def _redeem(
        self, token: str, user: UserAccount | None, record_id: str | None
    ) -> LinkCapability:
        link = self.get_link(token)
        if link is None:
            return LinkCapability("denied", "unknown-token")
        if record_id is not None and link.record_id != record_id:
            return LinkCapability("denied", "unknown-token")
        if link.revoked:
            return LinkCapability("denied", "link-revoked")
        if link.expires_at is not None and self._now_iso() >= link.expires_at:
            return LinkCapability("denied", "link-expired")
        if link.permission == "view":
            return LinkCapability("read")
        # Edit links are honored only for authenticated users who share a
        # project community with the record owner.
        if user is None:
            return LinkCapability("denied", "not-member")
        record = self.store.get_record(link.record_id)
        if record is None:
            return LinkCapability("denied", "unknown-token")
        owner = self.store.get_user(record.owner)
        owner_projects = self._project_slugs(owner.memberships) if owner else set()
        if owner_projects & self._project_slugs(user.memberships):
            return LinkCapability("edit")
        return LinkCapability("denied", "not-member")

    def _project_slugs(self, memberships: set[str]) -> set[str]:
        slugs = set()
        for slug in memberships:
            community = self.store.get_community(slug)
            if community is not None and community.kind == KIND_PROJECT:
                slugs.add(slug)
        return slugs

    def revoke_share_link(self, actor_user_id: str, token: str) -> None:
        link = self.get_link(token)
        if link is None:
            raise NotFound("link")
        record = self.store.get_record(link.record_id)
        allowed = actor_user_id == link.created_by or (
            record is not None and record.owner == actor_user_id
        )
        if not allowed:
            raise PermissionDenied("not-owner")
        with self.store.transaction() as conn:  # idempotent
            conn.execute("UPDATE share_links SET revoked = 1 WHERE token = ?", (token,))

    def links_for_record(self, record_id: str) -> list[ShareLink]:
        with self.store.reading() as conn:
            rows = conn.execute(
                "SELECT * FROM share_links WHERE record_id = ? ORDER BY created_at",
                (record_id,),
            ).fetchall()
        return [
            ShareLink(
                token=r["token"],
                record_id=r["record_id"],
                permission=r["permission"],
                created_by=r["created_by"],
                created_at=r["created_at"],
                expires_at=r["expires_at"],
                revoked=bool(r["revoked"]),
            )
            for r in rows
        ]

    # -- API tokens -----------------------------------------------------------

    def mint_api_token(self, user_id: str, label: str) -> str:
        """Returns the plaintext secret; only its digest is stored."""
        if self.store.get_user(user_id) is None:
            raise NotFound("user")
        secret = secrets.token_urlsafe(API_TOKEN_BYTES)
        with self.store.transaction() as conn:
            conn.execute(
                "INSERT INTO api_tokens (token_hash, user_id, label, created_at, revoked)"
                " VALUES (?, ?, ?, ?, 0)",
                (hash_api_token(secret), user_id, label, self._now_iso()),
            )
        return secret

    def register_token_secret(self, user_id: str, secret: str, label: str) -> None:
        """Pre-registered secret (deployment bootstrap); digest stored only."""
        with self.store.transaction() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO api_tokens"
                " (token_hash, user_id, label, created_at, revoked)"
                " VALUES (?, ?, ?, ?, 0)",
                (hash_api_token(secret), user_id, label, self._now_iso()),
            )

    def authenticate(self, bearer: str) -> UserAccount:
        with self.store.reading() as conn:
            row = conn.execute(
                "SELECT * FROM api_tokens WHERE token_hash = ?",
                (hash_api_token(bearer),),
            ).fetchone()
        if row is None or row["revoked"]:
            raise AuthenticationFailed("invalid-token")
        user = self.store.get_user(row["user_id"])
        if user is None:
            raise AuthenticationFailed("invalid-token")
        if not user.email_confirmed:
            raise AuthenticationFailed("unconfirmed-email")
        return user

    def list_api_tokens(self, user_id: str) -> list[dict]:
        with self.store.reading() as conn:
            rows = conn.execute(
                "SELECT label, created_at FROM api_tokens"
                " WHERE user_id = ? AND revoked = 0 ORDER BY created_at",
                (user_id,),
            ).fetchall()
        return [{"label": r["label"], "created_at": r["created_at"]} for r in rows]

    # -- community membership ---------------------------------------------------

    def is_manager(self, user_id: str, community_slug: str) -> bool:
        return user_id in self.managers.get(community_slug, [])

    def add_member(self, admin: str, community_slug: str, user_id: str) -> None:
        if not self.is_manager(admin, community_slug):
            raise PermissionDenied("not-manager")
        community = self.store.get_community(community_slug)
        if community is None:
            raise NotFound("community")
        user = self.store.get_user(user_id)
        if user is None:
            raise NotFound("user")
        user.memberships.add(community_slug)
        if community.kind == KIND_PROJECT:
            user.memberships.add(self.store.umbrella_slug())
        self.store.put_user(user)

    def remove_member(self, admin: str, community_slug: str, user_id: str) -> None:
        if not self.is_manager(admin, community_slug):
            raise PermissionDenied("not-manager")
        community = self.store.get_community(community_slug)
        if community is None:
            raise NotFound("community")
        user = self.store.get_user(user_id)
        if user is None:
            raise NotFound("user")
        umbrella = self.store.umbrella_slug()
        if community.kind != KIND_PROJECT and self._project_slugs(user.memberships):
            raise Conflict("umbrella membership follows project membership")
        user.memberships.discard(community_slug)
        if community.kind == KIND_PROJECT and not self._project_slugs(user.memberships):
            user.memberships.discard(umbrella)
        self.store.put_user(user)
