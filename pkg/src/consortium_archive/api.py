"""HTTP surface: every operation exposed under /api.

Authentication is a Bearer token; share-link bearers pass ``?token=``.
Error discipline: every non-2xx body is exactly one ApiError object.
404 covers both "absent" and "present but not readable" so record ids
never leak; 403 is reserved for actors who can read the record but may
not perform the attempted action.
"""

from __future__ import annotations

import io
from typing import Any

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse

from . import access as ac
from .access import Actor
from .archive import Archive
from .errors import (
    ArchiveError,
    AuthenticationFailed,
    Conflict,
    NotFound,
    PermissionDenied,
    QuotaExceeded,
    ValidationFailed,
)
from .export import FORMATS, export
from .model import MetadataDocument, RecordVersion
from .records import version_representation, version_summary
from .stats import RequesterContext


def api_error(
    status: int, code: str, message: str, field_errors: list | None = None
) -> JSONResponse:
    body: dict[str, Any] = {"status": status, "code": code, "message": message}
    if field_errors is not None:
        body["field_errors"] = field_errors
    return JSONResponse(status_code=status, content=body)


def create_app(archive: Archive) -> FastAPI:
    app = FastAPI(title=archive.config.display_name, docs_url=None, redoc_url=None)
    app.state.archive = archive

    # -- error mapping -------------------------------------------------------

    @app.exception_handler(ArchiveError)
    async def handle_archive_error(request: Request, exc: ArchiveError):
        if isinstance(exc, ValidationFailed):
            return api_error(
                400,
                "validation-failed",
                "validation failed",
                field_errors=[{"field": f, "reason": r} for f, r in exc.issues],
            )
        if isinstance(exc, AuthenticationFailed):
            return api_error(401, exc.reason, "authentication failed")
        if isinstance(exc, QuotaExceeded):
            return api_error(413, "quota-exceeded", str(exc))
        if isinstance(exc, PermissionDenied):
            return api_error(403, exc.reason, "permission denied")
        if isinstance(exc, NotFound):
            return api_error(404, "not-found", str(exc))
        if isinstance(exc, Conflict):
            return api_error(409, "conflict", str(exc))
        return api_error(500, "internal", str(exc))

    @app.exception_handler(RequestValidationError)
    async def handle_request_validation(request: Request, exc: RequestValidationError):
        fields = [
            {
                "field": ".".join(str(p) for p in err["loc"] if p != "body"),
                "reason": err["msg"],
            }
            for err in exc.errors()
        ]
        return api_error(400, "validation-failed", "invalid request", field_errors=fields)

    # -- actor resolution ------------------------------------------------------

    def current_actor(request: Request) -> Actor:
        user_id = None
        header = request.headers.get("authorization")
        if header:
            scheme, _, secret = header.partition(" ")
            if scheme.lower() != "bearer" or not secret:
                raise AuthenticationFailed("invalid-token")
            user_id = archive.access.authenticate(secret.strip()).user_id
        return Actor(user_id=user_id, link_token=request.query_params.get("token"))

    def require_user(actor: Actor = Depends(current_actor)) -> Actor:
        if actor.user_id is None:
            raise AuthenticationFailed("authentication-required")
        return actor

    def requester_context(request: Request, actor: Actor) -> RequesterContext:
        remote = request.client.host if request.client else "0.0.0.0"
        if archive.config.trust_proxy_headers:
            forwarded = request.headers.get("x-forwarded-for")
            if forwarded:
                remote = forwarded.split(",")[0].strip()
        return RequesterContext(
            personal_identifier=actor.user_id or remote,
            remote_address=remote,
            referrer=request.headers.get("referer"),
        )

    def latest_readable(actor: Actor, record_id: str) -> RecordVersion:
        return archive.records.latest_readable(actor, record_id)

    # -- records ----------------------------------------------------------------

    @app.post("/api/records", status_code=201)
    def create_record(body: dict, actor: Actor = Depends(require_user)):
        metadata = MetadataDocument.from_dict(body)
        version = archive.records.create_draft(actor.user_id, metadata)
        return version_representation(version)

    @app.get("/api/records/{record_id}")
    def read_record(
        record_id: str, request: Request, actor: Actor = Depends(current_actor)
    ):
        version = latest_readable(actor, record_id)
        archive.stats.ingest_view(version.version_id, requester_context(request, actor))
        return version_representation(version)

    @app.get("/api/records/{record_id}/versions")
    def list_versions(record_id: str, actor: Actor = Depends(current_actor)):
        return {"versions": archive.records.list_versions(actor, record_id)}

    @app.put("/api/records/{record_id}/draft")
    def update_metadata(
        record_id: str, body: dict, actor: Actor = Depends(current_actor)
    ):
        latest_readable(actor, record_id)
        target = archive.records.get_record(record_id).latest
        version = archive.records.update_metadata(
            actor, target.version_id, MetadataDocument.from_dict(body)
        )
        return version_representation(version)

    @app.delete("/api/records/{record_id}/draft", status_code=204)
    def delete_draft(record_id: str, actor: Actor = Depends(current_actor)):
        latest_readable(actor, record_id)
        archive.records.delete_draft(actor, record_id)
        return Response(status_code=204)

    @app.put("/api/records/{record_id}/draft/files/{name}", status_code=201)
    async def upload_file(
        record_id: str,
        name: str,
        request: Request,
        actor: Actor = Depends(current_actor),
    ):
        latest_readable(actor, record_id)
        declared = request.headers.get("content-length")
        if declared is None:
            raise ValidationFailed([("content-length", "header required for uploads")])
        target = archive.records.get_record(record_id).latest
        body = await request.body()
        entry = archive.records.attach_file(
            actor, target.version_id, name, io.BytesIO(body), declared_size=int(declared)
        )
        return entry.to_dict()

    @app.delete("/api/records/{record_id}/draft/files/{name}", status_code=204)
    def delete_file(record_id: str, name: str, actor: Actor = Depends(current_actor)):
        latest_readable(actor, record_id)
        target = archive.records.get_record(record_id).latest
        archive.records.remove_file(actor, target.version_id, name)
        return Response(status_code=204)

    @app.get("/api/records/{record_id}/files/{name}")
    def download_file(
        record_id: str,
        name: str,
        request: Request,
        actor: Actor = Depends(current_actor),
    ):
        version = latest_readable(actor, record_id)
        decision = archive.access.evaluate(actor, ac.DOWNLOAD_FILES, version)
        if not decision.allowed:
            raise PermissionDenied(decision.reason)
        entry = next((f for f in version.files if f.name == name), None)
        if entry is None:
            raise NotFound("file")
        archive.stats.ingest_download(
            version.version_id, name, requester_context(request, actor)
        )
        return StreamingResponse(
            archive.files.iter_chunks(entry.content_ref),
            media_type="application/octet-stream",
            headers={
                "Content-Length": str(entry.size),
                "Content-Disposition": f'attachment; filename="{entry.name}"',
                "X-Checksum": entry.checksum,
            },
        )

    @app.post("/api/records/{record_id}/actions/share")
    def share_record(
        record_id: str, body: dict, actor: Actor = Depends(current_actor)
    ):
        latest_readable(actor, record_id)
        target = archive.records.get_record(record_id).latest
        version = archive.records.share(
            actor,
            target.version_id,
            str(body.get("tier", "")),
            body.get("community"),
        )
        return version_representation(version)

    @app.post("/api/records/{record_id}/versions", status_code=201)
    def create_version(
        record_id: str, body: dict | None = None, actor: Actor = Depends(current_actor)
    ):
        latest_readable(actor, record_id)
        import_files = bool((body or {}).get("import_files", False))
        version = archive.records.new_version(actor, record_id, import_files)
        return version_representation(version)

    # -- share links ---------------------------------------------------------------

    @app.post("/api/records/{record_id}/links", status_code=201)
    def mint_link(
        record_id: str, body: dict, actor: Actor = Depends(require_user)
    ):
        latest_readable(actor, record_id)
        permission = str(body.get("permission", ""))
        if permission not in ("view", "edit"):
            raise ValidationFailed([("permission", "must be 'view' or 'edit'")])
        link, url = archive.access.mint_share_link(
            actor.user_id, record_id, permission, body.get("expires_at")
        )
        return {
            "token": link.token,
            "permission": link.permission,
            "url": url,
            "created_at": link.created_at,
            "expires_at": link.expires_at,
        }

    @app.delete("/api/links/{token}", status_code=204)
    def revoke_link(token: str, actor: Actor = Depends(require_user)):
        archive.access.revoke_share_link(actor.user_id, token)
        return Response(status_code=204)

    # -- export ------------------------------------------------------------------------

    @app.get("/api/records/{record_id}/export/{fmt}")
    def export_record(record_id: str, fmt: str, actor: Actor = Depends(current_actor)):
        if fmt not in FORMATS:
            raise NotFound("format")
        version = latest_readable(actor, record_id)
        blob, media_type = export(version, fmt, archive.config.display_name)
        return Response(
            content=blob,
            media_type=media_type,
            headers={
                "Content-Disposition": f'attachment; filename="{version.version_id}.{fmt}"'
            },
        )

    # -- stats ----------------------------------------------------------------------------

    @app.get("/api/records/{record_id}/stats")
    def record_stats(record_id: str, actor: Actor = Depends(current_actor)):
        readable = archive.records.readable_versions(actor, record_id)
        return {
            "record_id": record_id,
            "cumulative": archive.stats.stats_cumulative(record_id).to_dict(),
            "versions": [
                {
                    "version_id": v.version_id,
                    "version_index": v.version_index,
                    "stats": archive.stats.stats_for_version(v.version_id).to_dict(),
                }
                for v in readable
            ],
        }

    @app.get("/api/records/{record_id}/versions/{version_index}/stats")
    def version_stats(
        record_id: str, version_index: int, actor: Actor = Depends(current_actor)
    ):
        latest_readable(actor, record_id)  # 404 when nothing is readable
        version = archive.records.version_by_index(record_id, version_index)
        decision = archive.access.evaluate(actor, ac.VIEW_STATS, version)
        if not decision.allowed:
            raise NotFound("version")  # unreadable versions stay invisible
        return {
            "version_id": version.version_id,
            "version_index": version.version_index,
            "stats": archive.stats.stats_for_version(version.version_id).to_dict(),
        }

    # -- search -----------------------------------------------------------------------------

    @app.get("/api/search")
    def search(
        actor: Actor = Depends(current_actor),
        q: str = "",
        community: str | None = None,
        type: str | None = Query(default=None),
        owner: str | None = None,
        sort: str = "newest",
        page: int = 1,
        size: int = 20,
    ):
        result = archive.search.search(
            actor,
            query=q,
            community=community,
            resource_type=type,
            owner_me=(owner == "me"),
            sort=sort,
            page=page,
            page_size=size,
        )
        return {
            "items": result.items,
            "total": result.total,
            "page": result.page,
            "size": result.size,
        }

    # -- communities & membership ---------------------------------------------------------------

    @app.get("/api/communities")
    def communities(actor: Actor = Depends(require_user)):
        return {
            "communities": [
                {"slug": c.slug, "display_name": c.display_name, "kind": c.kind}
                for c in archive.store.list_communities()
            ]
        }

    @app.post("/api/communities/{slug}/members", status_code=204)
    def add_member(slug: str, body: dict, actor: Actor = Depends(require_user)):
        user = body.get("user")
        if not user:
            raise ValidationFailed([("user", "required")])
        archive.access.add_member(actor.user_id, slug, str(user))
        return Response(status_code=204)

    @app.delete("/api/communities/{slug}/members/{user_id}", status_code=204)
    def remove_member(slug: str, user_id: str, actor: Actor = Depends(require_user)):
        archive.access.remove_member(actor.user_id, slug, user_id)
        return Response(status_code=204)

    # -- user tokens & identity ---------------------------------------------------------------------

    @app.get("/api/user/me")
    def whoami(actor: Actor = Depends(require_user)):
        user = archive.store.get_user(actor.user_id)
        return {
            "user_id": user.user_id,
            "email": user.email,
            "memberships": sorted(user.memberships),
        }

    @app.post("/api/user/tokens", status_code=201)
    def mint_token(body: dict, actor: Actor = Depends(require_user)):
        label = str(body.get("label", "")) or "unnamed"
        secret = archive.access.mint_api_token(actor.user_id, label)
        # The only response that ever carries a token secret.
        return {"token": secret, "label": label}

    @app.get("/api/user/tokens")
    def list_tokens(actor: Actor = Depends(require_user)):
        return {"tokens": archive.access.list_api_tokens(actor.user_id)}

    # -- liveness ------------------------------------------------------------------------------------

    @app.get("/api/healthz")
    def healthz():
        return {"status": "ok"}

    # -- web UI assets --------------------------------------------------------------------------------

    static_dir = archive.config.static_dir
    if static_dir is not None and static_dir.is_dir():
        from fastapi.responses import FileResponse
        from fastapi.staticfiles import StaticFiles

        app.mount("/assets", StaticFiles(directory=static_dir / "assets"), name="assets")
        index = static_dir / "index.html"

        @app.get("/{path:path}", include_in_schema=False)
        def spa(path: str):
            # Client-side routes (/, /records/<id>, /search, ...) all load
            # the single-page app; real state comes from /api. Unknown API
            # paths stay API errors and never fall through to HTML.
            if path == "api" or path.startswith("api/"):
                raise NotFound("route")
            return FileResponse(index)

    return app
