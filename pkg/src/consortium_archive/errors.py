"""Error types shared across the archive services.

Every service raises one of these; the REST layer maps them onto HTTP
statuses (400/401/403/404/409/413) and the CLI onto exit codes.
"""

from __future__ import annotations


class ArchiveError(Exception):
    """Base class for all archive errors."""


class ValidationFailed(ArchiveError):
    """Metadata or request payload failed validation.

    ``issues`` is a list of (field, reason) pairs, e.g.
    ``("authors[0].orcid", "checksum mismatch")``.
    """

    def __init__(self, issues: list[tuple[str, str]]):
        self.issues = list(issues)
        summary = "; ".join(f"{field}: {reason}" for field, reason in self.issues)
        super().__init__(f"validation failed: {summary}")


class PermissionDenied(ArchiveError):
    """Actor lacks permission for the attempted action.

    ``reason`` is a machine-readable code such as ``not-member``,
    ``draft-private``, ``immutable-files`` or ``link-expired``.
    """

    def __init__(self, reason: str, message: str | None = None):
        self.reason = reason
        super().__init__(message or reason)


class AuthenticationFailed(ArchiveError):
    """Bearer token missing, unknown, revoked, or account unusable."""

    def __init__(self, reason: str = "invalid-token"):
        self.reason = reason
        super().__init__(reason)


class NotFound(ArchiveError):
    """Entity absent, or deliberately indistinguishable from unreadable."""

    def __init__(self, what: str = "resource"):
        self.what = what
        super().__init__(f"{what} not found")


class Conflict(ArchiveError):
    """Concurrent check-and-set lost, or a state precondition failed
    (version already shared, open draft exists, ...)."""


class QuotaExceeded(ArchiveError):
    """Adding a file would push a version past its storage limit."""

    def __init__(self, limit: int, attempted: int):
        self.limit = limit
        self.attempted = attempted
        super().__init__(
            f"quota exceeded: {attempted} bytes requested, limit {limit} bytes"
        )
