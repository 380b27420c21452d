"""Anonymized usage statistics.

View and download events are recorded server-side with a salted one-way
visitor hash (salt prefixed, SHA-256, hex). The salt rotates every 24
hours and its old value is destroyed, so hashes are unlinkable across
periods; "unique" therefore means distinct (visitor hash, salt period)
pairs. Events carry only the hash, a country derived from a static
CIDR table, the referrer's registrable domain, the salt period id, and
an hour-truncated timestamp — never a raw user id or IP.
"""

from __future__ import annotations

import hashlib
import ipaddress
import secrets
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path
from typing import Callable
from urllib.parse import urlsplit

from .errors import NotFound
from .store import PrimaryStore

SALT_BYTES = 32  # 256 bits of salt
DEFAULT_PERIOD_SECONDS = 24 * 3600
TOP_REFERRERS = 10


@dataclass
class Salt:
    period_id: int
    value: bytes
    period_start: str
    period_seconds: int


@dataclass
class RequesterContext:
    """Raw request facts; consumed at ingestion, never persisted."""

    personal_identifier: str  # user id if authenticated else remote address
    remote_address: str
    referrer: str | None = None


@dataclass
class UsageAggregate:
    unique_views: int = 0
    unique_downloads: int = 0
    views_by_country: dict[str, int] = field(default_factory=dict)
    downloads_by_country: dict[str, int] = field(default_factory=dict)
    downloads_by_file: dict[str, int] = field(default_factory=dict)
    top_referrer_domains: list[tuple[str, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "unique_views": self.unique_views,
            "unique_downloads": self.unique_downloads,
            "views_by_country": dict(sorted(self.views_by_country.items())),
            "downloads_by_country": dict(sorted(self.downloads_by_country.items())),
            "downloads_by_file": dict(sorted(self.downloads_by_file.items())),
            "top_referrer_domains": [list(t) for t in self.top_referrer_domains],
        }


def anonymize(identifier: str, salt_value: bytes) -> str:
    """One-way visitor hash: SHA-256 over salt || identifier, hex."""
    return hashlib.sha256(salt_value + identifier.encode("utf-8")).hexdigest()


def truncate_to_hour(moment: datetime) -> str:
    return moment.replace(minute=0, second=0, microsecond=0).isoformat()


# ---------------------------------------------------------------------------
# Country lookup: longest-prefix match over a static CIDR table
# ---------------------------------------------------------------------------


class CountryTable:
    """Static CIDR -> ISO-3166 alpha-2 mapping; one ``CIDR<TAB>CC`` per line."""

    def __init__(self, entries: list[tuple[str, str]] | None = None):
        self._networks: list[tuple[ipaddress._BaseNetwork, str]] = []
        for cidr, country in entries or []:
            self._networks.append((ipaddress.ip_network(cidr, strict=False), country))

    @classmethod
    def from_file(cls, path: str | Path) -> "CountryTable":
        entries = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cidr, _, country = line.partition("\t")
            if not country:
                cidr, _, country = line.partition(" ")
            entries.append((cidr.strip(), country.strip()))
        return cls(entries)

    def country_of(self, remote_address: str) -> str:
        try:
            address = ipaddress.ip_address(remote_address)
        except ValueError:
            return "ZZ"
        best: tuple[int, str] | None = None
        for network, country in self._networks:
            if address.version != network.version:
                continue
            if address in network:
                if best is None or network.prefixlen > best[0]:
                    best = (network.prefixlen, country)
        return best[1] if best else "ZZ"


# ---------------------------------------------------------------------------
# Registrable-domain extraction against a bundled suffix list
# ---------------------------------------------------------------------------


def _load_suffixes() -> frozenset[str]:
    ref = resources.files("consortium_archive").joinpath("data/public_suffixes.txt")
    suffixes = set()
    for line in ref.read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            suffixes.add(line)
    return frozenset(suffixes)


_SUFFIXES = _load_suffixes()


def registrable_domain(referrer: str | None) -> str:
    """Registrable domain of a referrer URL, or '' when none applies.

    Longest listed public suffix wins; unknown TLDs fall back to the
    implicit rule that the TLD itself is the suffix. Bare suffixes and
    IP literals yield ''.
    """
    if not referrer:
        return ""
    host = urlsplit(referrer).hostname
    if not host:
        return ""
    host = host.strip(".").lower()
    try:
        ipaddress.ip_address(host)
        return ""
    except ValueError:
        pass
    labels = host.split(".")
    if len(labels) < 2:
        return ""
    suffix_len = 1  # implicit "*" rule: the TLD is a public suffix
    for take in range(1, len(labels)):
        candidate = ".".join(labels[-take:])
        if candidate in _SUFFIXES:
            suffix_len = take
    if len(labels) <= suffix_len:
        return ""
    return ".".join(labels[-(suffix_len + 1) :])


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------


class StatsService:
    def __init__(
        self,
        store: PrimaryStore,
        countries: CountryTable | None = None,
        period_seconds: int = DEFAULT_PERIOD_SECONDS,
        clock: Callable[[], datetime] | None = None,
    ):
        self.store = store
        self.countries = countries or CountryTable()
        self.period_seconds = period_seconds
        self.clock = clock or (lambda: datetime.now(timezone.utc))

    # -- salt lifecycle -------------------------------------------------------

    def active_salt(self, now: datetime | None = None) -> Salt:
        """Active salt for ``now``, rotating first when the period lapsed."""
        return self.rotate_salt(now or self.clock())

    def rotate_salt(self, now: datetime) -> Salt:
        """Atomic rotation: once the active period has lapsed, a fresh
        random salt becomes active and the previous value is erased.
        No-op (returns the active salt) inside the period."""
        with self.store.transaction() as conn:
            row = conn.execute(
                "SELECT * FROM salts WHERE active = 1 ORDER BY period_id DESC LIMIT 1"
            ).fetchone()
            if row is not None:
                start = datetime.fromisoformat(row["period_start"])
                if now < start + timedelta(seconds=row["period_seconds"]):
                    return Salt(
                        period_id=row["period_id"],
                        value=row["value"],
                        period_start=row["period_start"],
                        period_seconds=row["period_seconds"],
                    )
                # Period over: deactivate and destroy the old value.
                conn.execute(
                    "UPDATE salts SET active = 0, value = NULL WHERE period_id = ?",
                    (row["period_id"],),
                )
            value = secrets.token_bytes(SALT_BYTES)
            cur = conn.execute(
                "INSERT INTO salts (value, period_start, period_seconds, active)"
                " VALUES (?, ?, ?, 1)",
                (value, now.isoformat(), self.period_seconds),
            )
            return Salt(
                period_id=cur.lastrowid,
                value=value,
                period_start=now.isoformat(),
                period_seconds=self.period_seconds,
            )

    # -- ingestion -------------------------------------------------------------

    def _ingest(
        self,
        event_type: str,
        version_id: str,
        ctx: RequesterContext,
        file_name: str | None,
        now: datetime | None,
    ) -> None:
        version = self.store.get_version(version_id)
        if version is None:
            raise NotFound("version")
        moment = now or self.clock()
        salt = self.rotate_salt(moment)
        visitor_hash = anonymize(ctx.personal_identifier, salt.value)
        with self.store.transaction() as conn:
            conn.execute(
                "INSERT INTO usage_events (event_type, version_id, record_id, file_name,"
                " visitor_hash, country, referrer_domain, period_id, occurred_at)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    event_type,
                    version_id,
                    version.record_id,
                    file_name,
                    visitor_hash,
                    self.countries.country_of(ctx.remote_address),
                    registrable_domain(ctx.referrer),
                    salt.period_id,
                    truncate_to_hour(moment),
                ),
            )

    def ingest_view(
        self, version_id: str, ctx: RequesterContext, now: datetime | None = None
    ) -> None:
        self._ingest("view", version_id, ctx, None, now)

    def ingest_download(
        self,
        version_id: str,
        file_name: str,
        ctx: RequesterContext,
        now: datetime | None = None,
    ) -> None:
        self._ingest("download", version_id, ctx, file_name, now)

    # -- aggregation -------------------------------------------------------------

    def _aggregate(self, where: str, params: tuple) -> UsageAggregate:
        agg = UsageAggregate()
        with self.store.reading() as conn:
            agg.unique_views = conn.execute(
                "SELECT COUNT(DISTINCT visitor_hash || ':' || period_id) AS n"
                f" FROM usage_events WHERE event_type = 'view' AND {where}",
                params,
            ).fetchone()["n"]
            agg.unique_downloads = conn.execute(
                "SELECT COUNT(DISTINCT visitor_hash || ':' || period_id) AS n"
                f" FROM usage_events WHERE event_type = 'download' AND {where}",
                params,
            ).fetchone()["n"]
            for event_type, target in (
                ("view", agg.views_by_country),
                ("download", agg.downloads_by_country),
            ):
                rows = conn.execute(
                    "SELECT country, COUNT(DISTINCT visitor_hash || ':' || period_id) AS n"
                    f" FROM usage_events WHERE event_type = ? AND {where}"
                    " GROUP BY country",
                    (event_type, *params),
                ).fetchall()
                for r in rows:
                    target[r["country"]] = r["n"]
            rows = conn.execute(
                "SELECT file_name, COUNT(DISTINCT visitor_hash || ':' || period_id) AS n"
                f" FROM usage_events WHERE event_type = 'download' AND {where}"
                " GROUP BY file_name",
                params,
            ).fetchall()
            for r in rows:
                if r["file_name"]:
                    agg.downloads_by_file[r["file_name"]] = r["n"]
            rows = conn.execute(
                "SELECT referrer_domain, COUNT(DISTINCT visitor_hash || ':' || period_id) AS n"
                f" FROM usage_events WHERE referrer_domain != '' AND {where}"
                " GROUP BY referrer_domain ORDER BY n DESC, referrer_domain ASC LIMIT ?",
                (*params, TOP_REFERRERS),
            ).fetchall()
            agg.top_referrer_domains = [(r["referrer_domain"], r["n"]) for r in rows]
        return agg

    def stats_for_version(self, version_id: str) -> UsageAggregate:
        if self.store.get_version(version_id) is None:
            raise NotFound("version")
        return self._aggregate("version_id = ?", (version_id,))

    def stats_cumulative(self, record_id: str) -> UsageAggregate:
        """Element-wise sum of the per-version aggregates."""
        record = self.store.get_record(record_id)
        if record is None:
            raise NotFound("record")
        total = UsageAggregate()
        referrers: dict[str, int] = {}
        for version in record.versions:
            agg = self.stats_for_version(version.version_id)
            total.unique_views += agg.unique_views
            total.unique_downloads += agg.unique_downloads
            for country, n in agg.views_by_country.items():
                total.views_by_country[country] = total.views_by_country.get(country, 0) + n
            for country, n in agg.downloads_by_country.items():
                total.downloads_by_country[country] = (
                    total.downloads_by_country.get(country, 0) + n
                )
            for name, n in agg.downloads_by_file.items():
                total.downloads_by_file[name] = total.downloads_by_file.get(name, 0) + n
            for domain, n in agg.top_referrer_domains:
                referrers[domain] = referrers.get(domain, 0) + n
        total.top_referrer_domains = sorted(
            referrers.items(), key=lambda kv: (-kv[1], kv[0])
        )[:TOP_REFERRERS]
        return total

    def country_of(self, remote_address: str) -> str:
        return self.countries.country_of(remote_address)
