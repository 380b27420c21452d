"""Deployment configuration.

One YAML file describes a deployment: where data lives, the community
list (exactly one umbrella), user accounts with optional bootstrap API
tokens, community managers, storage limits, the CIDR country table, and
licenses beyond the built-in set. See README for the field-by-field
reference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .licenses import LicenseInfo
from .model import KIND_PROJECT, KIND_UMBRELLA, Community, UserAccount
from .records import DEFAULT_QUOTA_BYTES


@dataclass
class BootstrapUser:
    account: UserAccount
    token: str | None = None  # optional initial API token secret


@dataclass
class DeploymentConfig:
    display_name: str = "Consortium Archive"
    base_url: str = "http://localhost:8000"
    data_dir: Path = Path("./archive-data")
    quota_default_bytes: int = DEFAULT_QUOTA_BYTES
    salt_period_seconds: int = 24 * 3600
    trust_proxy_headers: bool = False
    communities: list[Community] = field(default_factory=list)
    users: list[BootstrapUser] = field(default_factory=list)
    managers: dict[str, list[str]] = field(default_factory=dict)
    extra_licenses: list[LicenseInfo] = field(default_factory=list)
    cidr_table: Path | None = None
    record_quota_overrides: dict[str, int] = field(default_factory=dict)
    static_dir: Path | None = None  # built web-UI assets, served when present

    @property
    def primary_db_path(self) -> Path:
        return self.data_dir / "primary.db"

    @property
    def index_db_path(self) -> Path:
        return self.data_dir / "index.db"

    @property
    def file_store_root(self) -> Path:
        return self.data_dir / "files"

    def validate(self) -> None:
        umbrellas = [c for c in self.communities if c.kind == KIND_UMBRELLA]
        if len(umbrellas) != 1:
            raise ValueError(
                f"deployment needs exactly one umbrella community, found {len(umbrellas)}"
            )


def load_config(path: str | Path) -> DeploymentConfig:
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    cfg = DeploymentConfig()

    cfg.display_name = raw.get("display_name", cfg.display_name)
    cfg.base_url = raw.get("base_url", cfg.base_url)
    cfg.data_dir = Path(raw.get("data_dir", cfg.data_dir))
    cfg.quota_default_bytes = int(raw.get("quota_default_bytes", cfg.quota_default_bytes))
    cfg.salt_period_seconds = int(raw.get("salt_period_seconds", cfg.salt_period_seconds))
    cfg.trust_proxy_headers = bool(raw.get("trust_proxy_headers", False))

    for entry in raw.get("communities", []):
        cfg.communities.append(
            Community(
                slug=entry["slug"],
                display_name=entry.get("display_name", entry["slug"]),
                kind=entry.get("kind", KIND_PROJECT),
            )
        )

    for entry in raw.get("users", []):
        account = UserAccount(
            user_id=entry["user_id"],
            email=entry.get("email", f"{entry['user_id']}@example.org"),
            email_confirmed=bool(entry.get("email_confirmed", True)),
            memberships=set(entry.get("communities", [])),
        )
        cfg.users.append(BootstrapUser(account=account, token=entry.get("token")))

    cfg.managers = {
        slug: list(user_ids) for slug, user_ids in (raw.get("managers") or {}).items()
    }

    for entry in raw.get("licenses", []):
        text = ""
        if entry.get("text_file"):
            text = Path(entry["text_file"]).read_text(encoding="utf-8")
        cfg.extra_licenses.append(
            LicenseInfo(
                license_id=entry["id"],
                name=entry.get("name", entry["id"]),
                url=entry.get("url", ""),
                text=text,
            )
        )

    if raw.get("cidr_table"):
        cfg.cidr_table = Path(raw["cidr_table"])

    if raw.get("static_dir"):
        cfg.static_dir = Path(raw["static_dir"])

    cfg.record_quota_overrides = {
        str(record_id): int(limit)
        for record_id, limit in (raw.get("record_quota_overrides") or {}).items()
    }

    cfg.validate()
    return cfg
