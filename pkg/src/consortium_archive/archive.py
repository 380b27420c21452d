"""Application container: wires stores and services for one deployment."""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Callable

from .access import AccessService
from .config import DeploymentConfig
from .filestore import FileStore
from .licenses import LicenseRegistry
from .model import KIND_PROJECT
from .records import RecordsService
from .search import Indexer, SearchIndex, SearchService
from .stats import CountryTable, StatsService
from .store import PrimaryStore


class Archive:
    def __init__(
        self, config: DeploymentConfig, clock: Callable[[], datetime] | None = None
    ):
        config.validate()
        self.config = config
        self.clock = clock or (lambda: datetime.now(timezone.utc))

        config.data_dir.mkdir(parents=True, exist_ok=True)
        self.store = PrimaryStore(str(config.primary_db_path))
        self.index = SearchIndex(str(config.index_db_path))
        self.files = FileStore(config.file_store_root)
        self.licenses = LicenseRegistry(extra=config.extra_licenses)

        self.access = AccessService(
            self.store,
            managers=config.managers,
            base_url=config.base_url,
            clock=self.clock,
        )
        self.records = RecordsService(
            self.store,
            self.files,
            self.access,
            self.licenses,
            quota_default=config.quota_default_bytes,
            clock=self.clock,
        )
        self.indexer = Indexer(self.store, self.index)
        self.search = SearchService(self.store, self.index, self.indexer, self.access)

        countries = (
            CountryTable.from_file(config.cidr_table)
            if config.cidr_table
            else CountryTable()
        )
        self.stats = StatsService(
            self.store,
            countries=countries,
            period_seconds=config.salt_period_seconds,
            clock=self.clock,
        )

        self._bootstrap()

    def _bootstrap(self) -> None:
        for community in self.config.communities:
            self.store.put_community(community)
        umbrella = self.store.umbrella_slug()
        for entry in self.config.users:
            account = entry.account
            # Membership closure: any project membership implies umbrella.
            project_slugs = {
                s
                for s in account.memberships
                if (c := self.store.get_community(s)) and c.kind == KIND_PROJECT
            }
            if project_slugs:
                account.memberships.add(umbrella)
            existing = self.store.get_user(account.user_id)
            if existing is None:
                self.store.put_user(account)
            if entry.token:
                self.access.register_token_secret(
                    account.user_id, entry.token, label="bootstrap"
                )
        for record_id, limit in self.config.record_quota_overrides.items():
            if self.store.get_record(record_id) is not None:
                self.store.set_record_quota_override(record_id, limit)
        # Replay any index work left over from a previous run.
        self.indexer.flush()

    def close(self) -> None:
        self.store.close()
        self.index.close()
