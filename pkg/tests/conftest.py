from __future__ import annotations

import io
from datetime import datetime, timezone
from pathlib import Path

import pytest

from consortium_archive.archive import Archive
from consortium_archive.config import BootstrapUser, DeploymentConfig
from consortium_archive.model import (
    KIND_PROJECT,
    KIND_UMBRELLA,
    Author,
    Community,
    MetadataDocument,
    UserAccount,
)

MIB = 1024 * 1024


def make_config(tmp_path: Path, **overrides) -> DeploymentConfig:
    cfg = DeploymentConfig(
        display_name="Test Archive",
        base_url="http://testserver",
        data_dir=tmp_path / "data",
        quota_default_bytes=10 * MIB,
        communities=[
            Community("alpha", "Project Alpha", KIND_PROJECT),
            Community("beta", "Project Beta", KIND_PROJECT),
            Community("consortium", "The Consortium", KIND_UMBRELLA),
        ],
        users=[
            BootstrapUser(UserAccount("olivia", "olivia@example.org", True, {"alpha"})),
            BootstrapUser(UserAccount("ana", "ana@example.org", True, {"alpha"})),
            BootstrapUser(UserAccount("bob", "bob@example.org", True, {"beta"})),
            BootstrapUser(UserAccount("uma", "uma@example.org", True, {"consortium"})),
            BootstrapUser(UserAccount("noel", "noel@example.org", True, set())),
            BootstrapUser(UserAccount("pending", "pending@example.org", False, {"alpha"})),
        ],
        managers={"alpha": ["admin"], "beta": ["admin"], "consortium": ["admin"]},
    )
    cfg.users.append(
        BootstrapUser(UserAccount("admin", "admin@example.org", True, {"consortium"}))
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


@pytest.fixture
def archive(tmp_path):
    ar = Archive(make_config(tmp_path))
    yield ar
    ar.close()


def sample_metadata(title: str = "Electrolyte sweep", **overrides) -> MetadataDocument:
    md = MetadataDocument(
        title=title,
        license="bm-2030",
        description="Conductivity scan over solvent ratios.",
        keywords=["electrolyte", "conductivity"],
        authors=[Author(name="A. Researcher")],
    )
    for key, value in overrides.items():
        setattr(md, key, value)
    return md


def as_stream(data: bytes) -> io.BytesIO:
    return io.BytesIO(data)


def fixed_clock(iso: str):
    moment = datetime.fromisoformat(iso).replace(tzinfo=timezone.utc)
    return lambda: moment


class LiveServer:
    """Real uvicorn instance on an ephemeral port, for CLI and browser tests."""

    def __init__(self, archive):
        import uvicorn

        from consortium_archive.api import create_app

        self.archive = archive
        self._server = uvicorn.Server(
            uvicorn.Config(
                create_app(archive), host="127.0.0.1", port=0, log_level="error"
            )
        )
        self._thread = None

    def start(self) -> "LiveServer":
        import threading
        import time

        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self._thread.start()
        deadline = time.time() + 10
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        port = self._server.servers[0].sockets[0].getsockname()[1]
        self.url = f"http://127.0.0.1:{port}"
        return self

    def stop(self) -> None:
        self._server.should_exit = True
        if self._thread:
            self._thread.join(timeout=10)
        self.archive.close()


@pytest.fixture
def live_server(tmp_path):
    server = LiveServer(Archive(make_config(tmp_path))).start()
    yield server
    server.stop()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    results = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid and getattr(report, "when", "call") == "call":
                results[nodeid.split("::")[-1]] = outcome
    if results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, outcome in sorted(results.items()):
            marker = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"[{marker}] {name}")
