"""Acceptance suite: one test per criterion, stated tolerances pinned.

Every criterion here is exact (set equality, exact counts, bit-exact
exit codes); the only tolerances are the stated runtime bounds, which
are asserted inside the tests that carry them.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import string
import time
import xml.etree.ElementTree as ET
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest
import requests
from click.testing import CliRunner
from fastapi.testclient import TestClient

from consortium_archive import access as ac
from consortium_archive.access import ANONYMOUS, Actor
from consortium_archive.api import create_app
from consortium_archive.archive import Archive
from consortium_archive.cli import main as cli_main
from consortium_archive.config import BootstrapUser, DeploymentConfig
from consortium_archive.export import FORMATS, export, import_metadata_json, canonical_json_payload
from consortium_archive.model import (
    KIND_PROJECT,
    KIND_UMBRELLA,
    Author,
    Community,
    MetadataDocument,
    UserAccount,
)
from consortium_archive.search import matches_query
from consortium_archive.stats import RequesterContext

from conftest import MIB, LiveServer, as_stream, make_config, sample_metadata
from test_export import random_metadata

ENV = {"ARCHIVE_CONFIG": "/nonexistent/archive-client.yaml"}
OLIVIA = Actor(user_id="olivia")
T0 = datetime(2026, 4, 1, 9, 0, tzinfo=timezone.utc)

READ = ac.READ_METADATA
DOWNLOAD = ac.DOWNLOAD_FILES
EDIT = ac.EDIT_METADATA
MODIFY = ac.MODIFY_DRAFT_FILES
CREATE = ac.CREATE_VERSION
SHARE = ac.SHARE
MINT = ac.MINT_LINK
STATS = ac.VIEW_STATS

READS = frozenset({READ, DOWNLOAD, STATS})


# ---------------------------------------------------------------------------
# Criterion 1: permission-matrix oracle
# ---------------------------------------------------------------------------

# Hand-transcribed rule table. Rows: actor class; columns: version state.
# Cell: the exact set of allowed actions out of the eight.
MATRIX = {
    # records stay under the owner's full control; shared files freeze
    "owner": {
        "draft": READS | {EDIT, MODIFY, CREATE, SHARE, MINT},
        "community": READS | {EDIT, CREATE, MINT, SHARE},  # SHARE = widen to consortium
        "consortium": READS | {EDIT, CREATE, MINT},
    },
    # community sharing: members read, download, see stats; nothing else
    "member_same_community": {
        "draft": frozenset(),
        "community": READS,
        "consortium": READS,
    },
    # other communities see nothing at community scope
    "member_other_community": {
        "draft": frozenset(),
        "community": frozenset(),
        "consortium": READS,
    },
    # consortium scope reaches every community member, incl. umbrella-only
    "umbrella_only_member": {
        "draft": frozenset(),
        "community": frozenset(),
        "consortium": READS,
    },
    # the repository is restricted to registered users
    "anonymous": {
        "draft": frozenset(),
        "community": frozenset(),
        "consortium": frozenset(),
    },
    # view links: read-only, shared versions only, any bearer
    "view_link_holder": {
        "draft": frozenset(),
        "community": READS,
        "consortium": READS,
    },
    # edit links: honored only inside the owner's project community;
    # reach the open draft but never grant owner-only powers
    "edit_link_holder_same": {
        "draft": READS | {EDIT, MODIFY, CREATE},
        "community": READS | {EDIT, CREATE},
        "consortium": READS | {EDIT, CREATE},
    },
    # cross-community edit links are dead; own membership still applies
    "edit_link_holder_other": {
        "draft": frozenset(),
        "community": frozenset(),
        "consortium": READS,
    },
}


def test_permission_matrix_oracle(archive):
    started = time.monotonic()

    versions = {}
    links = {}
    for state in ("draft", "community", "consortium"):
        v = archive.records.create_draft("olivia", sample_metadata())
        if state == "community":
            v = archive.records.share(OLIVIA, v.version_id, "community", "alpha")
        elif state == "consortium":
            v = archive.records.share(OLIVIA, v.version_id, "consortium")
        versions[state] = v
        view, _ = archive.access.mint_share_link("olivia", v.record_id, "view")
        edit, _ = archive.access.mint_share_link("olivia", v.record_id, "edit")
        links[state] = {"view": view.token, "edit": edit.token}

    def actor_for(actor_class: str, state: str) -> Actor:
        return {
            "owner": Actor(user_id="olivia"),
            "member_same_community": Actor(user_id="ana"),
            "member_other_community": Actor(user_id="bob"),
            "umbrella_only_member": Actor(user_id="uma"),
            "anonymous": ANONYMOUS,
            "view_link_holder": Actor(link_token=links[state]["view"]),
            "edit_link_holder_same": Actor(user_id="ana", link_token=links[state]["edit"]),
            "edit_link_holder_other": Actor(user_id="bob", link_token=links[state]["edit"]),
        }[actor_class]

    cells = mismatches = 0
    for actor_class, row in MATRIX.items():
        for state, allowed_set in row.items():
            actor = actor_for(actor_class, state)
            for action in ac.ACTIONS:
                cells += 1
                decision = archive.access.evaluate(actor, action, versions[state])
                expected = action in allowed_set
                if decision.allowed != expected:
                    mismatches += 1
                    print(f"MISMATCH {actor_class}/{state}/{action}: "
                          f"got {decision.allowed} ({decision.reason}), want {expected}")
                if not decision.allowed:
                    assert decision.reason, "denials always carry a reason"

    assert cells == 8 * 3 * 8 == 192
    assert mismatches == 0  # 100% cell agreement
    assert time.monotonic() - started < 10.0


# ---------------------------------------------------------------------------
# Criterion 2: stats dedup vs brute-force oracle
# ---------------------------------------------------------------------------


def test_stats_dedup_against_oracle(archive):
    started = time.monotonic()
    rng = random.Random(20301)

    records = []
    for _ in range(3):
        v1 = archive.records.create_draft("olivia", sample_metadata())
        v1 = archive.records.share(OLIVIA, v1.version_id, "consortium")
        v2 = archive.records.new_version(OLIVIA, v1.record_id, import_files=False)
        v2 = archive.records.share(OLIVIA, v2.version_id, "consortium")
        records.append((v1, v2))
    all_versions = [v for pair in records for v in pair]

    visitors = [f"visitor-{i:03d}" for i in range(100)]
    ips = [f"203.0.113.{i}" for i in range(1, 101)]
    period_starts = [T0, T0 + timedelta(hours=25), T0 + timedelta(hours=50)]

    raw_log = []  # (event_type, version_id, visitor, period_index)
    for period_index, start in enumerate(period_starts):
        archive.stats.rotate_salt(start)
        for _ in range(334 if period_index < 2 else 332):
            visitor_index = rng.randrange(100)
            version = rng.choice(all_versions)
            ctx = RequesterContext(
                personal_identifier=visitors[visitor_index],
                remote_address=ips[visitor_index],
            )
            moment = start + timedelta(minutes=rng.randrange(20 * 60))
            if rng.random() < 0.55:
                archive.stats.ingest_view(version.version_id, ctx, now=moment)
                raw_log.append(("view", version.version_id, visitors[visitor_index], period_index))
            else:
                archive.stats.ingest_download(
                    version.version_id, f"file{rng.randrange(3)}.bin", ctx, now=moment
                )
                raw_log.append(
                    ("download", version.version_id, visitors[visitor_index], period_index)
                )
    assert len(raw_log) == 1000

    def oracle(version_id, event_type):
        return len(
            {
                (visitor, period)
                for etype, vid, visitor, period in raw_log
                if vid == version_id and etype == event_type
            }
        )

    for version in all_versions:
        agg = archive.stats.stats_for_version(version.version_id)
        assert agg.unique_views == oracle(version.version_id, "view")
        assert agg.unique_downloads == oracle(version.version_id, "download")

    for v1, v2 in records:
        cumulative = archive.stats.stats_cumulative(v1.record_id)
        assert cumulative.unique_views == (
            oracle(v1.version_id, "view") + oracle(v2.version_id, "view")
        )
        assert cumulative.unique_downloads == (
            oracle(v1.version_id, "download") + oracle(v2.version_id, "download")
        )

    # Zero raw identifiers (user ids or IPs) in the persisted stats store.
    with archive.store.reading() as conn:
        dump = "\n".join(
            str(tuple(row))
            for table in ("usage_events", "salts")
            for row in conn.execute(f"SELECT * FROM {table}")
        )
    for needle in visitors + ips:
        assert needle not in dump

    assert time.monotonic() - started < 10.0


# ---------------------------------------------------------------------------
# Criterion 3: salt rotation straddle
# ---------------------------------------------------------------------------


def test_salt_rotation_straddle(archive):
    v = archive.records.create_draft("olivia", sample_metadata())
    v = archive.records.share(OLIVIA, v.version_id, "consortium")
    ctx = RequesterContext(personal_identifier="visitor-x", remote_address="203.0.113.9")

    for minute in (0, 10, 20):  # period one
        archive.stats.ingest_view(v.version_id, ctx, now=T0 + timedelta(minutes=minute))
    for minute in (0, 30):  # period two, after the 24h salt rotation
        archive.stats.ingest_view(
            v.version_id, ctx, now=T0 + timedelta(hours=25, minutes=minute)
        )

    assert archive.stats.stats_for_version(v.version_id).unique_views == 2  # exact

    with archive.store.reading() as conn:
        rows = conn.execute(
            "SELECT period_id, visitor_hash FROM usage_events ORDER BY event_id"
        ).fetchall()
    by_period: dict[int, set[str]] = {}
    for row in rows:
        by_period.setdefault(row["period_id"], set()).add(row["visitor_hash"])
    assert len(by_period) == 2
    hashes = list(by_period.values())
    assert all(len(h) == 1 for h in hashes)  # identical hashes within a period
    assert hashes[0] != hashes[1]  # unlinkable across periods


# ---------------------------------------------------------------------------
# Criterion 4: quota boundary over the REST API
# ---------------------------------------------------------------------------


def test_quota_boundary(tmp_path):
    archive = Archive(make_config(tmp_path, quota_default_bytes=10 * MIB))
    client = TestClient(create_app(archive))
    token = archive.access.mint_api_token("olivia", "t")
    auth = {"Authorization": f"Bearer {token}"}

    def new_record():
        response = client.post(
            "/api/records", json=sample_metadata().to_dict(), headers=auth
        )
        return response.json()["record_id"]

    def put(record_id, name, mib):
        return client.put(
            f"/api/records/{record_id}/draft/files/{name}",
            content=b"x" * (mib * MIB),
            headers=auth,
        )

    try:
        r1 = new_record()
        assert put(r1, "f1", 4).status_code == 201
        assert put(r1, "f2", 4).status_code == 201
        third = put(r1, "f3", 4)
        assert third.status_code == 413
        assert third.json()["code"] == "quota-exceeded"

        r2 = new_record()
        assert put(r2, "f1", 4).status_code == 201
        assert put(r2, "f2", 4).status_code == 201
        assert put(r2, "f3", 2).status_code == 201  # exactly at the limit
        total = sum(
            f.size for f in archive.store.get_version(f"{r2}-v1").files
        )
        assert total == 10 * MIB
    finally:
        archive.close()


# ---------------------------------------------------------------------------
# Criterion 5: immutability under API fuzz + version chaining
# ---------------------------------------------------------------------------


def test_immutability_fuzz_and_version_chain(archive):
    client = TestClient(create_app(archive))
    tokens = {
        user: archive.access.mint_api_token(user, "t") for user in ("olivia", "ana", "bob")
    }

    md = sample_metadata().to_dict()
    record_id = client.post(
        "/api/records", json=md, headers={"Authorization": f"Bearer {tokens['olivia']}"}
    ).json()["record_id"]
    client.put(
        f"/api/records/{record_id}/draft/files/a.csv",
        content=b"immutable payload",
        headers={"Authorization": f"Bearer {tokens['olivia']}"},
    )
    client.post(
        f"/api/records/{record_id}/actions/share",
        json={"tier": "community", "community": "alpha"},
        headers={"Authorization": f"Bearer {tokens['olivia']}"},
    )

    def manifest_hash():
        version = archive.store.get_version(f"{record_id}-v1")
        manifest = [(f.name, f.size, f.checksum) for f in version.files]
        return hashlib.sha256(json.dumps(manifest).encode()).hexdigest()

    before = manifest_hash()
    rng = random.Random(509)
    actors = [None, "olivia", "ana", "bob"]
    for _ in range(500):
        user = rng.choice(actors)
        headers = {"Authorization": f"Bearer {tokens[user]}"} if user else {}
        roll = rng.random()
        if roll < 0.45:
            response = client.put(
                f"/api/records/{record_id}/draft/files/{rng.choice('abcd')}.bin",
                content=rng.randbytes(rng.randrange(1, 64)),
                headers=headers,
            )
        elif roll < 0.9:
            response = client.delete(
                f"/api/records/{record_id}/draft/files/a.csv", headers=headers
            )
        else:
            response = client.delete(
                f"/api/records/{record_id}/draft", headers=headers
            )
        assert response.status_code in (401, 403, 404), response.text
    assert manifest_hash() == before

    # new_version still works and the chain stays gapless: indices 1..N.
    for expected_index in (2, 3, 4):
        version = client.post(
            f"/api/records/{record_id}/versions",
            json={"import_files": True},
            headers={"Authorization": f"Bearer {tokens['olivia']}"},
        ).json()
        assert version["version_index"] == expected_index
        client.post(
            f"/api/records/{record_id}/actions/share",
            json={"tier": "community", "community": "alpha"},
            headers={"Authorization": f"Bearer {tokens['olivia']}"},
        )
    record = archive.store.get_record(record_id)
    assert [v.version_index for v in record.versions] == [1, 2, 3, 4]


# ---------------------------------------------------------------------------
# Criterion 6: search/permission equivalence, 20 randomized trials
# ---------------------------------------------------------------------------


def corpus_config(tmp_path: Path) -> DeploymentConfig:
    communities = [
        Community("alpha", "Alpha", KIND_PROJECT),
        Community("beta", "Beta", KIND_PROJECT),
        Community("gamma", "Gamma", KIND_PROJECT),
        Community("consortium", "Consortium", KIND_UMBRELLA),
    ]
    assignments = {
        "u0": {"alpha"},
        "u1": {"alpha"},
        "u2": {"beta"},
        "u3": {"beta"},
        "u4": {"gamma"},
        "u5": {"gamma", "alpha"},
        "u6": {"consortium"},
        "u7": set(),
        "u8": {"beta", "gamma"},
        "u9": {"alpha"},
    }
    users = [
        BootstrapUser(UserAccount(uid, f"{uid}@example.org", True, set(slugs)))
        for uid, slugs in assignments.items()
    ]
    return DeploymentConfig(
        display_name="Corpus",
        data_dir=tmp_path / "data",
        communities=communities,
        users=users,
    )


def test_search_permission_equivalence(tmp_path_factory):
    words = ["ion", "cell", "solvent", "anode", "cathode", "cycle", "probe", "flux"]
    owners = ["u0", "u1", "u2", "u3", "u4", "u5"]
    owner_projects = {
        "u0": ["alpha"], "u1": ["alpha"], "u2": ["beta"],
        "u3": ["beta"], "u4": ["gamma"], "u5": ["gamma", "alpha"],
    }

    for trial in range(20):
        rng = random.Random(6000 + trial)
        ar = Archive(corpus_config(tmp_path_factory.mktemp(f"eq{trial}")))
        try:
            for _ in range(50):
                owner = rng.choice(owners)
                md = sample_metadata(
                    title=" ".join(rng.sample(words, 3)),
                    keywords=rng.sample(words, 2),
                )
                md.authors = [Author(name=rng.choice(["Kim Lee", "Ada Yu", "Max Orr"]))]
                v = ar.records.create_draft(owner, md)
                roll = rng.random()
                if roll < 0.4:
                    ar.records.share(
                        Actor(user_id=owner),
                        v.version_id,
                        "community",
                        rng.choice(owner_projects[owner]),
                    )
                elif roll < 0.7:
                    ar.records.share(Actor(user_id=owner), v.version_id, "consortium")

            queries = ["", rng.choice(words), f"{rng.choice(words)} {rng.choice(words)}"]
            for user in [f"u{i}" for i in range(10)] + [None]:
                actor = Actor(user_id=user) if user else ANONYMOUS
                for query in queries:
                    got = {
                        d["version_id"]
                        for d in ar.search.search(actor, query=query, page_size=100).items
                    }
                    expected = set()
                    for version in ar.store.all_versions():
                        if not ar.access.evaluate(actor, READ, version).allowed:
                            continue
                        md = version.metadata
                        if matches_query(
                            md.title, md.keywords, [a.name for a in md.authors], query
                        ):
                            expected.add(version.version_id)
                    assert got == expected, (trial, user, query)

            assert ar.indexer.verify_consistency().empty  # after flush (search flushed)
        finally:
            ar.close()


# ---------------------------------------------------------------------------
# Criterion 7: export validity, losslessness, determinism
# ---------------------------------------------------------------------------


def test_export_criterion(archive):
    DC = "{http://purl.org/dc/elements/1.1/}"
    DATACITE = "{http://datacite.org/schema/kernel-4}"
    mandatory = ("identifier", "creators", "titles", "publisher", "publicationYear", "resourceType")

    rng = random.Random(7788)
    for i in range(100):
        md = random_metadata(rng)
        version = archive.records.create_draft("olivia", md)
        stored = archive.store.get_version(version.version_id)

        datacite, _ = export(stored, "datacite-xml", "Test Archive")
        root = ET.fromstring(datacite)  # well-formed
        for element in mandatory:
            assert root.find(f"{DATACITE}{element}") is not None, element

        dublin, _ = export(stored, "dublincore-xml", "Test Archive")
        dc_root = ET.fromstring(dublin)
        assert dc_root.find(f"{DC}title") is not None
        subjects = [e.text for e in dc_root.findall(f"{DC}subject")]
        assert subjects == stored.metadata.keywords  # every keyword exactly once

        # Lossless json round trip.
        payload = canonical_json_payload(stored)
        assert import_metadata_json(json.loads(json.dumps(payload))) == stored.metadata

        # Deterministic byte-identical re-export, all four formats.
        for fmt in FORMATS:
            first, _ = export(stored, fmt, "Test Archive")
            second, _ = export(stored, fmt, "Test Archive")
            assert first == second


# ---------------------------------------------------------------------------
# Criterion 8: CLI end-to-end against a locally started instance
# ---------------------------------------------------------------------------


def test_cli_end_to_end(tmp_path):
    started = time.monotonic()
    server = LiveServer(Archive(make_config(tmp_path / "srv"))).start()
    try:
        token = server.archive.access.mint_api_token("olivia", "cli")
        runner = CliRunner()

        def invoke(*args, expect=0, extra=()):
            result = runner.invoke(
                cli_main,
                ["--server", server.url, "--token", token, "--json", *extra, *args],
                env=ENV,
                catch_exceptions=False,
            )
            assert result.exit_code == expect, result.stderr
            return json.loads(result.stdout.strip().splitlines()[-1]) if expect == 0 else result

        # upload -> share
        md_path = tmp_path / "m.json"
        md_path.write_text(json.dumps(sample_metadata(title="E2E record").to_dict()))
        payload = b"end-to-end payload " * 64
        file_path = tmp_path / "data.bin"
        file_path.write_bytes(payload)
        uploaded = invoke(
            "upload", "--metadata", str(md_path), "--file", str(file_path),
            "--share", "alpha",
        )
        record_id = uploaded["record_id"]

        # link -> anonymous download via the link, checksum verified
        minted = invoke("link", record_id, "--permission", "view")
        anonymous = requests.get(
            f"{server.url}/api/records/{record_id}/files/data.bin",
            params={"token": minted["token"]},
            timeout=30,
        )
        assert anonymous.status_code == 200
        digest = hashlib.sha256(anonymous.content).hexdigest()
        manifest = server.archive.store.get_version(f"{record_id}-v1").files[0]
        assert f"sha-256:{digest}" == manifest.checksum
        assert anonymous.content == payload

        # backup run twice -> v1, v2 with differing checksums
        snapshot = tmp_path / "state.db"
        snapshot.write_bytes(b"backup generation one")
        b1 = invoke(
            "backup", str(snapshot), "--record-label", "nightly", extra=("--community", "alpha")
        )
        snapshot.write_bytes(b"backup generation two (changed)")
        b2 = invoke(
            "backup", str(snapshot), "--record-label", "nightly", extra=("--community", "alpha")
        )
        assert b1["version_index"] == 1
        assert b2["version_index"] == 2
        assert b1["record_id"] == b2["record_id"]
        record = server.archive.store.get_record(b1["record_id"])
        assert record.versions[0].files[0].checksum != record.versions[1].files[0].checksum
    finally:
        server.stop()
    assert time.monotonic() - started < 60.0


# ---------------------------------------------------------------------------
# Criterion 9: two-instance publish
# ---------------------------------------------------------------------------


def test_two_instance_publish(tmp_path):
    source = LiveServer(Archive(make_config(tmp_path / "src"))).start()
    target = LiveServer(Archive(make_config(tmp_path / "dst"))).start()
    try:
        source_token = source.archive.access.mint_api_token("olivia", "cli")
        target_token = target.archive.access.mint_api_token("bob", "cli")
        runner = CliRunner()

        md_path = tmp_path / "m.json"
        md_path.write_text(
            json.dumps(
                sample_metadata(
                    title="Published campaign",
                    authors=[Author(name="A. Author", orcid="0000-0002-1825-0097")],
                ).to_dict()
            )
        )
        args = ["--server", source.url, "--token", source_token, "--json",
                "upload", "--metadata", str(md_path)]
        for i in range(3):
            p = tmp_path / f"part{i}.bin"
            p.write_bytes(rng_bytes(i, 2048 + i))
            args += ["--file", str(p)]
        args += ["--share", "consortium"]
        result = runner.invoke(cli_main, args, env=ENV, catch_exceptions=False)
        assert result.exit_code == 0, result.stderr
        record_id = json.loads(result.stdout.strip().splitlines()[-1])["record_id"]

        def publish(expect):
            result = runner.invoke(
                cli_main,
                ["--server", source.url, "--token", source_token, "--json",
                 "publish", record_id, "--target-url", target.url,
                 "--target-token", target_token],
                env=ENV,
                catch_exceptions=False,
            )
            assert result.exit_code == expect, (result.stdout, result.stderr)
            return result

        out = json.loads(publish(0).stdout.strip().splitlines()[-1])
        remote = target.archive.store.get_record(out["remote_record_id"])
        local = source.archive.store.get_record(record_id)
        assert remote.latest.metadata == local.latest.metadata  # field-by-field
        assert {f.checksum for f in remote.latest.files} == {
            f.checksum for f in local.latest.files
        }
        assert remote.latest.state == "draft"

        # Induced corruption: same-length tamper on one source blob ->
        # exit 5 and the new partial remote draft is cleaned up.
        entry = local.latest.files[1]
        blob = source.archive.files._blob_path(entry.content_ref)
        blob.write_bytes(b"Z" * entry.size)
        publish(5)
        remaining = target.archive.store.all_version_ids()
        assert remaining == [remote.latest.version_id]  # only the first, intact copy
    finally:
        source.stop()
        target.stop()


def rng_bytes(seed: int, n: int) -> bytes:
    return bytes(random.Random(seed).randrange(256) for _ in range(n))
