"""Command-line client: day-to-day record operations, scheduled
backups, and cross-instance publishing without writing code.

Exit codes (stable contract for schedulers and scripts):
  0 success, 1 validation/input error, 2 authentication,
  3 network, 4 permission/quota/conflict, 5 checksum mismatch.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import tarfile
import tempfile
from dataclasses import dataclass
from pathlib import Path

import click
import requests
import yaml

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_AUTH = 2
EXIT_NETWORK = 3
EXIT_DENIED = 4
EXIT_CHECKSUM = 5

_STATUS_EXITS = {
    400: EXIT_VALIDATION,
    401: EXIT_AUTH,
    403: EXIT_DENIED,
    404: EXIT_DENIED,
    409: EXIT_DENIED,
    413: EXIT_DENIED,
}

CONFIG_ENV = "ARCHIVE_CONFIG"
SERVER_ENV = "ARCHIVE_SERVER_URL"
TOKEN_ENV = "ARCHIVE_TOKEN"
COMMUNITY_ENV = "ARCHIVE_DEFAULT_COMMUNITY"
DEFAULT_CONFIG_PATH = "~/.config/archive-client.yaml"


class CliFailure(Exception):
    def __init__(self, exit_code: int, message: str):
        self.exit_code = exit_code
        super().__init__(message)


@dataclass
class ClientConfig:
    server_url: str
    bearer_token: str
    default_community: str | None = None


def resolve_config(
    server: str | None, token: str | None, community: str | None
) -> ClientConfig:
    """Flag > environment variable > user config file."""
    file_values: dict = {}
    config_path = Path(os.environ.get(CONFIG_ENV, DEFAULT_CONFIG_PATH)).expanduser()
    if config_path.exists():
        file_values = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}

    server_url = server or os.environ.get(SERVER_ENV) or file_values.get("server_url")
    bearer = token or os.environ.get(TOKEN_ENV) or file_values.get("bearer_token")
    default_community = (
        community
        or os.environ.get(COMMUNITY_ENV)
        or file_values.get("default_community")
    )
    if not server_url:
        raise CliFailure(EXIT_VALIDATION, "no server URL configured (--server / ARCHIVE_SERVER_URL)")
    if not bearer:
        raise CliFailure(EXIT_AUTH, "no bearer token configured (--token / ARCHIVE_TOKEN)")
    return ClientConfig(server_url.rstrip("/"), bearer, default_community)


class ApiClient:
    def __init__(self, config: ClientConfig):
        self.config = config
        self.session = requests.Session()
        self.session.headers["Authorization"] = f"Bearer {config.bearer_token}"

    def request(self, method: str, path: str, **kwargs) -> requests.Response:
        url = f"{self.config.server_url}{path}"
        try:
            response = self.session.request(method, url, timeout=60, **kwargs)
        except requests.RequestException as exc:
            raise CliFailure(EXIT_NETWORK, f"cannot reach {url}: {exc}") from exc
        if response.status_code >= 400:
            raise CliFailure(
                _STATUS_EXITS.get(response.status_code, EXIT_DENIED),
                _error_message(response),
            )
        return response

    def get_json(self, path: str, **kwargs) -> dict:
        return self.request("GET", path, **kwargs).json()


def _error_message(response: requests.Response) -> str:
    try:
        body = response.json()
    except ValueError:
        return f"HTTP {response.status_code}"
    message = f"{body.get('code', 'error')}: {body.get('message', '')}"
    for fe in body.get("field_errors", []) or []:
        message += f"\n  {fe['field']}: {fe['reason']}"
    return message


def _emit(payload: dict, json_output: bool, human: str) -> None:
    if json_output:
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        click.echo(human)


def _record_url(config: ClientConfig, record_id: str) -> str:
    return f"{config.server_url}/records/{record_id}"


def _load_metadata_file(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliFailure(EXIT_VALIDATION, f"cannot read metadata file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliFailure(EXIT_VALIDATION, f"metadata file is not valid JSON: {exc}") from exc


def _upload_one(api: ApiClient, record_id: str, path: Path) -> dict:
    if not path.is_file():
        raise CliFailure(EXIT_VALIDATION, f"not a file: {path}")
    with open(path, "rb") as fh:
        response = api.request(
            "PUT",
            f"/api/records/{record_id}/draft/files/{path.name}",
            data=fh,
            headers={"Content-Length": str(path.stat().st_size)},
        )
    return response.json()


def _share(api: ApiClient, record_id: str, target: str) -> dict:
    if target == "consortium":
        body = {"tier": "consortium"}
    else:
        body = {"tier": "community", "community": target}
    return api.request("POST", f"/api/records/{record_id}/actions/share", json=body).json()


pass_state = click.make_pass_decorator(dict)


@click.group()
@click.option("--server", help="archive base URL")
@click.option("--token", help="Bearer token (prefer ARCHIVE_TOKEN)")
@click.option("--community", help="default community for sharing")
@click.option("--json", "json_output", is_flag=True, help="machine-readable output")
@click.pass_context
def main(ctx, server, token, community, json_output):
    """Client for the consortium archive REST API."""
    ctx.obj = {
        "server": server,
        "token": token,
        "community": community,
        "json": json_output,
    }


def client_from(state: dict) -> tuple[ApiClient, ClientConfig]:
    config = resolve_config(state["server"], state["token"], state["community"])
    return ApiClient(config), config


def cli_command(func):
    """Translate CliFailure into the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except CliFailure as exc:
            click.echo(str(exc), err=True)
            sys.exit(exc.exit_code)

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


@main.command()
@click.option("--metadata", "metadata_file", required=True, type=click.Path())
@click.option("--file", "file_paths", multiple=True, type=click.Path())
@click.option("--share", "share_target", help="community slug or 'consortium'")
@pass_state
@cli_command
def upload(state, metadata_file, file_paths, share_target):
    """Create a record from a metadata file, attach files, optionally share."""
    api, config = client_from(state)
    metadata = _load_metadata_file(metadata_file)
    version = api.request("POST", "/api/records", json=metadata).json()
    record_id = version["record_id"]
    for path in file_paths:
        _upload_one(api, record_id, Path(path))
    shared = False
    if share_target:
        _share(api, record_id, share_target)
        shared = True
    _emit(
        {
            "record_id": record_id,
            "version_id": version["version_id"],
            "url": _record_url(config, record_id),
            "shared": shared,
        },
        state["json"],
        f"{record_id}\n{_record_url(config, record_id)}",
    )


@main.command()
@click.argument("record_id")
@pass_state
@cli_command
def get(state, record_id):
    """Show the latest readable version of a record."""
    api, _ = client_from(state)
    version = api.get_json(f"/api/records/{record_id}")
    human = [
        f"{version['record_id']} v{version['version_index']} [{version['state']}]",
        f"title: {version['metadata']['title']}",
        f"tier: {version['tier']}"
        + (f" ({version['community']})" if version.get("community") else ""),
    ]
    for entry in version["files"]:
        human.append(f"file: {entry['name']} ({entry['size']} bytes)")
    _emit(version, state["json"], "\n".join(human))


@main.command()
@click.argument("record_id")
@click.option("--dest", type=click.Path(), default=".")
@pass_state
@cli_command
def download(state, record_id, dest):
    """Download all files of the latest readable version and verify checksums."""
    api, _ = client_from(state)
    version = api.get_json(f"/api/records/{record_id}")
    dest_dir = Path(dest)
    dest_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for entry in version["files"]:
        response = api.request(
            "GET", f"/api/records/{record_id}/files/{entry['name']}", stream=True
        )
        hasher = hashlib.sha256()
        target = dest_dir / entry["name"]
        with open(target, "wb") as fh:
            for chunk in response.iter_content(1 << 16):
                hasher.update(chunk)
                fh.write(chunk)
        digest = f"sha-256:{hasher.hexdigest()}"
        if digest != entry["checksum"]:
            raise CliFailure(
                EXIT_CHECKSUM,
                f"checksum mismatch for {entry['name']}: got {digest}, manifest {entry['checksum']}",
            )
        results.append({"name": entry["name"], "checksum": digest, "path": str(target)})
    _emit(
        {"record_id": record_id, "files": results},
        state["json"],
        "\n".join(f"ok {r['name']}" for r in results) or "no files",
    )


@main.command()
@click.option("-q", "--query", default="")
@click.option("--community")
@click.option("--type", "resource_type")
@click.option("--mine", is_flag=True, help="own records only (personal workspace)")
@click.option("--sort", default="newest")
@click.option("--page", default=1)
@click.option("--size", default=20)
@pass_state
@cli_command
def search(state, query, community, resource_type, mine, sort, page, size):
    """Search records readable by the authenticated user."""
    api, _ = client_from(state)
    params = {"q": query, "sort": sort, "page": page, "size": size}
    if community:
        params["community"] = community
    if resource_type:
        params["type"] = resource_type
    if mine:
        params["owner"] = "me"
    result = api.get_json("/api/search", params=params)
    human = [f"{result['total']} hit(s)"]
    for item in result["items"]:
        human.append(f"{item['record_id']}  v:{item['version_id']}  {item['title']}")
    _emit(result, state["json"], "\n".join(human))


@main.command()
@click.argument("record_id")
@click.option("--metadata", "metadata_file", required=True, type=click.Path())
@pass_state
@cli_command
def update(state, record_id, metadata_file):
    """Replace the metadata of the latest version."""
    api, _ = client_from(state)
    metadata = _load_metadata_file(metadata_file)
    version = api.request(
        "PUT", f"/api/records/{record_id}/draft", json=metadata
    ).json()
    _emit(version, state["json"], f"updated {version['version_id']}")


@main.command()
@click.argument("record_id")
@click.option("--tier", required=True, type=click.Choice(["community", "consortium"]))
@click.option("--community")
@pass_state
@cli_command
def share(state, record_id, tier, community):
    """Share the open draft (or widen a shared version to consortium scope)."""
    api, config = client_from(state)
    if tier == "community" and not community:
        community = config.default_community
        if not community:
            raise CliFailure(EXIT_VALIDATION, "community tier needs --community")
    body = {"tier": tier}
    if tier == "community":
        body["community"] = community
    version = api.request(
        "POST", f"/api/records/{record_id}/actions/share", json=body
    ).json()
    _emit(
        version,
        state["json"],
        f"shared {version['version_id']} at {version['tier']} scope",
    )


@main.command("new-version")
@click.argument("record_id")
@click.option("--import-files", is_flag=True)
@pass_state
@cli_command
def new_version(state, record_id, import_files):
    """Open a new draft version of a shared record."""
    api, _ = client_from(state)
    version = api.request(
        "POST",
        f"/api/records/{record_id}/versions",
        json={"import_files": import_files},
    ).json()
    _emit(version, state["json"], version["version_id"])


@main.command()
@click.argument("record_id")
@click.option("--permission", required=True, type=click.Choice(["view", "edit"]))
@click.option("--expires-at")
@pass_state
@cli_command
def link(state, record_id, permission, expires_at):
    """Mint a share link for a record."""
    api, _ = client_from(state)
    body = {"permission": permission}
    if expires_at:
        body["expires_at"] = expires_at
    minted = api.request("POST", f"/api/records/{record_id}/links", json=body).json()
    _emit(minted, state["json"], minted["url"])


@main.command()
@click.argument("record_id")
@pass_state
@cli_command
def stats(state, record_id):
    """Unique views/downloads per version and cumulatively."""
    api, _ = client_from(state)
    data = api.get_json(f"/api/records/{record_id}/stats")
    human = []
    for version in data["versions"]:
        s = version["stats"]
        human.append(
            f"v{version['version_index']}: views {s['unique_views']},"
            f" downloads {s['unique_downloads']}"
        )
    cumulative = data["cumulative"]
    human.append(
        f"cumulative: views {cumulative['unique_views']},"
        f" downloads {cumulative['unique_downloads']}"
    )
    _emit(data, state["json"], "\n".join(human))


def _find_backup_record(api: ApiClient, label: str) -> str | None:
    """Label -> record mapping lives server-side: exact-title match
    within the caller's own records."""
    result = api.get_json(
        "/api/search", params={"owner": "me", "q": label, "size": 100}
    )
    for item in result["items"]:
        if item["title"] == label:
            return item["record_id"]
    return None


@main.command()
@click.argument("path", type=click.Path())
@click.option("--record-label", required=True)
@click.option("--license", "license_id", default="bm-2030")
@pass_state
@cli_command
def backup(state, path, record_label, license_id):
    """Upload a snapshot as the next version of a label-keyed record.

    Suitable for cron: each run creates one new shared version.
    """
    api, config = client_from(state)
    if not config.default_community:
        raise CliFailure(EXIT_VALIDATION, "backup needs a default community configured")
    source = Path(path)
    if not source.exists() or not os.access(source, os.R_OK):
        raise CliFailure(EXIT_VALIDATION, f"unreadable path: {path}")

    tmp = None
    try:
        if source.is_dir():
            tmp = tempfile.NamedTemporaryFile(suffix=".tar", delete=False)
            with tarfile.open(tmp.name, "w") as tar:
                tar.add(source, arcname=source.name)
            snapshot, name = Path(tmp.name), f"{source.name}.tar"
        else:
            snapshot, name = source, source.name

        record_id = _find_backup_record(api, record_label)
        if record_id is None:
            metadata = {
                "title": record_label,
                "license": license_id,
                "description": "Automated backup snapshots.",
                "resource_type": "dataset",
            }
            version = api.request("POST", "/api/records", json=metadata).json()
            record_id = version["record_id"]
        else:
            version = api.request(
                "POST",
                f"/api/records/{record_id}/versions",
                json={"import_files": False},
            ).json()

        with open(snapshot, "rb") as fh:
            api.request(
                "PUT",
                f"/api/records/{record_id}/draft/files/{name}",
                data=fh,
                headers={"Content-Length": str(snapshot.stat().st_size)},
            )
        shared = _share(api, record_id, config.default_community)
    finally:
        if tmp is not None:
            os.unlink(tmp.name)

    _emit(
        {
            "record_id": record_id,
            "version_id": shared["version_id"],
            "version_index": shared["version_index"],
        },
        state["json"],
        shared["version_id"],
    )


@main.command()
@click.argument("record_id")
@click.option("--target-url", required=True)
@click.option("--target-token", required=True)
@pass_state
@cli_command
def publish(state, record_id, target_url, target_token):
    """Copy a shared record into a draft on another archive instance.

    Streams metadata and every file, verifies all remote checksums
    against the source manifest, and leaves the target draft unshared
    for review. A checksum mismatch aborts, deletes the partial remote
    draft, and exits 5.
    """
    api, _ = client_from(state)
    target = ApiClient(ClientConfig(target_url.rstrip("/"), target_token))

    source = api.get_json(f"/api/records/{record_id}/export/json")
    if source["state"] != "shared":
        raise CliFailure(EXIT_DENIED, "only shared records can be published")

    remote = target.request("POST", "/api/records", json=source["metadata"]).json()
    remote_id = remote["record_id"]

    try:
        for entry in source["files"]:
            response = api.request(
                "GET", f"/api/records/{record_id}/files/{entry['name']}", stream=True
            )
            # Spool to disk so the upload carries a real Content-Length
            # (chunked uploads cannot be pre-checked against the quota).
            with tempfile.TemporaryFile() as spool:
                for chunk in response.iter_content(1 << 16):
                    spool.write(chunk)
                size = spool.tell()
                spool.seek(0)
                uploaded = target.request(
                    "PUT",
                    f"/api/records/{remote_id}/draft/files/{entry['name']}",
                    data=spool,
                    headers={"Content-Length": str(size)},
                ).json()
            if uploaded["checksum"] != entry["checksum"]:
                raise CliFailure(
                    EXIT_CHECKSUM,
                    f"checksum mismatch for {entry['name']}:"
                    f" source {entry['checksum']}, target {uploaded['checksum']}",
                )
    except CliFailure:
        # Remove the partial remote draft before surfacing the failure.
        try:
            target.request("DELETE", f"/api/records/{remote_id}/draft")
        except CliFailure:
            pass
        raise

    _emit(
        {"remote_record_id": remote_id, "files": len(source["files"])},
        state["json"],
        remote_id,
    )


if __name__ == "__main__":
    main()
