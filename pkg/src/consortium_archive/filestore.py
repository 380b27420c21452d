"""Content-addressed file store.

Blobs live at ``<root>/<first two hex chars>/<digest>``; the digest is
the blob's SHA-256 so identical contents are stored once. Manifest
entries reference blobs by digest (``content_ref``).
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path
from typing import BinaryIO, Iterator

CHECKSUM_ALGORITHM = "sha-256"
_CHUNK = 1 << 16


def tagged_checksum(hex_digest: str) -> str:
    return f"{CHECKSUM_ALGORITHM}:{hex_digest}"


def split_checksum(checksum: str) -> tuple[str, str]:
    algorithm, _, digest = checksum.partition(":")
    return algorithm, digest


def digest_stream(stream: BinaryIO) -> tuple[str, int]:
    """SHA-256 hex digest and byte count of a stream, without storing."""
    hasher = hashlib.sha256()
    total = 0
    while chunk := stream.read(_CHUNK):
        hasher.update(chunk)
        total += len(chunk)
    return hasher.hexdigest(), total


def digest_file(path: Path) -> tuple[str, int]:
    with open(path, "rb") as fh:
        return digest_stream(fh)


class FileStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _blob_path(self, digest: str) -> Path:
        return self.root / digest[:2] / digest

    def put(self, stream: BinaryIO) -> tuple[str, int]:
        """Store a stream; returns (hex digest, size).

        Writes to a temp file first, then moves into place; an existing
        blob with the same digest is reused (deduplication).
        """
        hasher = hashlib.sha256()
        total = 0
        fd, tmp_name = tempfile.mkstemp(dir=self.root, prefix=".incoming-")
        try:
            with os.fdopen(fd, "wb") as tmp:
                while chunk := stream.read(_CHUNK):
                    hasher.update(chunk)
                    total += len(chunk)
                    tmp.write(chunk)
            digest = hasher.hexdigest()
            target = self._blob_path(digest)
            if target.exists():
                os.unlink(tmp_name)
            else:
                target.parent.mkdir(parents=True, exist_ok=True)
                os.replace(tmp_name, target)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        return digest, total

    def put_bytes(self, data: bytes) -> tuple[str, int]:
        import io

        return self.put(io.BytesIO(data))

    def exists(self, digest: str) -> bool:
        return self._blob_path(digest).exists()

    def open(self, digest: str) -> BinaryIO:
        return open(self._blob_path(digest), "rb")

    def size(self, digest: str) -> int:
        return self._blob_path(digest).stat().st_size

    def iter_chunks(self, digest: str) -> Iterator[bytes]:
        with self.open(digest) as fh:
            while chunk := fh.read(_CHUNK):
                yield chunk

    def verify(self, digest: str) -> bool:
        """Recompute the digest of a stored blob and compare."""
        if not self.exists(digest):
            return False
        recomputed, _ = digest_file(self._blob_path(digest))
        return recomputed == digest
