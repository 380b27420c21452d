"""Persistent-identifier validation and opaque id generation.

ORCID identifiers carry an ISO 7064 MOD 11-2 check character; ROR ids
are matched structurally. Record ids are short opaque strings from a
cryptographically strong source.
"""

from __future__ import annotations

import re
import secrets
import string

ORCID_PATTERN = re.compile(r"^\d{4}-\d{4}-\d{4}-\d{3}[\dX]$")
ROR_PATTERN = re.compile(r"^0[a-z0-9]{6}[0-9]{2}$")

RECORD_ID_LENGTH = 10
_RECORD_ID_ALPHABET = string.ascii_lowercase + string.digits


def orcid_check_char(base_digits: str) -> str:
    """Compute the ORCID check character for a 15-digit base string.

    ISO 7064 MOD 11-2 over the digits, check value 10 rendered as 'X'.
    """
    if len(base_digits) != 15 or not base_digits.isdigit():
        raise ValueError("ORCID base must be exactly 15 digits")
    total = 0
    for ch in base_digits:
        total = (total + int(ch)) * 2
    result = (12 - total % 11) % 11
    return "X" if result == 10 else str(result)


def orcid_format_ok(value: str) -> bool:
    """Structural check only: dddd-dddd-dddd-ddd[dX]."""
    return bool(ORCID_PATTERN.match(value))


def orcid_checksum_ok(value: str) -> bool:
    """Check-digit validation; assumes the format already matched."""
    compact = value.replace("-", "")
    return orcid_check_char(compact[:15]) == compact[15]


def ror_format_ok(value: str) -> bool:
    """ROR id suffix: 9 characters, leading 0, two trailing digits."""
    return bool(ROR_PATTERN.match(value))


def new_record_id() -> str:
    """10-character lowercase alphanumeric id from a CSPRNG."""
    return "".join(secrets.choice(_RECORD_ID_ALPHABET) for _ in range(RECORD_ID_LENGTH))


def version_id_for(record_id: str, version_index: int) -> str:
    return f"{record_id}-v{version_index}"
