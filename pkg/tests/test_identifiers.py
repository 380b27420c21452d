"""ORCID / ROR / id-generation checks.

The ORCID oracle here is an independent ISO 7064 MOD 11-2 formulation:
a digit string a_1..a_16 (check char last, X=10) validates iff

    sum_k a_k * 2^(16-k)  ==  1  (mod 11)

computed with explicit modular exponentiation, i.e. a different path
than the library's accumulate-and-double recurrence.
"""

from __future__ import annotations

import random
import string

from consortium_archive import identifiers


def iso7064_mod11_2_valid(compact: str) -> bool:
    """Weighted-sum validation over a 16-char compact ORCID (no dashes)."""
    assert len(compact) == 16
    total = 0
    for k, ch in enumerate(compact, start=1):
        value = 10 if ch == "X" else int(ch)
        total += value * pow(2, 16 - k, 11)
    return total % 11 == 1


def brute_force_check_char(base15: str) -> str:
    """Try every candidate check value 0..10; exactly one validates."""
    hits = []
    for candidate in range(11):
        ch = "X" if candidate == 10 else str(candidate)
        if iso7064_mod11_2_valid(base15 + ch):
            hits.append(ch)
    assert len(hits) == 1, f"expected unique check char for {base15}, got {hits}"
    return hits[0]


def format_orcid(compact: str) -> str:
    return "-".join(compact[i : i + 4] for i in range(0, 16, 4))


def test_known_valid_orcid():
    # 0000-0002-1825-0097 carries a correct check digit.
    assert identifiers.orcid_format_ok("0000-0002-1825-0097")
    assert identifiers.orcid_checksum_ok("0000-0002-1825-0097")
    assert iso7064_mod11_2_valid("0000000218250097")


def test_known_invalid_orcid_checksum():
    # Brute force over the same base digits shows 7 is the only valid check char.
    assert brute_force_check_char("000000021825009") == "7"
    assert not identifiers.orcid_checksum_ok("0000-0002-1825-0098")
    assert not iso7064_mod11_2_valid("0000000218250098")


def test_orcid_format_rejections():
    for bad in (
        "0000-0002-1825-009",  # too short
        "0000-0002-1825-00971",  # too long
        "0000000218250097",  # missing dashes
        "0000-0002-1825-009x",  # lowercase x
        "abcd-0002-1825-0097",  # non-digit
        "",
    ):
        assert not identifiers.orcid_format_ok(bad)


def test_orcid_check_char_agrees_with_brute_force_on_random_prefixes():
    # Agreement with an independent ISO-7064 run on 1,000
    # random 15-digit prefixes.
    rng = random.Random(7064)
    for _ in range(1000):
        base = "".join(rng.choice(string.digits) for _ in range(15))
        expected = brute_force_check_char(base)
        assert identifiers.orcid_check_char(base) == expected
        assert identifiers.orcid_checksum_ok(format_orcid(base + expected))
        # And every other check char must be rejected.
        wrong = "0" if expected != "0" else "1"
        assert not identifiers.orcid_checksum_ok(format_orcid(base + wrong))


def test_ror_format():
    assert identifiers.ror_format_ok("03yrm5c26")
    assert identifiers.ror_format_ok("0abcdef12")
    for bad in ("13yrm5c26", "03yrm5c2", "03yrm5c267", "03YRM5C26", "0abcdefgh"):
        assert not identifiers.ror_format_ok(bad)


def test_record_id_shape_and_entropy():
    seen = {identifiers.new_record_id() for _ in range(200)}
    assert len(seen) == 200  # no collisions at this scale
    for rid in seen:
        assert len(rid) == 10
        assert all(c.islower() or c.isdigit() for c in rid)
    assert identifiers.version_id_for("abc123def4", 2) == "abc123def4-v2"
