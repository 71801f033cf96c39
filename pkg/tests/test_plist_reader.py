from __future__ import annotations

import datetime as dt
import plistlib
import random
import struct

import pytest

from app.errors import PlistCycleError, PlistFormatError
from app.evidence import TaggedTimestamp
from app.readers.plist import parse_plist, plist_strings

FORMATS = {"xml": plistlib.FMT_XML, "binary": plistlib.FMT_BINARY}
SEEDS = range(60)

_APPLE_EPOCH = dt.datetime(2001, 1, 1)
_CHARS = "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789/._-<>&\"'\néüß中文Ж😀"


def _string(rng: random.Random) -> str:
    return "".join(rng.choice(_CHARS) for _ in range(rng.randrange(0, 40)))


def _leaf(rng: random.Random):
    kind = rng.randrange(8)
    if kind == 0:
        return rng.randint(-(1 << 63), (1 << 63) - 1)
    if kind == 1:
        return rng.randrange(0, 70000)
    if kind == 2:
        return rng.uniform(-1e12, 1e12)
    if kind == 3:
        return rng.random() < 0.5
    if kind == 4:
        return rng.randbytes(rng.randrange(0, 300))
    if kind == 5:
        return _APPLE_EPOCH + dt.timedelta(seconds=rng.randrange(0, 30 * 365 * 86400))
    return _string(rng)


def _tree(rng: random.Random, depth: int = 0):
    if depth >= 3 or rng.random() < 0.3:
        return _leaf(rng)
    if rng.random() < 0.5:
        return [_tree(rng, depth + 1) for _ in range(rng.randrange(0, 8))]
    return {_string(rng): _tree(rng, depth + 1) for _ in range(rng.randrange(0, 8))}


def _normalize(value):
    """plistlib hands back naive UTC datetimes; the reader keeps Apple-epoch seconds."""

    if isinstance(value, dt.datetime):
        return TaggedTimestamp.apple((value.replace(tzinfo=None) - _APPLE_EPOCH).total_seconds())
    if isinstance(value, dict):
        return {key: _normalize(child) for key, child in value.items()}
    if isinstance(value, list):
        return [_normalize(child) for child in value]
    return value


@pytest.mark.differential
@pytest.mark.parametrize("fmt", sorted(FORMATS))
@pytest.mark.parametrize("seed", SEEDS)
def test_parse_matches_plistlib(fmt, seed):
    rng = random.Random(f"plist:{seed}")
    tree = {"root": _tree(rng), "count": seed, "name": _string(rng)}
    blob = plistlib.dumps(tree, fmt=FORMATS[fmt])
    assert parse_plist(blob) == _normalize(plistlib.loads(blob))


def test_binary_types_are_exact():
    stamp = dt.datetime(2012, 4, 20, 9, 39, 29)
    blob = plistlib.dumps(
        {"big": (1 << 63) - 1, "neg": -5, "uid": 7, "when": stamp, "data": b"\x00\x01"},
        fmt=plistlib.FMT_BINARY,
    )
    parsed = parse_plist(blob)
    assert parsed["big"] == (1 << 63) - 1
    assert parsed["neg"] == -5
    assert parsed["when"] == TaggedTimestamp.apple(356607569.0)
    assert parsed["data"] == b"\x00\x01"


def test_xml_plist_with_bom_and_hex_integer():
    blob = (
        b"\xef\xbb\xbf<?xml version=\"1.0\"?><plist version=\"1.0\"><dict>"
        b"<key>n</key><integer>0x10</integer><key>d</key><date>2012-04-20T09:39:29Z</date>"
        b"</dict></plist>"
    )
    assert parse_plist(blob) == {"n": 16, "d": TaggedTimestamp.apple(356607569.0)}


def test_self_referencing_array_is_a_cycle():
    body = b"bplist00" + b"\xa1\x00"
    table = b"\x08"
    trailer = b"\x00" * 6 + struct.pack(">BBQQQ", 1, 1, 1, 0, len(body))
    with pytest.raises(PlistCycleError):
        parse_plist(body + table + trailer)


@pytest.mark.parametrize(
    "blob",
    [
        b"",
        b"bplist00",
        b"plain text",
        b"<plist><dict><key>a</key></dict></plist>",
        b"<plist><dict><key>a</key><widget/></dict></plist>",
    ],
)
def test_malformed_plists_raise(blob):
    with pytest.raises(PlistFormatError):
        parse_plist(blob)


def test_plist_strings_walks_keys_and_leaves():
    value = {"Email": "examiner.test@example.com", "nested": [{"x": "y"}, 3]}
    strings = plist_strings(value)
    assert "examiner.test@example.com" in strings
    assert {"Email", "nested", "x", "y"} <= set(strings)


def test_xml_duplicate_key_keeps_last_with_warning():
    blob = (
        b'<?xml version="1.0" encoding="UTF-8"?>\n<plist version="1.0"><dict>'
        b"<key>email</key><string>old@example.com</string>"
        b"<key>email</key><string>new@example.com</string>"
        b"</dict></plist>"
    )
    warnings = []
    assert parse_plist(blob, warnings) == {"email": "new@example.com"}
    assert warnings == ["duplicate plist key 'email'; last value kept"]


def test_binary_duplicate_key_keeps_last_with_warning():
    # dict {"a": 1, "a": 2}: both keys reference the same string object
    body = b"bplist00" + bytes([0xD2, 1, 1, 2, 3]) + b"\x51a" + bytes([0x10, 1, 0x10, 2])
    table = bytes([8, 13, 15, 17])
    trailer = struct.pack(">6xBBQQQ", 1, 1, 4, 0, len(body))
    warnings = []
    assert parse_plist(body + table + trailer, warnings) == {"a": 2}
    assert warnings == ["duplicate plist key 'a'; last value kept"]
