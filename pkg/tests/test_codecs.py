from __future__ import annotations

import gzip

import pytest

from app.errors import FormatError, JsonFormatError
from app.evidence import TaggedTimestamp
from app.readers.codecs import (
    parse_json,
    parse_json_lines_log,
    parse_kv_log,
    parse_properties,
    parse_shared_prefs,
    parse_xml,
)
from app.services.corpus.dataset import DATASET_TABLE
from app.services.corpus.writer import DOCUMENT_VIEW_EVENTS, shared_prefs_xml


def test_document_view_lines_parse_to_eight_events():
    events = parse_json_lines_log("\n".join(DOCUMENT_VIEW_EVENTS), source="Analytics.log")
    assert len(events) == 8
    assert [e.event_kind for e in events] == [
        "file.view.start",
        "download.start",
        "screen.view",
        "download.success",
        "file.view.success",
        "screen.view",
        "metadata.load.start",
        "metadata.load.unchanged",
    ]
    first = events[0]
    assert first.timestamp == TaggedTimestamp.unix(1335445641.29)
    assert first.attributes["size"] == 1695706
    assert first.attributes["extension"] == "pdf"
    assert first.source == "Analytics.log"
    assert dict(DATASET_TABLE)["13.pdf"] == first.attributes["size"]


def test_json_lines_skip_bad_lines_with_warning():
    warnings = []
    events = parse_json_lines_log('{"event":"a","ts":1}\nnot json\n[1,2]\n\n{"ts":"x"}\n', warnings)
    assert [e.event_kind for e in events] == ["a", "unknown"]
    assert events[1].timestamp is None
    assert events[1].attributes["ts"] == "x"
    assert len(warnings) == 2


def test_json_lines_concatenation_splits_cleanly():
    head = "\n".join(DOCUMENT_VIEW_EVENTS[:3]) + "\n"
    tail = "\n".join(DOCUMENT_VIEW_EVENTS[3:])
    assert parse_json_lines_log(head + tail) == parse_json_lines_log(head) + parse_json_lines_log(tail)


def test_parse_json_keeps_last_duplicate_and_widens_huge_ints():
    warnings = []
    value = parse_json('{"a": 1, "a": 2, "big": 123456789012345678901234567890}', warnings)
    assert value["a"] == 2
    assert isinstance(value["big"], float)
    assert warnings and "duplicate" in warnings[0]


def test_parse_json_reports_position():
    with pytest.raises(JsonFormatError) as info:
        parse_json('{\n  "a": }')
    assert info.value.line == 2


def test_shared_prefs_round_trip_with_corpus_writer():
    data = shared_prefs_xml(
        [
            ("string", "authToken", "u5es7xli4xejrh89kr6xu14tks6grjn3"),
            ("string", "email", "examiner.test@example.com"),
            ("long", "userId", 12345678),
            ("int", "pages", 3),
            ("boolean", "offline", True),
            ("float", "ratio", 1.5),
        ]
    )
    prefs = parse_shared_prefs(data, "myPreference.xml")
    assert prefs.as_dict() == {
        "authToken": "u5es7xli4xejrh89kr6xu14tks6grjn3",
        "email": "examiner.test@example.com",
        "userId": 12345678,
        "pages": 3,
        "offline": True,
        "ratio": 1.5,
    }
    assert prefs.get("missing", "default") == "default"


def test_shared_prefs_set_and_bad_entries():
    warnings = []
    prefs = parse_shared_prefs(
        b"<map><set name='ids'><string>1</string><string>2</string></set>"
        b"<int name='big' value='99999999999' /><widget name='w' /><long name='n' value='7' /></map>",
        "x.xml",
        warnings,
    )
    assert prefs.as_dict() == {"ids": ["1", "2"], "n": 7}
    assert len(warnings) == 2


def test_shared_prefs_requires_map_root():
    with pytest.raises(FormatError):
        parse_shared_prefs(b"<settings/>")


def test_xml_entities_are_refused():
    bomb = (
        b'<?xml version="1.0"?><!DOCTYPE map [<!ENTITY a "aaaaaaaaaa">'
        b'<!ENTITY b "&a;&a;&a;&a;&a;">]><map><string name="x">&b;</string></map>'
    )
    with pytest.raises(FormatError):
        parse_xml(bomb)


def test_kv_log_lines():
    text = (
        "1335445600 [INFO] Account linked user=12345678\n"
        "1335445645.5 [warn] Download start path=/01.jpg size=43183\n"
        "garbage line\n"
    )
    events = parse_kv_log(text, "dropbox_android_log", source="log.txt")
    assert [e.event_kind for e in events] == ["account_linked", "download_start", "raw"]
    assert events[1].timestamp == TaggedTimestamp.unix(1335445645.5)
    assert events[1].attributes["path"] == "/01.jpg"
    assert events[1].attributes["size"] == "43183"
    assert events[1].attributes["level"] == "WARN"
    assert events[2].timestamp is None


def test_kv_log_inflates_gzip():
    blob = gzip.compress(b"1335445600 [INFO] Authenticated user=1\n", mtime=0)
    events = parse_kv_log(blob, "syncplicity_android_log")
    assert len(events) == 1 and events[0].event_kind == "authenticated"


def test_kv_log_broken_gzip_warns():
    warnings = []
    events = parse_kv_log(b"\x1f\x8bgarbage", "syncplicity_android_log", warnings, source="log.gz")
    assert events == []
    assert warnings == ["log.gz: gzip stream could not be inflated"]


def test_kv_log_unknown_format():
    with pytest.raises(ValueError):
        parse_kv_log("", "nonsense")


def test_properties():
    text = "# comment\nemail=examiner.test@example.com\nuserId: 42\n! bang\nbroken\n"
    assert parse_properties(text) == {"email": "examiner.test@example.com", "userId": "42"}
