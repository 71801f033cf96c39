from __future__ import annotations

import pytest

from app.evidence import (
    APPLE_EPOCH_OFFSET,
    AppIdentity,
    CloudFileEntry,
    ContentHash,
    DeviceState,
    HashAlgorithm,
    ObjectOrigin,
    Platform,
    Provider,
    RecoveredObject,
    RecoveryStatus,
    TaggedTimestamp,
    UNKNOWN_VERSION,
    catalog_identities,
    classify_status,
    dedupe_entries,
    is_provenance_warning,
    merge_entries,
    object_status,
    strongest,
    to_unix_seconds,
)

CONTENT = b"%PDF-1.4 minimal body"


def _pdf(name: str = "13.pdf", origin: ObjectOrigin = ObjectOrigin.CACHE_PATH) -> RecoveredObject:
    return RecoveredObject.from_bytes(
        name, origin, CONTENT, offset=0 if origin is ObjectOrigin.CARVED else None
    )


def test_catalog_has_twelve_identities():
    identities = catalog_identities()
    assert len(identities) == 12
    assert len(set(identities)) == 12
    assert all(identity.cataloged for identity in identities)


def test_unknown_version_is_not_cataloged():
    identity = AppIdentity(Provider.DROPBOX, Platform.ANDROID, UNKNOWN_VERSION)
    assert identity.unknown_version
    assert not identity.cataloged
    assert identity.label == "dropbox/android/unknown_version"


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("APS", DeviceState.ACTIVE_POWER_STATE),
        ("cc", DeviceState.CACHE_CLEARED),
        ("PWD", DeviceState.POWERED_DOWN),
        ("CC&PWD", DeviceState.CACHE_CLEARED_POWERED_DOWN),
        ("cache_cleared_powered_down", DeviceState.CACHE_CLEARED_POWERED_DOWN),
    ],
)
def test_device_state_parse(raw, expected):
    assert DeviceState.parse(raw) is expected


def test_device_state_parse_rejects_unknown():
    with pytest.raises(ValueError):
        DeviceState.parse("hibernating")


def test_cache_cleared_states():
    assert {s for s in DeviceState if s.cache_cleared} == {
        DeviceState.CACHE_CLEARED,
        DeviceState.CACHE_CLEARED_POWERED_DOWN,
    }


def test_status_order_is_total_and_thumbnail_wins_tie():
    ranks = [status.rank for status in RecoveryStatus]
    assert len(set(ranks)) == len(ranks)
    assert RecoveryStatus.THUMBNAIL_ONLY.strength == RecoveryStatus.PREVIEW_ONLY.strength
    assert (
        strongest([RecoveryStatus.PREVIEW_ONLY, RecoveryStatus.THUMBNAIL_ONLY])
        is RecoveryStatus.THUMBNAIL_ONLY
    )
    assert strongest([]) is RecoveryStatus.NOT_OBSERVED
    assert (
        strongest([RecoveryStatus.CARVED_DELETED, RecoveryStatus.RECOVERED_UNVERIFIED])
        is RecoveryStatus.RECOVERED_UNVERIFIED
    )


def test_recovered_statuses():
    assert {s for s in RecoveryStatus if s.recovered} == {
        RecoveryStatus.RECOVERED_INTACT,
        RecoveryStatus.RECOVERED_UNVERIFIED,
        RecoveryStatus.CARVED_DELETED,
    }


def test_content_hash_is_normalized_and_validated():
    digest = ContentHash(HashAlgorithm.MD5, "D41D8CD98F00B204E9800998ECF8427E")
    assert digest.hex == "d41d8cd98f00b204e9800998ecf8427e"
    with pytest.raises(ValueError):
        ContentHash(HashAlgorithm.SHA1, "d41d8cd98f00b204e9800998ecf8427e")
    with pytest.raises(ValueError):
        ContentHash(HashAlgorithm.MD5, "z" * 32)


def test_timestamps_convert_to_unix():
    assert to_unix_seconds(TaggedTimestamp.unix(1334914769)) == 1334914769
    assert to_unix_seconds(TaggedTimestamp.apple(0)) == APPLE_EPOCH_OFFSET
    assert to_unix_seconds(TaggedTimestamp.apple(356607569.0)) == 1334914769.0
    with pytest.raises(ValueError):
        TaggedTimestamp.unix(float("nan"))


def test_entry_and_object_validation():
    with pytest.raises(ValueError):
        CloudFileEntry(name="")
    with pytest.raises(ValueError):
        CloudFileEntry(name="a.jpg", size_bytes=-1)
    with pytest.raises(ValueError):
        RecoveredObject.from_bytes("empty", ObjectOrigin.CACHE_PATH, b"")
    with pytest.raises(ValueError):
        RecoveredObject.from_bytes("pdf_1", ObjectOrigin.CARVED, CONTENT)


def test_object_status_by_origin():
    entry = CloudFileEntry(name="13.pdf", source_artifact="db")
    assert object_status(entry, _pdf(origin=ObjectOrigin.CARVED)) is RecoveryStatus.CARVED_DELETED
    assert object_status(entry, _pdf(origin=ObjectOrigin.THUMBNAIL_DIR)) is RecoveryStatus.THUMBNAIL_ONLY
    assert object_status(entry, _pdf(origin=ObjectOrigin.PREVIEW_DIR)) is RecoveryStatus.PREVIEW_ONLY
    assert object_status(entry, _pdf()) is RecoveryStatus.RECOVERED_UNVERIFIED


def test_object_status_checks_hash():
    obj = _pdf()
    good = CloudFileEntry(name="13.pdf", hash=ContentHash(HashAlgorithm.SHA1, obj.sha1))
    assert object_status(good, obj) is RecoveryStatus.RECOVERED_INTACT

    warnings = []
    bad = CloudFileEntry(name="13.pdf", hash=ContentHash(HashAlgorithm.MD5, "0" * 32))
    assert object_status(bad, obj, warnings) is RecoveryStatus.RECOVERED_UNVERIFIED
    assert len(warnings) == 1 and "does not match" in warnings[0]


def test_classify_status_floor():
    assert classify_status(CloudFileEntry(name="x"), []) is RecoveryStatus.NOT_OBSERVED
    listed = CloudFileEntry(name="x", source_artifact="db.db")
    assert classify_status(listed, []) is RecoveryStatus.METADATA_ONLY
    assert classify_status(listed, [_pdf(origin=ObjectOrigin.CARVED)]) is RecoveryStatus.CARVED_DELETED


def test_merge_entries_fills_gaps_and_warns_on_conflict():
    first = CloudFileEntry(name="03.jpg", size_bytes=102448, source_artifact="a", extras={"k": 1})
    second = CloudFileEntry(
        name="03.jpg", size_bytes=99, remote_id="2072716499", source_artifact="b", extras={"k": 2, "j": 3}
    )
    warnings = []
    merged = merge_entries(first, second, warnings)
    assert merged.size_bytes == 102448
    assert merged.remote_id == "2072716499"
    assert merged.extras["k"] == 1 and merged.extras["j"] == 3
    assert merged.extras["also_seen_in"] == ["b"]
    assert len(warnings) == 1 and "size_bytes" in warnings[0]


def test_dedupe_records_provenance_for_cross_store_duplicates():
    warnings = []
    entries = [
        CloudFileEntry(name="a", source_artifact="db"),
        CloudFileEntry(name="a", source_artifact="plist", favorite=True),
        CloudFileEntry(name="b", source_artifact="db"),
    ]
    result = dedupe_entries(entries, warnings)
    assert [e.name for e in result] == ["a", "b"]
    assert result[0].favorite is True
    assert result[0].extras["also_seen_in"] == ["plist"]
    assert warnings == ["merged duplicate a: db + plist"]
    assert all(is_provenance_warning(w) for w in warnings)


def test_dedupe_keeps_every_source_store():
    warnings = []
    entries = [
        CloudFileEntry(name="03.jpg", source_artifact="BoxCoreDataStore.sqlite"),
        CloudFileEntry(name="03.jpg", source_artifact="offline.plist", size_bytes=102448),
        CloudFileEntry(name="03.jpg", source_artifact="cache.json", remote_id="2072716499"),
    ]
    (merged,) = dedupe_entries(entries, warnings)
    assert merged.source_artifact == "BoxCoreDataStore.sqlite"
    assert merged.extras["also_seen_in"] == ["offline.plist", "cache.json"]
    assert merged.size_bytes == 102448 and merged.remote_id == "2072716499"
    assert warnings == [
        "merged duplicate 03.jpg: BoxCoreDataStore.sqlite + offline.plist",
        "merged duplicate 03.jpg: BoxCoreDataStore.sqlite + offline.plist + cache.json",
    ]


def test_same_store_duplicate_is_not_provenance():
    warnings = []
    dedupe_entries([CloudFileEntry(name="a", source_artifact="db")] * 2, warnings)
    assert warnings == ["a: duplicate entry in db merged"]
    assert not is_provenance_warning(warnings[0])
