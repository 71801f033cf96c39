from __future__ import annotations

import hashlib

import pytest

from app.evidence import (
    AppIdentity,
    CloudFileEntry,
    ContentHash,
    DeviceState,
    HashAlgorithm,
    ObjectOrigin,
    Platform,
    Provider,
    RecoveredObject,
    TaggedTimestamp,
)
from app.services.analyzers import analyze, reconstruct_box_url, verify_entry_hash
from app.services.analyzers.base import account_from_pairs
from app.services.analyzers.fieldmaps import BOX_ANDROID_FILES, DROPBOX_IOS_FILES
from app.services.corpus import Scenario, generate
from app.services.locator import scan
from app.services.registry import builtin_registry

from .util import analyze_scenario, snapshot_for

BOX_URL = "https://www.box.net/api/1.0/download/u5es7xli4xejrh89kr6xu14tks6grjn3/2072716499"

BOX_IDENTITIES = [
    AppIdentity(Provider.BOX, Platform.ANDROID, "1.6.7"),
    AppIdentity(Provider.BOX, Platform.ANDROID, "2.0.2"),
    AppIdentity(Provider.BOX, Platform.IOS, "2.7.1"),
]


def test_box_url_from_token_and_id():
    assert reconstruct_box_url("u5es7xli4xejrh89kr6xu14tks6grjn3", "2072716499") == BOX_URL
    assert reconstruct_box_url(" u5es7xli4xejrh89kr6xu14tks6grjn3 ", 2072716499) == BOX_URL
    assert reconstruct_box_url("t", "1", host="mobile-api.box.com") == (
        "https://mobile-api.box.com/api/1.0/download/t/1"
    )


@pytest.mark.parametrize("token, file_id", [("", "1"), ("t", ""), ("a/b", "1"), ("t", "1/2"), ("t", None)])
def test_box_url_rejects_bad_parts(token, file_id):
    with pytest.raises(ValueError):
        reconstruct_box_url(token, file_id)


@pytest.mark.acceptance
@pytest.mark.parametrize("identity", BOX_IDENTITIES, ids=lambda i: i.label)
def test_box_snapshot_carries_download_url(identity):
    report = analyze_scenario(Scenario(identity, DeviceState.ACTIVE_POWER_STATE))
    snapshot = snapshot_for(report, Provider.BOX)
    assert snapshot.account.auth_token == "u5es7xli4xejrh89kr6xu14tks6grjn3"
    assert snapshot.download_urls["03.jpg"] == BOX_URL
    assert any("mobile-api.box.com" in note for note in snapshot.notes)


def test_box_account_from_shared_prefs():
    report = analyze_scenario(Scenario(BOX_IDENTITIES[0], DeviceState.ACTIVE_POWER_STATE))
    account = snapshot_for(report, Provider.BOX).account
    assert account.email == "examiner.test@example.com"
    assert account.display_name == "Test Examiner"
    assert account.user_id


def test_analyze_rejects_hits_of_another_provider():
    corpus = generate(
        Scenario(AppIdentity(Provider.DROPBOX, Platform.ANDROID, "2.2.2"), DeviceState.ACTIVE_POWER_STATE)
    )
    hits = scan(corpus.evidence_trees(), builtin_registry())
    with pytest.raises(ValueError):
        analyze(BOX_IDENTITIES[0], hits, corpus.evidence_trees())


def test_dropbox_ios_field_map():
    warnings = []
    entry = DROPBOX_IOS_FILES.to_entry(
        {
            "ZPATH": "/Photos/01.jpg",
            "ZSIZE": 43183,
            "ZFAVORITE": 1,
            "ZLASTVIEWEDDATE": 356607569.0,
            "ZVIEWCOUNT": 2,
            "ZISTHUMBNAIL": None,
        },
        "Dropbox.sqlite",
        warnings,
    )
    assert entry is not None and warnings == []
    assert entry.name == "01.jpg"
    assert entry.size_bytes == 43183
    assert entry.favorite is True
    assert entry.last_viewed == TaggedTimestamp.apple(356607569.0)
    assert entry.source_artifact == "Dropbox.sqlite"
    assert entry.extras == {"ZPATH": "/Photos/01.jpg", "ZVIEWCOUNT": 2}


def test_box_field_map_keeps_bad_values_as_extras():
    warnings = []
    entry = BOX_ANDROID_FILES.to_entry(
        {"mFileName": "13.pdf", "mId": 2072716509, "mSize": "huge", "mSha1": "", "mPermissions": "gd"},
        "json_static_model",
        warnings,
    )
    assert entry is not None
    assert entry.remote_id == "2072716509"
    assert entry.size_bytes is None
    assert entry.hash is None
    assert entry.extras == {"mSize": "huge", "mPermissions": "gd"}
    assert len(warnings) == 1 and "mSize" in warnings[0]


def test_record_without_name_is_skipped():
    warnings = []
    assert BOX_ANDROID_FILES.to_entry({"mId": 7}, "json_static_model", warnings) is None
    assert warnings == ["json_static_model: <file objects> record without a file name skipped"]


def test_verify_entry_hash():
    content = b"%PDF-1.4 sample"
    obj = RecoveredObject.from_bytes("13.pdf", ObjectOrigin.CACHE_PATH, content)
    good = CloudFileEntry("13.pdf", hash=ContentHash(HashAlgorithm.SHA1, hashlib.sha1(content).hexdigest()))
    bad = CloudFileEntry("13.pdf", hash=ContentHash(HashAlgorithm.MD5, hashlib.md5(b"other").hexdigest()))
    assert verify_entry_hash(good, obj) is True
    assert verify_entry_hash(bad, obj) is False
    with pytest.raises(ValueError):
        verify_entry_hash(CloudFileEntry("13.pdf"), obj)


def test_account_from_pairs():
    account = account_from_pairs(
        {
            "firstName": "Test",
            "lastName": "Examiner",
            "login": "signed in as examiner.test@example.com",
            "password": "5f4dcc3b",
            "USER_ID": 42,
            "theme": "dark",
        }
    )
    assert account.display_name == "Test Examiner"
    assert account.email == "examiner.test@example.com"
    assert account.password_hash == "5f4dcc3b"
    assert account.user_id == "42"
    assert account.auth_token is None
    assert account.extras == {"theme": "dark"}


def test_account_falls_back_to_bound_email():
    account = account_from_pairs({"authToken": "abc"}, fallback_email="bound@example.com")
    assert account.auth_token == "abc"
    assert account.email == "bound@example.com"
    assert account.identified
