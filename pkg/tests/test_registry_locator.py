from __future__ import annotations

import json

import pytest

from app.errors import RegistryError
from app.evidence import (
    UNKNOWN_VERSION,
    AppIdentity,
    DeviceState,
    Platform,
    Provider,
    catalog_identities,
)
from app.services.corpus import Scenario, generate, iter_scenarios
from app.services.image import tree_from_mapping
from app.services.locator import compile_pattern, group_hits, scan
from app.services.registry import (
    PathSignature,
    SignatureRole,
    builtin_registry,
    export_registry,
    load_registry,
    parse_registry,
)

APPROOT = "0F3C8A51-2B7D-4E1A-9C6B-5D4E3F2A1B0C"


def test_builtin_registry_covers_the_catalog():
    registry = builtin_registry()
    assert len(registry) >= 40
    assert {s.identity for s in registry} == set(catalog_identities())
    assert all(s.paper_ref for s in registry)


def test_registry_export_round_trip(tmp_path):
    registry = builtin_registry()
    text = export_registry(registry)
    assert parse_registry(text) == registry
    path = tmp_path / "registry.json"
    path.write_text(text, encoding="utf-8")
    assert load_registry(str(path)) == registry


@pytest.mark.parametrize(
    "text",
    ["not json", '{"a": 1}', '[{"provider": "dropbox"}]', '[{"provider": "icloud", "platform": "ios", '
     '"version": "1", "role": "log_file", "pattern": "/x", "paper_ref": "r"}]'],
)
def test_invalid_registries(text):
    with pytest.raises(RegistryError):
        parse_registry(text)


def test_unknown_placeholder_rejected():
    identity = AppIdentity(Provider.BOX, Platform.IOS, "2.7.1")
    with pytest.raises(RegistryError):
        PathSignature(identity, SignatureRole.LOG_FILE, "/x/{HOME}/log", "ref")
    with pytest.raises(RegistryError):
        PathSignature(identity, SignatureRole.LOG_FILE, "/x/log", "")


def test_compile_pattern_binds_placeholders():
    regex = compile_pattern("/data/data/com.box.android/files/json_static_model_{EMAIL}_0")
    match = regex.fullmatch("/data/data/com.box.android/files/json_static_model_a@b.com_0")
    assert match and match.group("EMAIL") == "a@b.com"
    approot = compile_pattern("/private/var/mobile/Applications/{APPROOT}/Documents")
    assert approot.fullmatch(f"/private/var/mobile/Applications/{APPROOT}/Documents")
    assert not approot.fullmatch("/private/var/mobile/Applications/short/Documents")


def test_scan_of_empty_trees_finds_nothing():
    assert scan([tree_from_mapping("internal", {})], builtin_registry()) == []


@pytest.mark.parametrize(
    "scenario",
    [s for s in iter_scenarios() if s.device_state is DeviceState.ACTIVE_POWER_STATE],
    ids=lambda s: s.slug,
)
def test_scan_finds_every_placed_artifact(scenario):
    corpus = generate(scenario)
    hits = scan(corpus.evidence_trees(), builtin_registry())
    found = {(hit.role.value, hit.resolved_path, hit.tree) for hit in hits}
    expected = {(hit.role, hit.path, hit.tree) for hit in corpus.manifest.expected_hits}
    assert expected <= found, f"missed: {sorted(expected - found)}"
    assert {hit.identity.provider for hit in hits} == {scenario.identity.provider}
    assert len(group_hits(hits)) == 1


@pytest.mark.parametrize(
    "identity, version",
    [
        (AppIdentity(Provider.DROPBOX, Platform.ANDROID, "2.2.2"), UNKNOWN_VERSION),
        (AppIdentity(Provider.SUGARSYNC, Platform.ANDROID, "3.6"), UNKNOWN_VERSION),
        (AppIdentity(Provider.BOX, Platform.ANDROID, "1.6.7"), "1.6.7"),
        (AppIdentity(Provider.BOX, Platform.ANDROID, "2.0.2"), "2.0.2"),
        (AppIdentity(Provider.SYNCPLICITY, Platform.ANDROID, "1.7"), "1.7"),
        (AppIdentity(Provider.SYNCPLICITY, Platform.ANDROID, "2.1.1"), "2.1.1"),
        (AppIdentity(Provider.BOX, Platform.IOS, "2.7.1"), "2.7.1"),
    ],
)
def test_version_inference(identity, version):
    corpus = generate(Scenario(identity, DeviceState.ACTIVE_POWER_STATE))
    hits = scan(corpus.evidence_trees(), builtin_registry())
    assert {hit.identity.app_version for hit in hits} == {version}


def test_ios_app_folders_are_told_apart():
    other = "1A2B3C4D-0000-4000-8000-0123456789AB"
    tree = tree_from_mapping(
        "internal",
        {
            f"/private/var/mobile/Applications/{APPROOT}/Documents/Dropbox.sqlite": b"db",
            f"/private/var/mobile/Applications/{APPROOT}/Library/Caches/Analytics.log": b"{}",
            f"/private/var/mobile/Applications/{other}/Documents/BoxCoreDataStore.sqlite": b"db",
            f"/private/var/mobile/Applications/{other}/Library/Caches/Analytics.log": b"{}",
        },
    )
    groups = group_hits(scan([tree], builtin_registry()))
    assert sorted((identity.provider, group) for identity, group in groups) == [
        (Provider.BOX, other),
        (Provider.DROPBOX, APPROOT),
    ]
    box_hits = groups[(AppIdentity(Provider.BOX, Platform.IOS, "2.7.1"), other)]
    # a Dropbox log under the Box folder belongs to neither app
    assert all("Analytics.log" not in hit.resolved_path for hit in box_hits)


def test_lowercase_patterns_need_case_fallback():
    prefs = f"/private/var/mobile/Applications/{APPROOT}/Library/Preferences/com.syncplicity.ios/syncplicity.plist"
    files = {
        f"/private/var/mobile/Applications/{APPROOT}/Documents/syncplicity.sqlite": b"db",
        prefs: b"bplist00",
    }
    registry = builtin_registry()
    lenient = scan([tree_from_mapping("internal", files)], registry)
    assert any(hit.resolved_path == prefs for hit in lenient)
    strict = scan([tree_from_mapping("internal", files, case_fallback=False)], registry)
    assert all(hit.resolved_path != prefs for hit in strict)


def test_registry_file_can_extend_search(tmp_path):
    records = json.loads(export_registry(builtin_registry()))
    records.append(
        {
            "provider": "dropbox",
            "platform": "android",
            "version": "2.2.2",
            "role": "log_file",
            "pattern": "/data/data/com.dropbox.android/files/extra.log",
            "paper_ref": "Dropbox Android: examiner supplied log location",
        }
    )
    registry = parse_registry(json.dumps(records))
    tree = tree_from_mapping(
        "internal",
        {
            "/data/data/com.dropbox.android/databases/db.db": b"db",
            "/data/data/com.dropbox.android/files/extra.log": b"1 [INFO] x\n",
        },
    )
    hits = scan([tree], registry)
    assert any(hit.resolved_path.endswith("extra.log") for hit in hits)
    assert {hit.identity.app_version for hit in hits} == {"2.2.2"}
