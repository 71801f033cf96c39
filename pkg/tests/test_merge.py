from __future__ import annotations

import hashlib
import random
from typing import List, Tuple

import pytest

from app.errors import MixedProviderError
from app.evidence import (
    AppIdentity,
    AppSnapshot,
    CloudFileEntry,
    ContentHash,
    DeviceState,
    HashAlgorithm,
    ObjectOrigin,
    Platform,
    Provider,
    RecoveredObject,
    RecoveryStatus,
    SnapshotEntry,
)
from app.services.corpus import EXPECTED_UNION, MERGE_TRIPLES, Scenario
from app.services.merge import combine_datasets, count_recovered, merge_snapshots

from .util import analyze_scenario, snapshot_for

IDENTITY = AppIdentity(Provider.BOX, Platform.ANDROID, "1.6.7")
NAMES = [f"{i:02d}.bin" for i in range(1, 21)]
STATUSES = list(RecoveryStatus)
TRIPLES = range(1000)

Labeled = List[Tuple[str, AppSnapshot]]


def _md5(name: str) -> str:
    return hashlib.md5(name.encode()).hexdigest()


def _random_snapshot(rng: random.Random) -> AppSnapshot:
    entries = []
    for name in rng.sample(NAMES, rng.randrange(0, len(NAMES) + 1)):
        hashed = rng.random() < 0.7
        entry = CloudFileEntry(
            name,
            hash=ContentHash(HashAlgorithm.MD5, _md5(name)) if hashed else None,
        )
        entries.append(SnapshotEntry(entry, rng.choice(STATUSES)))
    return AppSnapshot(IDENTITY, entries=tuple(entries))


def _triple(seed: int) -> Labeled:
    rng = random.Random(f"merge:{seed}")
    return [(device, _random_snapshot(rng)) for device in ("phone", "tablet", "spare")]


@pytest.mark.parametrize("seed", TRIPLES)
def test_merge_algebra(seed):
    labeled = _triple(seed)
    merged = merge_snapshots(labeled)

    shuffled = list(labeled)
    random.Random(seed).shuffle(shuffled)
    assert merge_snapshots(shuffled) == merged
    assert merge_snapshots(list(reversed(labeled))) == merged

    assert merge_snapshots(labeled + labeled) == merged
    assert combine_datasets([merged, merged]) == merged

    singles = [count_recovered(merge_snapshots([pair])) for pair in labeled]
    union = count_recovered(merged)
    assert max(singles) <= union <= sum(singles), f"singles={singles} union={union}"


def test_merge_is_associative_over_datasets():
    first, second, third = _triple(7)
    nested = combine_datasets([merge_snapshots([first, second]), merge_snapshots([third])])
    assert nested == merge_snapshots([first, second, third])


def test_provenance_keeps_every_device():
    shared = CloudFileEntry("report.pdf", hash=ContentHash(HashAlgorithm.MD5, _md5("report")))
    a = AppSnapshot(IDENTITY, entries=(SnapshotEntry(shared, RecoveryStatus.THUMBNAIL_ONLY),))
    b = AppSnapshot(IDENTITY, entries=(SnapshotEntry(shared, RecoveryStatus.RECOVERED_INTACT),))
    merged = merge_snapshots([("a", a), ("b", b)])
    item = merged.item("report.pdf")
    assert item is not None
    assert item.best_status is RecoveryStatus.RECOVERED_INTACT
    assert dict(item.provenance) == {
        "a": RecoveryStatus.THUMBNAIL_ONLY,
        "b": RecoveryStatus.RECOVERED_INTACT,
    }
    assert item.conflicts == ()


def test_same_name_different_content_stays_apart():
    one = CloudFileEntry("notes.docx", hash=ContentHash(HashAlgorithm.MD5, _md5("one")))
    two = CloudFileEntry("notes.docx", hash=ContentHash(HashAlgorithm.MD5, _md5("two")))
    merged = merge_snapshots(
        [
            ("a", AppSnapshot(IDENTITY, entries=(SnapshotEntry(one, RecoveryStatus.RECOVERED_INTACT),))),
            ("b", AppSnapshot(IDENTITY, entries=(SnapshotEntry(two, RecoveryStatus.METADATA_ONLY),))),
        ]
    )
    assert [item.name for item in merged.items] == ["notes.docx", "notes.docx"]
    assert all(item.conflicts for item in merged.items)
    assert count_recovered(merged) == 1


def test_synthetic_name_joins_the_file_with_its_bytes():
    content = b"%PDF-1.4 carved bytes"
    md5 = hashlib.md5(content).hexdigest()
    named = CloudFileEntry("13.pdf", hash=ContentHash(HashAlgorithm.MD5, md5))
    carved = RecoveredObject.from_bytes("pdf_4096", ObjectOrigin.CARVED, content, offset=4096)
    anonymous = CloudFileEntry("pdf_4096", synthetic_name=True)
    merged = merge_snapshots(
        [
            ("a", AppSnapshot(IDENTITY, entries=(SnapshotEntry(named, RecoveryStatus.METADATA_ONLY),))),
            (
                "b",
                AppSnapshot(
                    IDENTITY,
                    entries=(SnapshotEntry(anonymous, RecoveryStatus.CARVED_DELETED, (carved,)),),
                ),
            ),
        ]
    )
    assert [item.name for item in merged.items] == ["13.pdf"]
    assert merged.items[0].best_status is RecoveryStatus.CARVED_DELETED


def test_mixed_providers_refused():
    other = AppSnapshot(AppIdentity(Provider.DROPBOX, Platform.IOS, "1.4.7"))
    with pytest.raises(MixedProviderError):
        merge_snapshots([("a", AppSnapshot(IDENTITY)), ("b", other)])


def test_empty_merge():
    merged = merge_snapshots([])
    assert merged.provider is None
    assert merged.items == ()


@pytest.mark.acceptance
@pytest.mark.parametrize("provider", sorted(MERGE_TRIPLES, key=lambda p: p.value), ids=lambda p: p.value)
def test_union_of_three_devices(provider):
    labeled = [
        (
            identity.label,
            snapshot_for(analyze_scenario(Scenario(identity, DeviceState.ACTIVE_POWER_STATE)), provider),
        )
        for identity in MERGE_TRIPLES[provider]
    ]
    merged = merge_snapshots(labeled)
    assert merged.provider is provider
    assert count_recovered(merged) == EXPECTED_UNION[provider]
